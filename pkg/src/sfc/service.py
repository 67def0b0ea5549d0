"""Long-running service: engine + HTTP gateway + LLRP links to readers.

The service is the LLRP controller for every configured data point,
feeding reports into the engine as they arrive, and serves the
visibility API. Reader connections retry with backoff, so the API stays
up while a reader is down. On restart the engine replays its journal
before accepting new traffic.
"""

from __future__ import annotations

import asyncio
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import uvicorn

from .controller import ControllerLink
from .engine import SfcEngine
from .gateway import create_app
from .llrp import ReadEvent

log = logging.getLogger(__name__)


class ConfigError(Exception):
    pass


class BindError(Exception):
    pass


@dataclass
class ServiceConfig:
    api_host: str
    api_port: int
    data_points: list[dict]  # {data_point_id, work_center_id, reader}
    presence_timeout_s: float = 10.0
    delay_grace_s: float = 300.0
    exit_data_point_id: str | None = None
    log_path: str | None = None
    ui_dir: str | None = None

    def dp_map(self) -> dict[str, str]:
        return {d["data_point_id"]: d["work_center_id"]
                for d in self.data_points}


def load_config(text: str) -> ServiceConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        host, _, port = doc["api_listen"].rpartition(":")
        dps = doc["data_points"]
        for entry in dps:
            entry["data_point_id"], entry["work_center_id"], entry["reader"]
        config = ServiceConfig(
            api_host=host or "127.0.0.1",
            api_port=int(port),
            data_points=dps,
            presence_timeout_s=float(doc.get("presence_timeout_s", 10.0)),
            delay_grace_s=float(doc.get("delay_grace_s", 300.0)),
            exit_data_point_id=doc.get("exit_data_point_id"),
            log_path=doc.get("log_path"),
            ui_dir=doc.get("ui_dir"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"config field missing or mistyped: {exc!r}") \
            from exc
    ids = [d["data_point_id"] for d in config.data_points]
    if len(set(ids)) != len(ids):
        raise ConfigError("data_point_ids must be unique")
    if config.exit_data_point_id is not None and \
            config.exit_data_point_id not in ids:
        raise ConfigError(f"exit_data_point_id {config.exit_data_point_id} "
                          f"not among data points")
    return config


def load_config_file(path) -> ServiceConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return load_config(text)


@dataclass
class Service:
    config: ServiceConfig
    dispatch_xml: bytes | None = None
    engine: SfcEngine = field(init=False)
    bound_port: int | None = field(default=None, init=False)
    _links: list[ControllerLink] = field(default_factory=list, init=False)

    def __post_init__(self) -> None:
        self.engine = SfcEngine(
            self.config.dp_map(),
            presence_timeout_s=self.config.presence_timeout_s,
            delay_grace_s=self.config.delay_grace_s,
            exit_data_point_id=self.config.exit_data_point_id,
            log_path=self.config.log_path,
        )
        if self.dispatch_xml:
            from .erp_xml import parse_dispatch_xml
            self.engine.import_dispatch(parse_dispatch_xml(self.dispatch_xml))

    def _deliver(self, dp_id: str, reads: list[ReadEvent]) -> None:
        for ev in reads:
            self.engine.ingest(ev, ev.first_seen_utc_us)
        self.engine.detect_delays(self.engine.watermark_us)

    async def run(self, stop: asyncio.Event | None = None,
                  ready: asyncio.Event | None = None) -> None:
        app = create_app(self.engine, ui_dir=self.config.ui_dir)
        server = uvicorn.Server(uvicorn.Config(
            app, host=self.config.api_host, port=self.config.api_port,
            log_level="warning", lifespan="on"))

        async def serve_api():
            try:
                await server.serve()
            except SystemExit as exc:  # uvicorn startup failure
                raise BindError(
                    f"API failed to bind {self.config.api_host}:"
                    f"{self.config.api_port}") from exc

        api_task = asyncio.create_task(serve_api())
        while not server.started:
            if api_task.done():
                exc = api_task.exception()
                raise exc if exc is not None else BindError(
                    f"API exited during startup on {self.config.api_host}:"
                    f"{self.config.api_port}")
            await asyncio.sleep(0.01)
        self.bound_port = server.servers[0].sockets[0].getsockname()[1]
        log.info("API listening on %s:%s", self.config.api_host,
                 self.bound_port)
        if ready is not None:
            ready.set()

        link_tasks = []
        for entry in self.config.data_points:
            host, _, port = entry["reader"].rpartition(":")
            link = ControllerLink(host or "127.0.0.1", int(port),
                                  entry["data_point_id"], self._deliver)
            self._links.append(link)
            link_tasks.append(asyncio.create_task(link.run()))

        try:
            if stop is None:
                stop = asyncio.Event()  # runs until cancelled from outside
            await stop.wait()
        finally:
            for link in self._links:
                await link.close()
            for task in link_tasks:
                task.cancel()
            await asyncio.gather(*link_tasks, return_exceptions=True)
            server.should_exit = True
            try:
                await api_task
            except BindError:
                pass
