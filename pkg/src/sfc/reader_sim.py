"""Simulated LLRP readers: one TCP listener per data point.

Each accepted connection speaks the llrp subset as a reader would: it
announces itself with a ConnectionAttemptEvent, walks the ROSpec
lifecycle, answers keepalives, and once started emits one RO_ACCESS_REPORT
per read cycle with that cycle's reads (nothing on empty cycles).
Protocol violations are answered with ERROR_MESSAGE and the connection
is dropped; the framer never resynchronizes.

The ReaderSession state machine is transport-free (bytes in, bytes out)
so the protocol rules are testable without sockets; SimPlant owns the
shared scenario clock and fans each cycle's noised reads out to every
started session.
"""

from __future__ import annotations

import asyncio
import itertools
import logging
from dataclasses import dataclass, field

from . import llrp
from .llrp import LlrpFramer, LlrpMessage, ReadEvent
from .scenario import DataPointConfig, Scenario, World, apply_noise

log = logging.getLogger(__name__)

_ERR_UNSUPPORTED = 109  # M_UnsupportedMessage
_ERR_LIFECYCLE = 100    # M_ParameterError family


class ReaderSession:
    """LLRP reader protocol rules for one connection."""

    def __init__(self, dp: DataPointConfig) -> None:
        self.dp = dp
        self.framer = LlrpFramer()
        self.closed = False
        self._msg_ids = itertools.count(1)
        self._added: set[int] = set()
        self._enabled: set[int] = set()
        self._started: set[int] = set()

    @property
    def reporting(self) -> bool:
        return bool(self._started) and not self.closed

    def hello(self, now_us: int) -> bytes:
        """Connection banner: ConnectionAttemptEvent(success)."""
        return llrp.encode_message(llrp.reader_event_notification(
            next(self._msg_ids), now_us, status=0))

    def cycle_report(self, reads: list[ReadEvent]) -> bytes:
        if not self.reporting or not reads:
            return b""
        report = llrp.build_tag_report(reads, next(self._msg_ids))
        return llrp.encode_message(report)

    def handle_bytes(self, chunk: bytes) -> tuple[bytes, bool]:
        """Feed inbound bytes; returns (outbound bytes, close?)."""
        if self.closed:
            return b"", True
        try:
            messages = self.framer.feed(chunk)
        except llrp.LlrpError as exc:
            self.closed = True
            return self._error(0, _ERR_UNSUPPORTED,
                               f"framing error: {exc}"), True
        out = bytearray()
        for msg in messages:
            reply, close = self._handle_message(msg)
            out.extend(reply)
            if close:
                self.closed = True
                return bytes(out), True
        return bytes(out), False

    def _error(self, msg_id: int, code: int, description: str) -> bytes:
        log.info("%s: protocol violation: %s", self.dp.data_point_id,
                 description)
        return llrp.encode_message(
            llrp.error_message(msg_id, code, description))

    def _ok(self, response_type: int, msg_id: int) -> bytes:
        return llrp.encode_message(
            llrp.status_response(response_type, msg_id))

    def _handle_message(self, msg: LlrpMessage) -> tuple[bytes, bool]:
        mt = msg.msg_type
        if mt == llrp.MSG_KEEPALIVE:
            return llrp.encode_message(llrp.keepalive_ack(msg.msg_id)), False
        if mt == llrp.MSG_GET_READER_CAPABILITIES:
            return self._ok(llrp.MSG_GET_READER_CAPABILITIES_RESPONSE,
                            msg.msg_id), False
        if mt == llrp.MSG_SET_READER_CONFIG:
            return self._ok(llrp.MSG_SET_READER_CONFIG_RESPONSE,
                            msg.msg_id), False
        if mt == llrp.MSG_CLOSE_CONNECTION:
            return self._ok(llrp.MSG_CLOSE_CONNECTION_RESPONSE,
                            msg.msg_id), True
        if mt == llrp.MSG_ADD_ROSPEC:
            rospec_id = llrp.rospec_id_of(msg)
            if rospec_id is None:
                return self._error(msg.msg_id, _ERR_LIFECYCLE,
                                   "ADD_ROSPEC without ROSpec"), True
            self._added.add(rospec_id)
            return self._ok(llrp.MSG_ADD_ROSPEC_RESPONSE, msg.msg_id), False
        if mt == llrp.MSG_ENABLE_ROSPEC:
            rospec_id = llrp.rospec_id_of(msg)
            if rospec_id not in self._added:
                return self._error(msg.msg_id, _ERR_LIFECYCLE,
                                   f"ENABLE_ROSPEC {rospec_id} before "
                                   f"ADD_ROSPEC"), True
            self._enabled.add(rospec_id)
            return self._ok(llrp.MSG_ENABLE_ROSPEC_RESPONSE, msg.msg_id), False
        if mt == llrp.MSG_START_ROSPEC:
            rospec_id = llrp.rospec_id_of(msg)
            if rospec_id not in self._added:
                return self._error(msg.msg_id, _ERR_LIFECYCLE,
                                   f"START_ROSPEC {rospec_id} before "
                                   f"ADD_ROSPEC"), True
            if rospec_id not in self._enabled:
                return self._error(msg.msg_id, _ERR_LIFECYCLE,
                                   f"START_ROSPEC {rospec_id} before "
                                   f"ENABLE_ROSPEC"), True
            self._started.add(rospec_id)
            return self._ok(llrp.MSG_START_ROSPEC_RESPONSE, msg.msg_id), False
        if mt == llrp.MSG_DELETE_ROSPEC:
            rospec_id = llrp.rospec_id_of(msg)
            self._added.discard(rospec_id)
            self._enabled.discard(rospec_id)
            self._started.discard(rospec_id)
            return self._ok(llrp.MSG_DELETE_ROSPEC_RESPONSE, msg.msg_id), False
        return self._error(msg.msg_id, _ERR_UNSUPPORTED,
                           f"unsupported message type {mt}"), True


@dataclass
class ReaderServer:
    """TCP listener for one data point."""
    dp: DataPointConfig
    clock_us: "callable[[], int]"
    sessions: list[tuple[ReaderSession, asyncio.StreamWriter]] = field(
        default_factory=list)
    _server: asyncio.AbstractServer | None = None
    port: int | None = None

    async def start(self) -> tuple[str, int]:
        host, _, port_text = self.dp.listen_endpoint.rpartition(":")
        host = host or "127.0.0.1"
        self._server = await asyncio.start_server(
            self._handle, host, int(port_text or 0))
        sock = self._server.sockets[0]
        self.port = sock.getsockname()[1]
        return host, self.port

    async def _handle(self, reader: asyncio.StreamReader,
                      writer: asyncio.StreamWriter) -> None:
        session = ReaderSession(self.dp)
        entry = (session, writer)
        self.sessions.append(entry)
        try:
            writer.write(session.hello(self.clock_us()))
            await writer.drain()
            while not session.closed:
                chunk = await reader.read(4096)
                if not chunk:
                    break
                out, close = session.handle_bytes(chunk)
                if out:
                    writer.write(out)
                    await writer.drain()
                if close:
                    break
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            session.closed = True
            if entry in self.sessions:
                self.sessions.remove(entry)
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionError, OSError):
                pass

    def push_cycle(self, reads: list[ReadEvent]) -> int:
        """Write this cycle's report to every started session."""
        pushed = 0
        for session, writer in list(self.sessions):
            payload = session.cycle_report(reads)
            if payload:
                writer.write(payload)
                pushed += 1
        return pushed

    async def close(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        for session, writer in list(self.sessions):
            session.closed = True
            writer.close()


class SimPlant:
    """The scripted physical layer: world clock plus one reader per
    data point. A single owner advances the clock; sessions see an
    immutable per-cycle batch."""

    def __init__(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self.world = World(scenario)
        self.now_us = scenario.clock.start_us
        self.servers = {dp.data_point_id: ReaderServer(dp, lambda: self.now_us)
                        for dp in scenario.data_points}

    async def start(self) -> dict[str, tuple[str, int]]:
        endpoints = {}
        for dp_id, server in self.servers.items():
            endpoints[dp_id] = await server.start()
        return endpoints

    def reporting_count(self) -> int:
        """Connections that have completed the ROSpec lifecycle."""
        return sum(1 for server in self.servers.values()
                   for session, _ in server.sessions if session.reporting)

    def step_cycle(self, tick_us: int) -> dict[str, list[ReadEvent]]:
        """Advance to one cycle tick and fan reads out to the readers.

        Returns the noised reads per data point that were actually
        pushed to a live started session.
        """
        self.now_us = tick_us
        cycle_index = (tick_us - self.scenario.clock.start_us) \
            // self.scenario.clock.cycle_period_us
        raw = self.world.step(tick_us)
        noised = apply_noise(raw, self.scenario.noise, cycle_index)
        by_dp: dict[str, list[ReadEvent]] = {}
        for ev in noised:
            by_dp.setdefault(ev.data_point_id, []).append(ev)
        delivered: dict[str, list[ReadEvent]] = {}
        for dp_id, reads in by_dp.items():
            if self.servers[dp_id].push_cycle(reads):
                delivered[dp_id] = reads
        return delivered

    async def run(self, *, cycle_real_s: float = 0.5,
                  skip_idle: bool = True,
                  stop: asyncio.Event | None = None) -> None:
        """Paced mode for live serving: advance the script in real time
        (scaled), skipping read-free spans when asked to."""
        ticks = (self.world.busy_cycle_times() if skip_idle
                 else self.world.cycle_times())
        for tick in ticks:
            if stop is not None and stop.is_set():
                return
            self.step_cycle(tick)
            await asyncio.sleep(cycle_real_s)

    async def close(self) -> None:
        for server in self.servers.values():
            await server.close()
