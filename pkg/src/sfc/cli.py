"""Command line entry points.

    sfc serve --config service.json [--dispatch plan.xml]
    sfc scenario run demo3.json --dispatch plan.xml --report out.json
    sfc order-status SO-1001 --api http://127.0.0.1:8080

Exit codes: 0 success · 1 scenario verdict failed · 2 config/parse error
· 3 API port bind failure · 4 unknown order · 5 service unreachable.
SFC_LOG_LEVEL (error|warn|info|debug) controls logging.
"""

from __future__ import annotations

import asyncio
import json
import logging
import os
import signal
import sys
from pathlib import Path

import click
import httpx

from . import erp_xml, scenario, service
from .dispatch import DispatchError

EXIT_VERDICT_FAIL = 1
EXIT_PARSE = 2
EXIT_BIND = 3
EXIT_UNKNOWN_ORDER = 4
EXIT_UNREACHABLE = 5

_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING,
           "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    level = _LEVELS.get(os.environ.get("SFC_LOG_LEVEL", "warn").lower(),
                        logging.WARNING)
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


@click.group()
def main() -> None:
    """RFID shop-floor control."""
    _setup_logging()


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(), help="Service config (JSON).")
@click.option("--dispatch", "dispatch_path", type=click.Path(),
              help="Dispatch XML to import at startup (pull mode).")
def serve(config_path: str, dispatch_path: str | None) -> None:
    """Run the gateway, engine and reader links until interrupted."""
    try:
        config = service.load_config_file(config_path)
        dispatch_xml = Path(dispatch_path).read_bytes() \
            if dispatch_path else None
        if dispatch_xml is not None:
            erp_xml.parse_dispatch_xml(dispatch_xml)
        svc = service.Service(config, dispatch_xml)
    except (service.ConfigError, erp_xml.XmlSyntaxError,
            erp_xml.SchemaError, erp_xml.SemanticError, DispatchError,
            OSError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    async def serve_until_signalled() -> None:
        stop = asyncio.Event()
        loop = asyncio.get_running_loop()
        for signum in (signal.SIGINT, signal.SIGTERM):
            loop.add_signal_handler(signum, stop.set)
        await svc.run(stop)

    try:
        asyncio.run(serve_until_signalled())
    except service.BindError as exc:
        click.echo(f"bind error: {exc}", err=True)
        sys.exit(EXIT_BIND)
    except KeyboardInterrupt:
        pass
    sys.exit(0)


@main.group("scenario")
def scenario_group() -> None:
    """Scripted end-to-end runs against simulated readers."""


@scenario_group.command("run")
@click.argument("scenario_path", type=click.Path())
@click.option("--dispatch", "dispatch_path", required=True,
              type=click.Path(), help="Dispatch XML.")
@click.option("--report", "report_path", required=True,
              type=click.Path(), help="Where to write the JSON report.")
def scenario_run(scenario_path: str, dispatch_path: str,
                 report_path: str) -> None:
    """Run a scenario to completion and verify it against the script
    oracle; exit 0 only on a pass verdict."""
    from .runner import run_scenario
    try:
        scn = scenario.load_scenario_file(scenario_path)
        dispatch = erp_xml.parse_dispatch_xml(
            Path(dispatch_path).read_bytes())
    except (scenario.ScenarioError, erp_xml.XmlSyntaxError,
            erp_xml.SchemaError, erp_xml.SemanticError, DispatchError,
            OSError) as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    report = run_scenario(scn, dispatch)
    Path(report_path).write_text(json.dumps(report, indent=2,
                                            sort_keys=True) + "\n")
    click.echo(f"verdict: {report['verdict']} ({report['mode']}), "
               f"{report['counts']['transitions']} transitions, "
               f"{report['counts']['alerts']} alerts, "
               f"{report['counts']['finished_goods']} finished goods")
    if report["verdict"] != "pass":
        click.echo(f"first divergence: "
                   f"{json.dumps(report['first_divergence'], sort_keys=True)}",
                   err=True)
        sys.exit(EXIT_VERDICT_FAIL)
    sys.exit(0)


@main.command("order-status")
@click.argument("order_id")
@click.option("--api", "api_url", default="http://127.0.0.1:8080",
              show_default=True, help="Gateway base URL.")
def order_status(order_id: str, api_url: str) -> None:
    """Print one line per ticket of an order."""
    url = f"{api_url.rstrip('/')}/api/orders/{order_id}/status"
    try:
        response = httpx.get(url, timeout=5.0)
    except httpx.HTTPError as exc:
        click.echo(f"cannot reach {api_url}: {exc}", err=True)
        sys.exit(EXIT_UNREACHABLE)
    if response.status_code == 404:
        click.echo(f"unknown order {order_id}", err=True)
        sys.exit(EXIT_UNKNOWN_ORDER)
    response.raise_for_status()
    status = response.json()
    click.echo(f"{status['order']} ({status['type']}) product "
               f"{status['product']} qty {status['quantity']} via "
               f"{status['route']}")
    for ticket in status["tickets"]:
        total = len(ticket["steps"])
        seq = ticket["current_seq"]
        step = ticket["steps"][seq - 1] if seq else None
        where = f"{step['workCenter']} ({step['status']})" if step \
            else "not started"
        flags = ""
        if ticket["alerts"]:
            kinds = ",".join(sorted({a["kind"] for a in ticket["alerts"]}))
            flags = f"  [{kinds}]"
        click.echo(f"  {ticket['ticket']}: step {seq}/{total}  {where}  "
                   f"{ticket['state']}{flags}")
    sys.exit(0)


if __name__ == "__main__":
    main()
