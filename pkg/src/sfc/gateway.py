"""HTTP visibility gateway: dispatch ingestion, order/buffer queries,
manual override, finished-goods export and a transition stream.

Every JSON response carries ``generated_at_us`` (the engine's event-time
watermark) so clients can discard stale snapshots. Mutations go through
the engine's serialized sequence; the gateway itself keeps no state.
The transition stream is line-delimited JSON, one WipTransition per
line, resumable via ``?since=<index>``.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from . import erp_xml
from .dispatch import DispatchError
from .engine import (
    EmptyReason,
    InFlightConflict,
    NotOnRoute,
    SfcEngine,
    UnknownDataPoint,
    UnknownOrder,
    UnknownTicket,
)

EVENT_POLL_S = 0.1


def _payload(engine: SfcEngine, body: dict) -> JSONResponse:
    body["generated_at_us"] = engine.watermark_us
    return JSONResponse(body)


def _error(status: int, exc: Exception) -> JSONResponse:
    return JSONResponse({"error": type(exc).__name__, "message": str(exc)},
                        status_code=status)


def create_app(engine: SfcEngine, *, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="sfc-gateway", docs_url=None, redoc_url=None)
    # station pages served elsewhere (dev server, other host) still work
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.post("/api/dispatch")
    async def import_dispatch(request: Request):
        body = await request.body()
        try:
            dispatch = erp_xml.parse_dispatch_xml(body)
            summary = engine.import_dispatch(dispatch)
        except (erp_xml.XmlSyntaxError, erp_xml.SchemaError,
                erp_xml.SemanticError, DispatchError) as exc:
            return _error(400, exc)
        except InFlightConflict as exc:
            return _error(409, exc)
        return _payload(engine, {"imported": {
            "orders": summary.orders, "tickets": summary.tickets,
            "routes": summary.routes}})

    @app.get("/api/dispatch")
    async def echo_dispatch():
        dispatch = engine.current_dispatch
        if dispatch is None:
            return _error(404, UnknownOrder("no dispatch imported"))
        return Response(erp_xml.serialize_dispatch_xml(dispatch),
                        media_type="application/xml")

    @app.get("/api/orders")
    async def orders():
        return _payload(engine, {"orders": engine.orders_summary()})

    @app.get("/api/orders/{order_id}/status")
    async def order_status(order_id: str):
        try:
            status = engine.order_status(order_id)
        except UnknownOrder as exc:
            return _error(404, exc)
        return _payload(engine, status)

    @app.get("/api/datapoints/{dp_id}/buffer")
    async def buffer(dp_id: str, now_us: int | None = Query(default=None)):
        at = engine.watermark_us if now_us is None else now_us
        try:
            rows = engine.buffer_contents(dp_id, at)
        except UnknownDataPoint as exc:
            return _error(404, exc)
        return _payload(engine, {
            "data_point": dp_id,
            "work_center": engine.data_points().get(dp_id),
            "as_of_us": at,
            "rows": rows,
        })

    @app.get("/api/alerts")
    async def alerts(since: int = Query(default=0)):
        current = engine.alerts[since:]
        return _payload(engine, {
            "alerts": [a.to_dict() for a in current],
            "next_cursor": since + len(current),
        })

    @app.post("/api/override")
    async def override(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            return _error(400, exc)
        try:
            transition = engine.manual_override(
                str(body.get("ticket", "")),
                str(body.get("workCenter", "")),
                str(body.get("operator", "")),
                str(body.get("reason", "")),
                engine.watermark_us,
            )
        except UnknownTicket as exc:
            return _error(404, exc)
        except (NotOnRoute, EmptyReason) as exc:
            return _error(422, exc)
        return _payload(engine, {"transition": transition.to_dict()})

    @app.get("/api/finished-goods/export")
    async def export():
        return Response(
            erp_xml.export_finished_goods_xml(engine.finished,
                                              engine.plant_id),
            media_type="application/xml")

    @app.get("/api/events")
    async def events(since: int = Query(default=0),
                     follow: int = Query(default=1)):
        async def stream(cursor: int):
            while True:
                history = engine.history
                while cursor < len(history):
                    yield json.dumps(history[cursor].to_dict(),
                                     sort_keys=True) + "\n"
                    cursor += 1
                if not follow:
                    return
                await asyncio.sleep(EVENT_POLL_S)

        return StreamingResponse(stream(since),
                                 media_type="application/x-ndjson")

    @app.get("/api/datapoints")
    async def datapoints():
        return _payload(engine, {"data_points": [
            {"data_point": dp, "work_center": wc}
            for dp, wc in sorted(engine.data_points().items())]})

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
