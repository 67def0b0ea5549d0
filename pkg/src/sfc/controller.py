"""LLRP controller: connects to readers, installs the ROSpec and feeds
tag reports to a delivery callback.

One ControllerLink owns one reader connection. It reconnects with capped
exponential backoff, so a reader that is down at service start (or
drops mid-run) is retried without taking the service down.
"""

from __future__ import annotations

import asyncio
import itertools
import logging

from . import llrp
from .llrp import LlrpFramer, ReadEvent

log = logging.getLogger(__name__)

HANDSHAKE_TIMEOUT_S = 5.0


class LinkProtocolError(Exception):
    pass


class ControllerLink:
    def __init__(self, host: str, port: int, data_point_id: str,
                 deliver, *, rospec_id: int = 1,
                 backoff_max_s: float = 2.0) -> None:
        self.host = host
        self.port = port
        self.data_point_id = data_point_id
        self.deliver = deliver  # callable(data_point_id, list[ReadEvent])
        self.rospec_id = rospec_id
        self.backoff_max_s = backoff_max_s
        self.started = asyncio.Event()
        self._stop = asyncio.Event()
        self._writer: asyncio.StreamWriter | None = None
        self._msg_ids = itertools.count(1)

    async def run(self) -> None:
        backoff = 0.05
        while not self._stop.is_set():
            try:
                reader, writer = await asyncio.open_connection(
                    self.host, self.port)
            except OSError as exc:
                log.info("%s: connect failed (%s), retrying",
                         self.data_point_id, exc)
                try:
                    await asyncio.wait_for(self._stop.wait(), backoff)
                    return
                except asyncio.TimeoutError:
                    backoff = min(backoff * 2, self.backoff_max_s)
                    continue
            backoff = 0.05
            self._writer = writer
            try:
                await self._session(reader, writer)
            except (LinkProtocolError, llrp.LlrpError, ConnectionError,
                    asyncio.TimeoutError) as exc:
                log.info("%s: session ended: %s", self.data_point_id, exc)
            finally:
                self.started.clear()
                self._writer = None
                writer.close()
                try:
                    await writer.wait_closed()
                except (ConnectionError, OSError):
                    pass

    async def _session(self, reader: asyncio.StreamReader,
                       writer: asyncio.StreamWriter) -> None:
        framer = LlrpFramer()
        inbox: asyncio.Queue[llrp.LlrpMessage] = asyncio.Queue()

        async def next_message() -> llrp.LlrpMessage:
            while inbox.empty():
                chunk = await reader.read(4096)
                if not chunk:
                    raise LinkProtocolError("connection closed by reader")
                for msg in framer.feed(chunk):
                    inbox.put_nowait(msg)
            return inbox.get_nowait()

        async def send(msg: llrp.LlrpMessage) -> None:
            writer.write(llrp.encode_message(msg))
            await writer.drain()

        async def expect(msg_type: int) -> llrp.LlrpMessage:
            msg = await asyncio.wait_for(next_message(),
                                         HANDSHAKE_TIMEOUT_S)
            if msg.msg_type != msg_type:
                raise LinkProtocolError(
                    f"expected message type {msg_type}, got {msg.msg_type}")
            return msg

        banner = await expect(llrp.MSG_READER_EVENT_NOTIFICATION)
        if llrp.connection_status_of(banner) != 0:
            raise LinkProtocolError("reader refused the connection")

        await send(llrp.add_rospec(next(self._msg_ids), self.rospec_id))
        response = await expect(llrp.MSG_ADD_ROSPEC_RESPONSE)
        if llrp.status_code_of(response) != 0:
            raise LinkProtocolError("ADD_ROSPEC rejected")
        await send(llrp.rospec_lifecycle(llrp.MSG_ENABLE_ROSPEC,
                                         next(self._msg_ids), self.rospec_id))
        response = await expect(llrp.MSG_ENABLE_ROSPEC_RESPONSE)
        if llrp.status_code_of(response) != 0:
            raise LinkProtocolError("ENABLE_ROSPEC rejected")
        await send(llrp.rospec_lifecycle(llrp.MSG_START_ROSPEC,
                                         next(self._msg_ids), self.rospec_id))
        response = await expect(llrp.MSG_START_ROSPEC_RESPONSE)
        if llrp.status_code_of(response) != 0:
            raise LinkProtocolError("START_ROSPEC rejected")

        self.started.set()
        log.info("%s: reader started", self.data_point_id)
        while not self._stop.is_set():
            msg = await next_message()
            if msg.msg_type == llrp.MSG_RO_ACCESS_REPORT:
                reads = llrp.parse_tag_report(msg)
                for ev in reads:
                    ev.data_point_id = self.data_point_id
                self.deliver(self.data_point_id, reads)
            elif msg.msg_type == llrp.MSG_KEEPALIVE_ACK:
                pass
            elif msg.msg_type == llrp.MSG_ERROR_MESSAGE:
                raise LinkProtocolError("reader sent ERROR_MESSAGE")
            elif msg.msg_type == llrp.MSG_CLOSE_CONNECTION_RESPONSE:
                return
            else:
                log.info("%s: ignoring message type %s",
                         self.data_point_id, msg.msg_type)

    async def send_keepalive(self) -> None:
        if self._writer is not None and self.started.is_set():
            self._writer.write(llrp.encode_message(
                llrp.keepalive(next(self._msg_ids))))
            await self._writer.drain()

    async def close(self) -> None:
        self._stop.set()
        if self._writer is not None and not self._writer.is_closing():
            try:
                self._writer.write(llrp.encode_message(llrp.LlrpMessage(
                    llrp.MSG_CLOSE_CONNECTION, next(self._msg_ids))))
                await self._writer.drain()
            except (ConnectionError, OSError):
                pass
