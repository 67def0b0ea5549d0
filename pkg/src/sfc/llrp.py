"""LLRP v1.0.1 subset codec: messages, TLV/TV parameters and a stream framer.

Wire layout (all big-endian):

    message header   3 bits reserved | 3 bits version (=1) | 10 bits type,
                     u32 total length (whole message), u32 message id
    TLV parameter    6 bits reserved | 10 bits type, u16 length incl. header
    TV parameter     1 high bit set | 7 bits type, fixed-size value

Only the message types needed to drive data-point readers are supported:
the reader-management handshake, the ROSpec lifecycle, tag reports,
keepalive and close. Unknown TLV parameters decode to opaque bodies and
re-encode octet-identically; unknown TV types are unrecoverable because
their length is implicit.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

# Message types (LLRP v1.0.1)
MSG_GET_READER_CAPABILITIES = 1
MSG_GET_READER_CAPABILITIES_RESPONSE = 11
MSG_SET_READER_CONFIG = 3
MSG_SET_READER_CONFIG_RESPONSE = 13
MSG_CLOSE_CONNECTION = 14
MSG_CLOSE_CONNECTION_RESPONSE = 4
MSG_ADD_ROSPEC = 20
MSG_DELETE_ROSPEC = 21
MSG_START_ROSPEC = 22
MSG_ENABLE_ROSPEC = 24
MSG_ADD_ROSPEC_RESPONSE = 30
MSG_DELETE_ROSPEC_RESPONSE = 31
MSG_START_ROSPEC_RESPONSE = 32
MSG_ENABLE_ROSPEC_RESPONSE = 34
MSG_RO_ACCESS_REPORT = 61
MSG_KEEPALIVE = 62
MSG_KEEPALIVE_ACK = 72
MSG_READER_EVENT_NOTIFICATION = 63
MSG_ERROR_MESSAGE = 100

MESSAGE_TYPES = frozenset({
    MSG_GET_READER_CAPABILITIES, MSG_GET_READER_CAPABILITIES_RESPONSE,
    MSG_SET_READER_CONFIG, MSG_SET_READER_CONFIG_RESPONSE,
    MSG_CLOSE_CONNECTION, MSG_CLOSE_CONNECTION_RESPONSE,
    MSG_ADD_ROSPEC, MSG_DELETE_ROSPEC, MSG_START_ROSPEC, MSG_ENABLE_ROSPEC,
    MSG_ADD_ROSPEC_RESPONSE, MSG_DELETE_ROSPEC_RESPONSE,
    MSG_START_ROSPEC_RESPONSE, MSG_ENABLE_ROSPEC_RESPONSE,
    MSG_RO_ACCESS_REPORT, MSG_KEEPALIVE, MSG_KEEPALIVE_ACK,
    MSG_READER_EVENT_NOTIFICATION, MSG_ERROR_MESSAGE,
})

RESPONSE_FOR = {
    MSG_GET_READER_CAPABILITIES: MSG_GET_READER_CAPABILITIES_RESPONSE,
    MSG_SET_READER_CONFIG: MSG_SET_READER_CONFIG_RESPONSE,
    MSG_CLOSE_CONNECTION: MSG_CLOSE_CONNECTION_RESPONSE,
    MSG_ADD_ROSPEC: MSG_ADD_ROSPEC_RESPONSE,
    MSG_DELETE_ROSPEC: MSG_DELETE_ROSPEC_RESPONSE,
    MSG_START_ROSPEC: MSG_START_ROSPEC_RESPONSE,
    MSG_ENABLE_ROSPEC: MSG_ENABLE_ROSPEC_RESPONSE,
}

# TLV parameter types
P_UTC_TIMESTAMP = 128
P_ROSPEC = 177
P_TAG_REPORT_DATA = 240
P_EPC_DATA = 241
P_READER_EVENT_NOTIFICATION_DATA = 246
P_CONNECTION_ATTEMPT_EVENT = 256
P_LLRP_STATUS = 287

# TV parameter types and their value sizes in octets
TV_ANTENNA_ID = 1
TV_FIRST_SEEN_UTC = 2
TV_PEAK_RSSI = 6
TV_TAG_SEEN_COUNT = 8
TV_ROSPEC_ID = 9
TV_EPC_96 = 13

TV_SIZES = {
    TV_ANTENNA_ID: 2,
    TV_FIRST_SEEN_UTC: 8,
    TV_PEAK_RSSI: 1,
    TV_TAG_SEEN_COUNT: 2,
    TV_ROSPEC_ID: 4,
    TV_EPC_96: 12,
}

STATUS_SUCCESS = 0

_MSG_HEADER = struct.Struct(">HII")
MSG_HEADER_LEN = _MSG_HEADER.size
_TLV_HEADER = struct.Struct(">HH")


class LlrpError(Exception):
    """Base for codec and framing failures."""


class Truncated(LlrpError):
    pass


class BadVersion(LlrpError):
    pass


class LengthMismatch(LlrpError):
    pass


class UnknownTvType(LlrpError):
    pass


class UnencodableParameter(LlrpError):
    pass


class StreamPoisoned(LlrpError):
    pass


class NotATagReport(LlrpError):
    pass


class MissingEpc(LlrpError):
    pass


@dataclass
class LlrpParameter:
    """One TLV or TV parameter.

    ``body`` is a dict for known TLV types, raw bytes for opaque TLV
    types, the plain value for TV types, and None for pure containers.
    """
    encoding: str  # "tlv" | "tv"
    param_type: int
    body: object = None
    children: list["LlrpParameter"] = field(default_factory=list)


@dataclass
class LlrpMessage:
    msg_type: int
    msg_id: int
    parameters: list[LlrpParameter] = field(default_factory=list)
    version: int = 1

    @property
    def known_type(self) -> bool:
        return self.msg_type in MESSAGE_TYPES


@dataclass
class ReadEvent:
    """One tag observation reported by a reader."""
    epc: bytes
    antenna_id: int = 1
    first_seen_utc_us: int = 0
    peak_rssi: int = -128
    seen_count: int = 1
    data_point_id: str | None = None  # attached by the session owner


def tv(param_type: int, value) -> LlrpParameter:
    return LlrpParameter("tv", param_type, value)


def tlv(param_type: int, body=None, children=()) -> LlrpParameter:
    return LlrpParameter("tlv", param_type, body, list(children))


# --- parameter encoding ---------------------------------------------------

def _encode_tv(param: LlrpParameter) -> bytes:
    size = TV_SIZES.get(param.param_type)
    if size is None:
        raise UnencodableParameter(f"TV type {param.param_type} not in subset")
    head = bytes([0x80 | param.param_type])
    value = param.body
    try:
        if param.param_type == TV_EPC_96:
            if len(value) != 12:
                raise UnencodableParameter("EPC-96 value must be 12 octets")
            return head + bytes(value)
        if param.param_type == TV_PEAK_RSSI:
            return head + struct.pack(">b", value)
        if param.param_type == TV_FIRST_SEEN_UTC:
            return head + struct.pack(">Q", value)
        if param.param_type == TV_ROSPEC_ID:
            return head + struct.pack(">I", value)
        return head + struct.pack(">H", value)
    except (struct.error, TypeError) as exc:
        raise UnencodableParameter(str(exc)) from exc


def _encode_tlv_body(param: LlrpParameter) -> bytes:
    ptype, body = param.param_type, param.body
    try:
        if ptype == P_EPC_DATA:
            epc = bytes(body["epc"])
            bits = body.get("epc_bits", len(epc) * 8)
            if (bits + 7) // 8 != len(epc):
                raise UnencodableParameter("EPC bit length disagrees with octets")
            return struct.pack(">H", bits) + epc
        if ptype == P_UTC_TIMESTAMP:
            return struct.pack(">Q", body["microseconds"])
        if ptype == P_CONNECTION_ATTEMPT_EVENT:
            return struct.pack(">H", body["status"])
        if ptype == P_LLRP_STATUS:
            desc = body.get("description", "").encode("utf-8")
            if len(desc) > 0xFFFF:
                raise UnencodableParameter("status description too long")
            return struct.pack(">HH", body["code"], len(desc)) + desc
        if ptype == P_ROSPEC:
            return struct.pack(">IBB", body["rospec_id"], body["priority"],
                               body["current_state"])
        if ptype in (P_TAG_REPORT_DATA, P_READER_EVENT_NOTIFICATION_DATA):
            return b""
        # opaque
        return bytes(body or b"")
    except (KeyError, struct.error, TypeError) as exc:
        raise UnencodableParameter(f"TLV {ptype}: {exc}") from exc


def encode_parameter(param: LlrpParameter) -> bytes:
    if param.encoding == "tv":
        return _encode_tv(param)
    body = _encode_tlv_body(param)
    kids = b"".join(encode_parameter(c) for c in param.children)
    length = _TLV_HEADER.size + len(body) + len(kids)
    if length > 0xFFFF:
        raise UnencodableParameter("TLV parameter exceeds 65535 octets")
    return _TLV_HEADER.pack(param.param_type & 0x3FF, length) + body + kids


# --- parameter decoding ---------------------------------------------------

# Known TLV types whose trailing bytes are nested parameters.
_CONTAINER_TYPES = {P_TAG_REPORT_DATA, P_READER_EVENT_NOTIFICATION_DATA,
                    P_ROSPEC, P_LLRP_STATUS}


def _decode_tlv_body(ptype: int, body: bytes) -> tuple[object, bytes]:
    """Split a TLV body into (decoded fixed fields, remaining child bytes)."""
    try:
        if ptype == P_EPC_DATA:
            (bits,) = struct.unpack_from(">H", body)
            octets = (bits + 7) // 8
            if len(body) < 2 + octets:
                raise LengthMismatch("EPCData shorter than its bit length")
            return {"epc_bits": bits, "epc": body[2:2 + octets]}, b""
        if ptype == P_UTC_TIMESTAMP:
            (us,) = struct.unpack(">Q", body)
            return {"microseconds": us}, b""
        if ptype == P_CONNECTION_ATTEMPT_EVENT:
            (status,) = struct.unpack(">H", body)
            return {"status": status}, b""
        if ptype == P_LLRP_STATUS:
            code, desc_len = struct.unpack_from(">HH", body)
            desc = body[4:4 + desc_len].decode("utf-8")
            return {"code": code, "description": desc}, body[4 + desc_len:]
        if ptype == P_ROSPEC:
            rid, prio, state = struct.unpack_from(">IBB", body)
            return ({"rospec_id": rid, "priority": prio,
                     "current_state": state}, body[6:])
        if ptype in (P_TAG_REPORT_DATA, P_READER_EVENT_NOTIFICATION_DATA):
            return None, body
    except struct.error as exc:
        raise LengthMismatch(f"TLV {ptype} body too short: {exc}") from exc
    return body, b""  # opaque: keep raw bytes, no children


def decode_parameter(buf: bytes, offset: int) -> tuple[LlrpParameter, int]:
    """Decode one parameter at ``offset``; returns (parameter, consumed)."""
    if offset >= len(buf):
        raise Truncated("no parameter bytes left")
    first = buf[offset]
    if first & 0x80:
        ptype = first & 0x7F
        size = TV_SIZES.get(ptype)
        if size is None:
            raise UnknownTvType(f"TV type {ptype} not in subset")
        end = offset + 1 + size
        if end > len(buf):
            raise LengthMismatch(f"TV type {ptype} overruns its container")
        raw = buf[offset + 1:end]
        if ptype == TV_EPC_96:
            value: object = raw
        elif ptype == TV_PEAK_RSSI:
            value = struct.unpack(">b", raw)[0]
        elif ptype == TV_FIRST_SEEN_UTC:
            value = struct.unpack(">Q", raw)[0]
        elif ptype == TV_ROSPEC_ID:
            value = struct.unpack(">I", raw)[0]
        else:
            value = struct.unpack(">H", raw)[0]
        return tv(ptype, value), 1 + size
    if offset + _TLV_HEADER.size > len(buf):
        raise Truncated("TLV header overruns its container")
    head, length = _TLV_HEADER.unpack_from(buf, offset)
    ptype = head & 0x3FF
    if length < _TLV_HEADER.size or offset + length > len(buf):
        raise LengthMismatch(f"TLV {ptype} length {length} overruns container")
    body = buf[offset + _TLV_HEADER.size:offset + length]
    decoded, child_bytes = _decode_tlv_body(ptype, body)
    children = _decode_parameters(child_bytes)
    return tlv(ptype, decoded, children), length


def _decode_parameters(buf: bytes) -> list[LlrpParameter]:
    params = []
    offset = 0
    while offset < len(buf):
        param, consumed = decode_parameter(buf, offset)
        params.append(param)
        offset += consumed
    return params


# --- message codec --------------------------------------------------------

def encode_message(msg: LlrpMessage) -> bytes:
    """Encode a message; the length field always equals the output length."""
    payload = b"".join(encode_parameter(p) for p in msg.parameters)
    head = ((msg.version & 0x7) << 10) | (msg.msg_type & 0x3FF)
    return _MSG_HEADER.pack(head, MSG_HEADER_LEN + len(payload), msg.msg_id) \
        + payload


def decode_message(buf: bytes) -> tuple[LlrpMessage, int]:
    """Decode one complete message from the front of ``buf``."""
    if len(buf) < MSG_HEADER_LEN:
        raise Truncated(f"need {MSG_HEADER_LEN} octets, have {len(buf)}")
    head, length, msg_id = _MSG_HEADER.unpack_from(buf)
    version = (head >> 10) & 0x7
    if version != 1:
        raise BadVersion(f"version field is {version}")
    if length < MSG_HEADER_LEN:
        raise LengthMismatch(f"declared length {length} below header size")
    if len(buf) < length:
        raise Truncated(f"declared length {length}, have {len(buf)}")
    params = _decode_parameters(buf[MSG_HEADER_LEN:length])
    return LlrpMessage(head & 0x3FF, msg_id, params, version), length


def validate_wire(buf: bytes) -> int:
    """Walk a byte string of messages, checking every header and nested
    TLV length for consistency. Returns the message count."""
    count = 0
    offset = 0
    while offset < len(buf):
        msg, consumed = decode_message(buf[offset:])
        if encode_message(msg) != buf[offset:offset + consumed]:
            raise LengthMismatch("decode/encode disagreement in validator")
        offset += consumed
        count += 1
    return count


class LlrpFramer:
    """Reassembles messages from an arbitrarily chunked byte stream.

    A framing error poisons the framer: resynchronizing inside LLRP is
    unsafe, so the owning session must drop the connection.
    """

    def __init__(self) -> None:
        self._buf = bytearray()
        self._poison: LlrpError | None = None

    @property
    def poisoned(self) -> bool:
        return self._poison is not None

    def feed(self, chunk: bytes) -> list[LlrpMessage]:
        if self._poison is not None:
            raise StreamPoisoned(str(self._poison))
        self._buf.extend(chunk)
        out: list[LlrpMessage] = []
        while len(self._buf) >= MSG_HEADER_LEN:
            head, length, _ = _MSG_HEADER.unpack_from(self._buf)
            version = (head >> 10) & 0x7
            try:
                if version != 1:
                    raise BadVersion(f"version field is {version}")
                if length < MSG_HEADER_LEN:
                    raise LengthMismatch(
                        f"declared length {length} below header size")
                if len(self._buf) < length:
                    break
                msg, consumed = decode_message(bytes(self._buf[:length]))
            except LlrpError as exc:
                self._poison = exc
                raise
            del self._buf[:consumed]
            out.append(msg)
        return out


def feed_framer(state: LlrpFramer, chunk: bytes) -> tuple[LlrpFramer, list[LlrpMessage]]:
    """Functional wrapper over LlrpFramer.feed for one-shot callers."""
    return state, state.feed(chunk)


# --- message builders -----------------------------------------------------

def keepalive(msg_id: int) -> LlrpMessage:
    return LlrpMessage(MSG_KEEPALIVE, msg_id)


def keepalive_ack(msg_id: int) -> LlrpMessage:
    return LlrpMessage(MSG_KEEPALIVE_ACK, msg_id)


def llrp_status(code: int = STATUS_SUCCESS, description: str = "") -> LlrpParameter:
    return tlv(P_LLRP_STATUS, {"code": code, "description": description})


def status_response(msg_type: int, msg_id: int, code: int = STATUS_SUCCESS,
                    description: str = "") -> LlrpMessage:
    return LlrpMessage(msg_type, msg_id, [llrp_status(code, description)])


def error_message(msg_id: int, code: int, description: str) -> LlrpMessage:
    return LlrpMessage(MSG_ERROR_MESSAGE, msg_id,
                       [llrp_status(code, description)])


def reader_event_notification(msg_id: int, timestamp_us: int,
                              status: int = 0) -> LlrpMessage:
    data = tlv(P_READER_EVENT_NOTIFICATION_DATA, None, [
        tlv(P_UTC_TIMESTAMP, {"microseconds": timestamp_us}),
        tlv(P_CONNECTION_ATTEMPT_EVENT, {"status": status}),
    ])
    return LlrpMessage(MSG_READER_EVENT_NOTIFICATION, msg_id, [data])


def add_rospec(msg_id: int, rospec_id: int) -> LlrpMessage:
    spec = tlv(P_ROSPEC, {"rospec_id": rospec_id, "priority": 0,
                          "current_state": 0})
    return LlrpMessage(MSG_ADD_ROSPEC, msg_id, [spec])


def rospec_lifecycle(msg_type: int, msg_id: int, rospec_id: int) -> LlrpMessage:
    """ENABLE/START/DELETE_ROSPEC; the target id rides as a TV parameter."""
    return LlrpMessage(msg_type, msg_id, [tv(TV_ROSPEC_ID, rospec_id)])


def rospec_id_of(msg: LlrpMessage) -> int | None:
    for param in msg.parameters:
        if param.encoding == "tv" and param.param_type == TV_ROSPEC_ID:
            return param.body
        if param.encoding == "tlv" and param.param_type == P_ROSPEC:
            return param.body["rospec_id"]
    return None


def connection_status_of(msg: LlrpMessage) -> int | None:
    for param in msg.parameters:
        if param.param_type == P_READER_EVENT_NOTIFICATION_DATA:
            for child in param.children:
                if child.param_type == P_CONNECTION_ATTEMPT_EVENT:
                    return child.body["status"]
    return None


def status_code_of(msg: LlrpMessage) -> int | None:
    for param in msg.parameters:
        if param.encoding == "tlv" and param.param_type == P_LLRP_STATUS:
            return param.body["code"]
    return None


# --- tag reports ----------------------------------------------------------

def build_tag_report(reads: list[ReadEvent], msg_id: int) -> LlrpMessage:
    """RO_ACCESS_REPORT with one TagReportData per read.

    Children in fixed order: EPC, AntennaID, PeakRSSI,
    FirstSeenTimestampUTC, TagSeenCount. A 12-octet EPC uses the compact
    EPC-96 TV form; any other length goes through EPCData.
    """
    if not reads:
        raise ValueError("tag report needs at least one read")
    params = []
    for read in reads:
        if len(read.epc) == 12:
            epc_param = tv(TV_EPC_96, bytes(read.epc))
        else:
            epc_param = tlv(P_EPC_DATA, {"epc": bytes(read.epc),
                                         "epc_bits": len(read.epc) * 8})
        params.append(tlv(P_TAG_REPORT_DATA, None, [
            epc_param,
            tv(TV_ANTENNA_ID, read.antenna_id),
            tv(TV_PEAK_RSSI, read.peak_rssi),
            tv(TV_FIRST_SEEN_UTC, read.first_seen_utc_us),
            tv(TV_TAG_SEEN_COUNT, read.seen_count),
        ]))
    return LlrpMessage(MSG_RO_ACCESS_REPORT, msg_id, params)


def parse_tag_report(msg: LlrpMessage) -> list[ReadEvent]:
    """Inverse of build_tag_report; tolerant of extra unknown children.

    Missing optional fields default to rssi=-128, timestamp=0, count=1.
    """
    if msg.msg_type != MSG_RO_ACCESS_REPORT:
        raise NotATagReport(f"message type {msg.msg_type}")
    reads = []
    for param in msg.parameters:
        if param.encoding != "tlv" or param.param_type != P_TAG_REPORT_DATA:
            continue
        epc = None
        antenna, rssi, first_seen, count = 1, -128, 0, 1
        for child in param.children:
            if child.encoding == "tv":
                if child.param_type == TV_EPC_96:
                    epc = child.body
                elif child.param_type == TV_ANTENNA_ID:
                    antenna = child.body
                elif child.param_type == TV_PEAK_RSSI:
                    rssi = child.body
                elif child.param_type == TV_FIRST_SEEN_UTC:
                    first_seen = child.body
                elif child.param_type == TV_TAG_SEEN_COUNT:
                    count = child.body
            elif child.param_type == P_EPC_DATA:
                epc = child.body["epc"]
        if epc is None:
            raise MissingEpc("TagReportData without EPC-96 or EPCData")
        reads.append(ReadEvent(bytes(epc), antenna, first_seen, rssi, count))
    return reads
