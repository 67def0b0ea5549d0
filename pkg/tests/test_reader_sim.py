"""Reader session contract: handshake, lifecycle, reports, violations."""

import pytest

from sfc import llrp
from sfc.llrp import LlrpFramer, ReadEvent, decode_message, encode_message
from sfc.reader_sim import ReaderSession
from sfc.scenario import DataPointConfig

DP = DataPointConfig("DP-2", "WC-CUT", (12.47, 15.65),
                     listen_endpoint="127.0.0.1:0")


def drive(session: ReaderSession, msg) -> list[llrp.LlrpMessage]:
    out, _ = session.handle_bytes(encode_message(msg))
    framer = LlrpFramer()
    return framer.feed(out)


def full_handshake(session: ReaderSession) -> None:
    [r] = drive(session, llrp.add_rospec(1, 1))
    assert r.msg_type == llrp.MSG_ADD_ROSPEC_RESPONSE
    [r] = drive(session, llrp.rospec_lifecycle(llrp.MSG_ENABLE_ROSPEC, 2, 1))
    assert r.msg_type == llrp.MSG_ENABLE_ROSPEC_RESPONSE
    [r] = drive(session, llrp.rospec_lifecycle(llrp.MSG_START_ROSPEC, 3, 1))
    assert r.msg_type == llrp.MSG_START_ROSPEC_RESPONSE


class TestHandshake:
    def test_hello_is_connection_success_notification(self):
        session = ReaderSession(DP)
        msg, consumed = decode_message(session.hello(1_000))
        assert msg.msg_type == llrp.MSG_READER_EVENT_NOTIFICATION
        assert llrp.connection_status_of(msg) == 0

    def test_add_rospec_success(self):
        session = ReaderSession(DP)
        [response] = drive(session, llrp.add_rospec(7, 42))
        assert response.msg_type == llrp.MSG_ADD_ROSPEC_RESPONSE
        assert response.msg_id == 7
        assert llrp.status_code_of(response) == 0

    def test_start_before_add_is_error(self):
        session = ReaderSession(DP)
        out, close = session.handle_bytes(encode_message(
            llrp.rospec_lifecycle(llrp.MSG_START_ROSPEC, 1, 1)))
        [response] = LlrpFramer().feed(out)
        assert response.msg_type == llrp.MSG_ERROR_MESSAGE
        assert close is True
        assert session.closed

    def test_enable_before_add_is_error(self):
        session = ReaderSession(DP)
        out, close = session.handle_bytes(encode_message(
            llrp.rospec_lifecycle(llrp.MSG_ENABLE_ROSPEC, 1, 1)))
        [response] = LlrpFramer().feed(out)
        assert response.msg_type == llrp.MSG_ERROR_MESSAGE
        assert close

    def test_start_before_enable_is_error(self):
        session = ReaderSession(DP)
        drive(session, llrp.add_rospec(1, 1))
        out, close = session.handle_bytes(encode_message(
            llrp.rospec_lifecycle(llrp.MSG_START_ROSPEC, 2, 1)))
        [response] = LlrpFramer().feed(out)
        assert response.msg_type == llrp.MSG_ERROR_MESSAGE
        assert close

    def test_capabilities_and_config(self):
        session = ReaderSession(DP)
        [r] = drive(session, llrp.LlrpMessage(
            llrp.MSG_GET_READER_CAPABILITIES, 5))
        assert r.msg_type == llrp.MSG_GET_READER_CAPABILITIES_RESPONSE
        [r] = drive(session, llrp.LlrpMessage(llrp.MSG_SET_READER_CONFIG, 6))
        assert r.msg_type == llrp.MSG_SET_READER_CONFIG_RESPONSE


class TestLifecycle:
    def test_keepalive_answered(self):
        session = ReaderSession(DP)
        [response] = drive(session, llrp.keepalive(9))
        assert response.msg_type == llrp.MSG_KEEPALIVE_ACK
        assert response.msg_id == 9

    def test_close_connection_replies_and_closes(self):
        session = ReaderSession(DP)
        out, close = session.handle_bytes(encode_message(
            llrp.LlrpMessage(llrp.MSG_CLOSE_CONNECTION, 4)))
        [response] = LlrpFramer().feed(out)
        assert response.msg_type == llrp.MSG_CLOSE_CONNECTION_RESPONSE
        assert close

    def test_delete_rospec_stops_reporting(self):
        session = ReaderSession(DP)
        full_handshake(session)
        assert session.reporting
        drive(session, llrp.rospec_lifecycle(llrp.MSG_DELETE_ROSPEC, 9, 1))
        assert not session.reporting

    def test_unsupported_message_is_violation(self):
        session = ReaderSession(DP)
        out, close = session.handle_bytes(encode_message(
            llrp.LlrpMessage(llrp.MSG_RO_ACCESS_REPORT, 1)))
        [response] = LlrpFramer().feed(out)
        assert response.msg_type == llrp.MSG_ERROR_MESSAGE
        assert close

    def test_framing_error_is_violation(self):
        session = ReaderSession(DP)
        bad = bytearray(encode_message(llrp.keepalive(1)))
        bad[0] = 0x08  # version 2
        out, close = session.handle_bytes(bytes(bad))
        [response] = LlrpFramer().feed(out)
        assert response.msg_type == llrp.MSG_ERROR_MESSAGE
        assert close


class TestReports:
    def _reads(self, n=2):
        return [ReadEvent(bytes([i] * 12), 1, 1_000 + i, -60, 1, "DP-2")
                for i in range(n)]

    def test_no_report_before_start(self):
        session = ReaderSession(DP)
        assert session.cycle_report(self._reads()) == b""

    def test_report_after_start(self):
        session = ReaderSession(DP)
        full_handshake(session)
        payload = session.cycle_report(self._reads(3))
        msg, _ = decode_message(payload)
        assert msg.msg_type == llrp.MSG_RO_ACCESS_REPORT
        assert len(llrp.parse_tag_report(msg)) == 3

    def test_empty_cycle_emits_nothing(self):
        session = ReaderSession(DP)
        full_handshake(session)
        assert session.cycle_report([]) == b""

    def test_identical_cycles_have_distinct_msg_ids(self):
        session = ReaderSession(DP)
        full_handshake(session)
        first, _ = decode_message(session.cycle_report(self._reads()))
        second, _ = decode_message(session.cycle_report(self._reads()))
        assert first.msg_id != second.msg_id
