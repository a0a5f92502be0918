import asyncio

import pytest
from hypothesis import given, strategies as st

from anoncomm.protocol import SchemeParams
from anoncomm.sim import (
    AuditLogError,
    MsgType,
    ProtocolError,
    RoundLog,
    ScriptedSource,
    WireMessage,
    chi_square_screen,
    read_jsonl,
    receiver_view_dump,
    run_simulation,
    write_jsonl,
)
from anoncomm.sim import wire

K3 = SchemeParams(3, 2, 1)


# -- wire codec ------------------------------------------------------------------------------


def test_frame_bytes_are_exact():
    frame = WireMessage(MsgType.SIGNAL, 7, 2, 2, (1,)).encode()
    assert frame == bytes.fromhex("00000006" "03" "00000007" "0002" "0002" "0001" "0001")


def test_empty_payload_frame():
    frame = WireMessage(MsgType.SHUTDOWN, 0, 0, 3).encode()
    assert frame == bytes.fromhex("00000004" "06" "00000000" "0000" "0003" "0000")


@given(
    st.sampled_from(list(MsgType)),
    st.integers(0, 2**32 - 1),
    st.integers(0, 2**16 - 1),
    st.sampled_from([2, 3, 5, 7, 11, 13]).flatmap(
        lambda p: st.tuples(st.just(p), st.lists(st.integers(0, p - 1), max_size=20))
    ),
)
def test_wire_round_trip(mtype, round_id, sender, payload):
    p, symbols = payload
    msg = WireMessage(mtype, round_id, sender, p, tuple(symbols))
    frame = msg.encode()
    assert wire.decode(frame) == msg
    assert len(frame) == wire.HEADER_LEN + 4 + 2 * len(symbols)


def test_split_frames_keeps_leftover():
    a = WireMessage(MsgType.ROUND_BEGIN, 1, 0, 2).encode()
    b = WireMessage(MsgType.DEAL_SHARE, 1, 0, 2, (1,)).encode()
    msgs, rest = wire.split_frames(a + b + b[:5])
    assert [m.msg_type for m in msgs] == [MsgType.ROUND_BEGIN, MsgType.DEAL_SHARE]
    assert rest == b[:5]


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda f: f[:4] + b"\x09" + f[5:], "msg_type"),
        (lambda f: f[:11] + b"\x00\x04" + f[13:], "p"),
        (lambda f: f[:-2] + b"\x00\x05", "symbols[0]"),
        (lambda f: f[:13] + b"\x00\x02" + f[15:], "length"),
        (lambda f: f[:-1], "frame"),
        (lambda f: f[:6], "frame"),
    ],
)
def test_malformed_frames_name_the_field(mutate, field):
    frame = WireMessage(MsgType.SIGNAL, 1, 1, 2, (1,)).encode()
    with pytest.raises(ProtocolError) as exc:
        wire.decode(mutate(frame))
    assert exc.value.field == field


def test_constructor_guards():
    with pytest.raises(ProtocolError) as exc:
        WireMessage(MsgType.SIGNAL, 2**32, 1, 2)
    assert exc.value.field == "round_id"
    with pytest.raises(ProtocolError) as exc:
        WireMessage(MsgType.SIGNAL, 1, 2**16, 2)
    assert exc.value.field == "sender_id"


def test_read_frame_from_stream():
    async def go():
        reader = asyncio.StreamReader()
        f = WireMessage(MsgType.DECODED, 3, 4, 2, (1,)).encode()
        reader.feed_data(f + f[:3])
        reader.feed_eof()
        assert await wire.read_frame(reader) == f
        with pytest.raises(ProtocolError):
            await wire.read_frame(reader)

    asyncio.run(go())


# -- simulation --------------------------------------------------------------------------------


def test_hundred_rounds_all_correct():
    logs = run_simulation(K3, 100, seed=7, audit=True)
    assert len(logs) == 100
    assert logs.correct == 100 and logs.failed == 0
    assert logs.traffic.violations == []
    assert all(1 <= log.theta <= 3 for log in logs)


def test_hand_trace_round():
    source = ScriptedSource([1], [(1, 0)], [[(1,), (0,), (1,)]])
    (log,) = run_simulation(K3, 1, source=source, audit=True)
    assert log.status == "ok"
    assert log.transcript == [[0], [0], [1]]
    assert log.decoded == [1]
    assert log.theta == 1 and log.correct is True
    assert set(log.timestamps) == {"dealer", "transmitter_1", "transmitter_2", "transmitter_3", "receiver"}


def test_theta_hidden_without_audit():
    logs = run_simulation(K3, 5, seed=3)
    assert all(log.theta is None for log in logs)
    assert logs.correct == 5


@pytest.mark.parametrize("transport", ["in-process", "stream"])
def test_shutdown_mid_round(transport):
    logs = run_simulation(K3, 5, transport, seed=1, shutdown_round=3)
    assert [log.status for log in logs] == ["ok", "ok", "failed"]
    bad = logs[2]
    assert bad.decoded is None and bad.transcript is None
    assert bad.cause


@pytest.mark.parametrize("transport", ["in-process", "stream"])
def test_tampered_frame_fails_round_with_field(transport):
    def tamper(src, dst, frame):
        if frame[4] == MsgType.SIGNAL and src == 2:
            return frame[:4] + b"\x09" + frame[5:]
        return frame

    logs = run_simulation(K3, 2, transport, seed=1, tamper=tamper)
    assert logs[0].status == "failed"
    assert "msg_type" in logs[0].cause
    assert any(v.get("field") == "msg_type" for v in logs.traffic.violations)


def test_transports_produce_identical_logs():
    a = run_simulation(K3, 200, "in-process", seed=99, audit=True)
    b = run_simulation(K3, 200, "stream", seed=99, audit=True)
    assert a.to_jsonl() == b.to_jsonl()
    assert a.traffic.to_dict() == b.traffic.to_dict()


def test_other_parameters_run():
    logs = run_simulation(SchemeParams(4, 5, 2), 30, seed=4, audit=True)
    assert logs.correct == 30 and not logs.traffic.violations


def test_rounds_must_be_positive():
    with pytest.raises(ValueError):
        run_simulation(K3, 0, seed=1)


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("ANONCOMM_SEED", "1234")
    a = run_simulation(K3, 10)
    monkeypatch.delenv("ANONCOMM_SEED")
    b = run_simulation(K3, 10, seed=1234)
    assert a.seed == 1234
    assert a.to_jsonl() == b.to_jsonl()


def test_jsonl_round_trip(tmp_path):
    logs = run_simulation(K3, 20, seed=5, audit=True)
    path = tmp_path / "rounds.jsonl"
    write_jsonl(logs, path)
    back = read_jsonl(path)
    assert back == list(logs)
    assert path.read_text() == logs.to_jsonl()


# -- receiver view -----------------------------------------------------------------------------


def test_receiver_view_of_nothing():
    assert receiver_view_dump([]) == []


def test_receiver_view_refuses_audit_logs():
    logs = run_simulation(K3, 3, seed=2, audit=True)
    with pytest.raises(AuditLogError):
        receiver_view_dump(logs)


def test_receiver_view_omits_failed_rounds():
    logs = run_simulation(K3, 4, seed=2, shutdown_round=2)
    views = receiver_view_dump(logs)
    assert [v.round_id for v in views] == [1]


def test_chi_square_screen_on_thousand_rounds():
    views = receiver_view_dump(run_simulation(K3, 1000, seed=2026))
    res = chi_square_screen(views, K3)
    assert res.samples == 1000 and res.dof == 7
    assert res.threshold == pytest.approx(24.3219, abs=1e-3)
    assert res.passed, res


def test_chi_square_screen_flags_constant_transcripts():
    views = receiver_view_dump(
        [RoundLog(r, "ok", [[0], [0], [0]], [0], {}) for r in range(1, 201)]
    )
    assert not chi_square_screen(views, K3).passed
