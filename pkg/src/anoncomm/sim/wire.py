"""Binary framing for harness traffic. Everything is big-endian.

    +--------+------+----------+-----------+--------------------------------+
    | u32    | u8   | u32      | u16       | payload                        |
    | length | type | round_id | sender_id | u16 p, u16 n, n x u16 residue  |
    +--------+------+----------+-----------+--------------------------------+

``length`` counts payload bytes only, so it always equals 4 + 2n.
"""

from __future__ import annotations

import asyncio
import struct
from dataclasses import dataclass
from enum import IntEnum

from ..fp import SUPPORTED_PRIMES

HEADER = struct.Struct(">IBIH")
PAYLOAD_HEAD = struct.Struct(">HH")
HEADER_LEN = HEADER.size  # 11
MAX_SYMBOLS = 4096
MAX_PAYLOAD = PAYLOAD_HEAD.size + 2 * MAX_SYMBOLS


class MsgType(IntEnum):
    DEAL_SHARE = 0x01
    DESIRE_FLAG = 0x02
    SIGNAL = 0x03
    DECODED = 0x04
    ROUND_BEGIN = 0x05
    SHUTDOWN = 0x06


class ProtocolError(ValueError):
    """Malformed frame; ``field`` names the part that failed to parse."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class WireMessage:
    msg_type: MsgType
    round_id: int
    sender_id: int
    p: int
    symbols: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "msg_type", _msg_type(self.msg_type))
        if not 0 <= self.round_id < 1 << 32:
            raise ProtocolError("round_id", f"{self.round_id} does not fit in 4 bytes")
        if not 0 <= self.sender_id < 1 << 16:
            raise ProtocolError("sender_id", f"{self.sender_id} does not fit in 2 bytes")
        _check_payload(self.p, self.symbols)

    def encode(self) -> bytes:
        n = len(self.symbols)
        return b"".join((
            HEADER.pack(PAYLOAD_HEAD.size + 2 * n, self.msg_type, self.round_id, self.sender_id),
            PAYLOAD_HEAD.pack(self.p, n),
            struct.pack(f">{n}H", *self.symbols),
        ))


def _msg_type(value: int) -> MsgType:
    try:
        return MsgType(value)
    except ValueError:
        raise ProtocolError("msg_type", f"unknown message type 0x{int(value):02x}") from None


def _check_payload(p: int, symbols: tuple[int, ...]) -> None:
    if p not in SUPPORTED_PRIMES:
        raise ProtocolError("p", f"modulus {p} is not a supported prime")
    if len(symbols) > MAX_SYMBOLS:
        raise ProtocolError("length", f"{len(symbols)} symbols exceeds {MAX_SYMBOLS}")
    for j, v in enumerate(symbols):
        if not 0 <= v < p:
            raise ProtocolError(f"symbols[{j}]", f"residue {v} not below p={p}")


def parse_header(head: bytes) -> tuple[int, MsgType, int, int]:
    if len(head) != HEADER_LEN:
        raise ProtocolError("frame", f"header needs {HEADER_LEN} bytes, got {len(head)}")
    length, mtype, round_id, sender = HEADER.unpack(head)
    if not PAYLOAD_HEAD.size <= length <= MAX_PAYLOAD or length % 2:
        raise ProtocolError("frame", f"payload length {length} is impossible")
    return length, _msg_type(mtype), round_id, sender


def parse_payload(mtype: MsgType, round_id: int, sender: int, payload: bytes) -> WireMessage:
    p, n = PAYLOAD_HEAD.unpack_from(payload)
    if len(payload) != PAYLOAD_HEAD.size + 2 * n:
        raise ProtocolError("length", f"declares {n} symbols but frame carries {(len(payload) - 4) // 2}")
    symbols = struct.unpack_from(f">{n}H", payload, PAYLOAD_HEAD.size)
    return WireMessage(mtype, round_id, sender, p, symbols)


def decode(frame: bytes) -> WireMessage:
    """Parse exactly one frame."""
    length, mtype, round_id, sender = parse_header(frame[:HEADER_LEN])
    body = frame[HEADER_LEN:]
    if len(body) != length:
        raise ProtocolError("frame", f"header announces {length} payload bytes, got {len(body)}")
    return parse_payload(mtype, round_id, sender, body)


def split_frames(buf: bytes) -> tuple[list[WireMessage], bytes]:
    """Parse every complete frame at the front of buf; return them and the leftover bytes."""
    out = []
    view = memoryview(buf)
    while len(view) >= HEADER_LEN:
        length = parse_header(bytes(view[:HEADER_LEN]))[0]
        end = HEADER_LEN + length
        if len(view) < end:
            break
        out.append(decode(bytes(view[:end])))
        view = view[end:]
    return out, bytes(view)


async def read_frame(reader: asyncio.StreamReader) -> bytes | None:
    """Raw bytes of the next frame, or None on a clean end of stream."""
    try:
        head = await reader.readexactly(HEADER_LEN)
    except asyncio.IncompleteReadError as exc:
        if exc.partial:
            raise ProtocolError("frame", "stream ended inside a header") from None
        return None
    length = parse_header(head)[0]
    try:
        body = await reader.readexactly(length)
    except asyncio.IncompleteReadError:
        raise ProtocolError("frame", "stream ended inside a payload") from None
    return head + body
