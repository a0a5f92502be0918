"""Channel fabrics that move framed bytes between actors, and the traffic audit.

Actor ids: 0 is the dealer, 1..K the transmitters, K+1 the receiver.
"""

from __future__ import annotations

import asyncio
import struct
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from . import wire
from .wire import MsgType, ProtocolError

DEALER = 0
PREAMBLE = struct.Struct(">HH")
DOWNLINK = 0xFFFF

Tamper = Callable[[int, int, bytes], bytes]


def receiver_id(K: int) -> int:
    return K + 1


def actor_name(actor: int, K: int) -> str:
    if actor == DEALER:
        return "dealer"
    if actor == receiver_id(K):
        return "receiver"
    return f"transmitter_{actor}"


@dataclass
class TrafficAudit:
    """Inspects every frame the fabric carries against the allowed traffic pattern.

    Transmitters may only hear ROUND_BEGIN, DEAL_SHARE, DESIRE_FLAG (a single
    0/1 symbol) and SHUTDOWN from the dealer. The receiver may only hear
    payload-free ROUND_BEGIN/SHUTDOWN from the dealer and SIGNAL from
    transmitters, so shares and messages reach it only inside signals.
    """

    K: int
    L: int
    N: int
    frames: int = 0
    by_type: Counter = field(default_factory=Counter)
    violations: list[dict] = field(default_factory=list)

    def _allowed(self, src: int, dst: int) -> dict[MsgType, int | None]:
        rx = receiver_id(self.K)
        if src == DEALER and 1 <= dst <= self.K:
            return {MsgType.ROUND_BEGIN: 0, MsgType.DEAL_SHARE: self.L, MsgType.DESIRE_FLAG: 1, MsgType.SHUTDOWN: 0}
        if src == DEALER and dst == rx:
            return {MsgType.ROUND_BEGIN: 0, MsgType.SHUTDOWN: 0}
        if 1 <= src <= self.K and dst == rx:
            return {MsgType.SIGNAL: self.N}
        if src == rx and dst == DEALER:
            return {MsgType.DECODED: self.L}
        return {}

    def _flag(self, src, dst, reason, **extra):
        self.violations.append({"src": src, "dst": dst, "reason": reason, **extra})

    def inspect(self, src: int, dst: int, frame: bytes) -> None:
        self.frames += 1
        try:
            msg = wire.decode(frame)
        except ProtocolError as exc:
            self._flag(src, dst, "malformed frame", field=exc.field)
            return
        self.by_type[msg.msg_type.name] += 1
        allowed = self._allowed(src, dst)
        if msg.msg_type not in allowed:
            self._flag(src, dst, f"{msg.msg_type.name} not allowed on this link", round_id=msg.round_id)
            return
        if msg.sender_id != src:
            self._flag(src, dst, "sender_id does not match link source", round_id=msg.round_id)
        if len(msg.symbols) != allowed[msg.msg_type]:
            self._flag(src, dst, f"{msg.msg_type.name} carries {len(msg.symbols)} symbols", round_id=msg.round_id)
        if msg.msg_type is MsgType.DESIRE_FLAG and any(v not in (0, 1) for v in msg.symbols):
            self._flag(src, dst, "desire flag is not a single bit", round_id=msg.round_id)

    def to_dict(self) -> dict:
        return {"frames": self.frames, "by_type": dict(sorted(self.by_type.items())), "violations": self.violations}


class Fabric:
    """Per-destination FIFO delivery; per-link order is preserved."""

    name = "abstract"

    def __init__(self, audit: TrafficAudit, tamper: Tamper | None = None):
        self.audit = audit
        self.tamper = tamper
        self.failure: asyncio.Future | None = None

    def _fail(self, exc: BaseException) -> None:
        closing = getattr(self, "_closing", None)
        if closing is not None and closing.is_set():
            return
        if self.failure is not None and not self.failure.done():
            self.failure.set_exception(exc)

    async def start(self, actors: list[int]) -> None:
        raise NotImplementedError

    async def send(self, src: int, dst: int, frame: bytes) -> None:
        raise NotImplementedError

    async def recv(self, dst: int) -> bytes:
        raise NotImplementedError

    async def close(self) -> None:
        pass

    def _wire(self, src: int, dst: int, frame: bytes) -> bytes:
        return self.tamper(src, dst, frame) if self.tamper else frame


class InProcessFabric(Fabric):
    name = "in-process"

    async def start(self, actors):
        self.failure = asyncio.get_running_loop().create_future()
        self.inbox = {a: asyncio.Queue() for a in actors}

    async def send(self, src, dst, frame):
        frame = self._wire(src, dst, frame)
        self.audit.inspect(src, dst, frame)
        await self.inbox[dst].put(frame)

    async def recv(self, dst):
        return await self.inbox[dst].get()


class StreamFabric(Fabric):
    """Localhost TCP through a hub.

    Each directed link is its own connection to the hub, opened with a
    (src, dst) preamble. Each actor also holds one downlink connection,
    announced as (0xFFFF, actor), on which the hub forwards its frames.
    """

    name = "stream"

    async def start(self, actors):
        self.failure = asyncio.get_running_loop().create_future()
        self._down_writers: dict[int, asyncio.StreamWriter] = {}
        self._down_ready = {a: asyncio.Event() for a in actors}
        self._up: dict[tuple[int, int], asyncio.StreamWriter] = {}
        self._tasks: set[asyncio.Task] = set()
        self._closing = asyncio.Event()
        self.server = await asyncio.start_server(self._accept, "127.0.0.1", 0)
        self.port = self.server.sockets[0].getsockname()[1]
        self._down_readers = {}
        for a in actors:
            reader, writer = await asyncio.open_connection("127.0.0.1", self.port)
            writer.write(PREAMBLE.pack(DOWNLINK, a))
            await writer.drain()
            self._down_readers[a] = (reader, writer)
        for a in actors:
            await self._down_ready[a].wait()

    async def _accept(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        task = asyncio.current_task()
        self._tasks.add(task)
        try:
            src, dst = PREAMBLE.unpack(await reader.readexactly(PREAMBLE.size))
            if src == DOWNLINK:
                self._down_writers[dst] = writer
                self._down_ready[dst].set()
                await self._closing.wait()  # keep the downlink owned by this handler
                return
            if dst not in self._down_ready:
                raise ProtocolError("preamble", f"unknown destination {dst}")
            await self._down_ready[dst].wait()
            out = self._down_writers[dst]
            while True:
                frame = await wire.read_frame(reader)
                if frame is None:
                    break
                self.audit.inspect(src, dst, frame)
                out.write(frame)
                await out.drain()
        except ProtocolError as exc:
            self.audit._flag(src, dst, "malformed frame", field=exc.field)
            self._fail(exc)
        except (ConnectionError, asyncio.IncompleteReadError) as exc:
            self._fail(exc)
        finally:
            self._tasks.discard(task)

    async def send(self, src, dst, frame):
        w = self._up.get((src, dst))
        if w is None:
            _, w = await asyncio.open_connection("127.0.0.1", self.port)
            w.write(PREAMBLE.pack(src, dst))
            self._up[(src, dst)] = w
        w.write(self._wire(src, dst, frame))
        await w.drain()

    async def recv(self, dst):
        reader = self._down_readers[dst][0]
        frame = await wire.read_frame(reader)
        if frame is None:
            raise ConnectionError(f"downlink of actor {dst} closed")
        return frame

    async def close(self):
        self._closing.set()
        for w in self._up.values():
            w.close()
        for _, w in self._down_readers.values():
            w.close()
        for w in self._down_writers.values():
            w.close()
        self.server.close()
        for t in list(self._tasks):
            t.cancel()
        await asyncio.gather(*self._tasks, return_exceptions=True)
        await self.server.wait_closed()


FABRICS = {"in-process": InProcessFabric, "stream": StreamFabric}


def make_fabric(transport: str, audit: TrafficAudit, tamper: Tamper | None = None) -> Fabric:
    try:
        return FABRICS[transport](audit, tamper)
    except KeyError:
        raise ValueError(f"unknown transport {transport!r}; expected one of {sorted(FABRICS)}") from None
