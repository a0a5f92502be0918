"""Dealer, transmitter and receiver actors.

Actors share no mutable state. Each keeps its own records, which the
harness reads only after the run. Every actor counts its own send/receive
events; the count at the end of an actor's work for a round is its
timestamp for that round, which makes logs independent of scheduling.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .. import protocol
from ..fp import SymbolVector
from ..protocol import DesireFlag, Message, SchemeParams, Share
from . import wire
from .transport import DEALER, Fabric, receiver_id
from .wire import MsgType, ProtocolError, WireMessage


# -- randomness sources ------------------------------------------------------


class RandomSource:
    """Independent deterministic streams for the dealer and each transmitter."""

    def __init__(self, seed: int):
        self.seed = seed

    def for_dealer(self) -> DealerStream:
        return _RandomDealer(random.Random(f"anoncomm/{self.seed}/dealer"))

    def for_transmitter(self, i: int) -> MessageStream:
        return _RandomMessages(random.Random(f"anoncomm/{self.seed}/transmitter/{i}"))


class DealerStream:
    def draw(self, params: SchemeParams, round_id: int) -> tuple[int, tuple[int, ...]]:
        raise NotImplementedError


class MessageStream:
    def draw(self, params: SchemeParams, round_id: int) -> tuple[int, ...]:
        raise NotImplementedError


class _RandomDealer(DealerStream):
    def __init__(self, rng):
        self.rng = rng

    def draw(self, params, round_id):
        theta = self.rng.randrange(params.K) + 1
        return theta, tuple(self.rng.randrange(params.p) for _ in range(params.seed_len))


class _RandomMessages(MessageStream):
    def __init__(self, rng):
        self.rng = rng

    def draw(self, params, round_id):
        return tuple(self.rng.randrange(params.p) for _ in range(params.L))


class ScriptedSource:
    """Replays fixed per-round thetas, seeds and messages (round r uses entry r-1)."""

    def __init__(self, thetas: Sequence[int], seeds: Sequence[Sequence[int]], messages: Sequence[Sequence[Sequence[int]]]):
        if not len(thetas) == len(seeds) == len(messages):
            raise ValueError("scripted thetas, seeds and messages need one entry per round")
        self.thetas = list(thetas)
        self.seeds = [tuple(s) for s in seeds]
        self.messages = [[tuple(w) for w in ws] for ws in messages]

    def for_dealer(self):
        return _ScriptedDealer(self.thetas, self.seeds)

    def for_transmitter(self, i):
        return _ScriptedMessages([ws[i - 1] for ws in self.messages])


class _ScriptedDealer(DealerStream):
    def __init__(self, thetas, seeds):
        self.thetas, self.seeds = thetas, seeds

    def draw(self, params, round_id):
        if round_id > len(self.thetas):
            raise ValueError(f"script has no entry for round {round_id}")
        return self.thetas[round_id - 1], self.seeds[round_id - 1]


class _ScriptedMessages(MessageStream):
    def __init__(self, ws):
        self.ws = ws

    def draw(self, params, round_id):
        if round_id > len(self.ws):
            raise ValueError(f"script has no entry for round {round_id}")
        return self.ws[round_id - 1]


# -- actors --------------------------------------------------------------------


class Actor:
    def __init__(self, actor_id: int, params: SchemeParams, fabric: Fabric):
        self.id = actor_id
        self.params = params
        self.fabric = fabric
        self.clock = 0

    def _msg(self, mtype: MsgType, round_id: int, symbols=()) -> WireMessage:
        return WireMessage(mtype, round_id, self.id, self.params.p, tuple(symbols))

    async def send(self, dst: int, msg: WireMessage) -> None:
        self.clock += 1
        await self.fabric.send(self.id, dst, msg.encode())

    async def recv(self) -> WireMessage:
        frame = await self.fabric.recv(self.id)
        self.clock += 1
        msg = wire.decode(frame)
        if msg.p != self.params.p:
            raise ProtocolError("p", f"frame modulus {msg.p} differs from p={self.params.p}")
        return msg


@dataclass
class DealerRecord:
    theta: int
    status: str = "pending"
    decoded: tuple[int, ...] | None = None
    cause: str | None = None
    clock: int | None = None


class Dealer(Actor):
    """Draws theta and the seed, deals shares and flags, waits for the decode."""

    def __init__(self, params, fabric, stream: DealerStream, rounds: int, shutdown_round: int | None = None):
        super().__init__(DEALER, params, fabric)
        self.stream = stream
        self.rounds = rounds
        self.shutdown_round = shutdown_round
        self.records: dict[int, DealerRecord] = {}
        self.current: int | None = None

    async def _shutdown(self):
        K = self.params.K
        for dst in [*range(1, K + 1), receiver_id(K)]:
            await self.send(dst, self._msg(MsgType.SHUTDOWN, self.current or 0))

    async def run(self) -> None:
        P = self.params
        K, rx = P.K, receiver_id(P.K)
        for r in range(1, self.rounds + 1):
            self.current = r
            theta, seed = self.stream.draw(P, r)
            rec = self.records[r] = DealerRecord(theta)
            shares = protocol.deal(P, protocol.make_seed(seed, P))
            for dst in [*range(1, K + 1), rx]:
                await self.send(dst, self._msg(MsgType.ROUND_BEGIN, r))
            for i in range(1, K + 1):
                await self.send(i, self._msg(MsgType.DEAL_SHARE, r, shares[i - 1].z.values))
            if r == self.shutdown_round:
                rec.status, rec.cause = "failed", "shutdown before desire flags were sent"
                rec.clock = self.clock
                await self._shutdown()
                return
            for i in range(1, K + 1):
                await self.send(i, self._msg(MsgType.DESIRE_FLAG, r, (int(i == theta),)))
            msg = await self.recv()
            if msg.msg_type is not MsgType.DECODED or msg.sender_id != rx or msg.round_id != r:
                raise ProtocolError("msg_type", f"dealer expected DECODED for round {r}, got {msg.msg_type.name}")
            rec.status, rec.decoded, rec.clock = "ok", msg.symbols, self.clock
        self.current = None
        await self._shutdown()


@dataclass
class _TxRound:
    share: tuple[int, ...] | None = None
    flag: bool | None = None


class Transmitter(Actor):
    """Knows only its own share, flag and message."""

    def __init__(self, i: int, params, fabric, stream: MessageStream):
        super().__init__(i, params, fabric)
        self.stream = stream
        self.messages: dict[int, tuple[int, ...]] = {}
        self.clocks: dict[int, int] = {}

    async def run(self) -> None:
        P = self.params
        rounds: dict[int, _TxRound] = {}
        while True:
            msg = await self.recv()
            if msg.sender_id != DEALER:
                raise ProtocolError("sender_id", f"transmitter {self.id} heard from actor {msg.sender_id}")
            t = msg.msg_type
            if t is MsgType.SHUTDOWN:
                return
            if t is MsgType.ROUND_BEGIN:
                rounds[msg.round_id] = _TxRound()
                continue
            st = rounds.get(msg.round_id)
            if st is None:
                raise ProtocolError("round_id", f"round {msg.round_id} was never begun")
            if t is MsgType.DEAL_SHARE:
                st.share = msg.symbols
            elif t is MsgType.DESIRE_FLAG:
                st.flag = bool(msg.symbols[0])
            else:
                raise ProtocolError("msg_type", f"transmitter cannot handle {t.name}")
            if st.share is not None and st.flag is not None:
                r = msg.round_id
                w = self.stream.draw(P, r)
                self.messages[r] = w
                x = protocol.encode(
                    self.id, DesireFlag(st.flag), Message(SymbolVector(w, P.p)),
                    Share(self.id, SymbolVector(st.share, P.p)),
                )
                await self.send(receiver_id(P.K), self._msg(MsgType.SIGNAL, r, x.values))
                self.clocks[r] = self.clock
                del rounds[r]


@dataclass
class ReceiverRecord:
    status: str
    transcript: tuple[tuple[int, ...], ...] | None = None
    decoded: tuple[int, ...] | None = None
    cause: str | None = None
    clock: int | None = None


class Receiver(Actor):
    """Buffers signals per round and decodes once all K have arrived."""

    def __init__(self, params, fabric):
        super().__init__(receiver_id(params.K), params, fabric)
        self.records: dict[int, ReceiverRecord] = {}

    async def run(self) -> None:
        P = self.params
        K = P.K
        begun: set[int] = set()
        pending: dict[int, dict[int, tuple[int, ...]]] = {}
        while True:
            msg = await self.recv()
            t = msg.msg_type
            if t is MsgType.SHUTDOWN:
                for r in sorted(begun | set(pending)):
                    got = len(pending.get(r, {}))
                    self.records[r] = ReceiverRecord(
                        "failed", cause=f"shutdown with {got} of {K} signals", clock=self.clock
                    )
                return
            if t is MsgType.ROUND_BEGIN:
                if msg.round_id not in self.records:  # may trail the signals on another link
                    begun.add(msg.round_id)
                continue
            if t is not MsgType.SIGNAL:
                raise ProtocolError("msg_type", f"receiver cannot handle {t.name}")
            if not 1 <= msg.sender_id <= K:
                raise ProtocolError("sender_id", f"signal from non-transmitter {msg.sender_id}")
            r = msg.round_id
            slot = pending.setdefault(r, {})
            if msg.sender_id in slot:
                raise ProtocolError("sender_id", f"second signal from transmitter {msg.sender_id} in round {r}")
            slot[msg.sender_id] = msg.symbols
            if len(slot) == K:
                signals = tuple(slot[i] for i in range(1, K + 1))
                y = protocol.Transcript(tuple(SymbolVector(s, P.p) for s in signals))
                m = protocol.decode(y).w.values
                del pending[r]
                begun.discard(r)
                await self.send(DEALER, self._msg(MsgType.DECODED, r, m))
                self.records[r] = ReceiverRecord("ok", signals, m, clock=self.clock)
