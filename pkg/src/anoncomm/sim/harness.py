"""Run the scheme as K + 2 actors over a fabric and collect per-round logs."""

from __future__ import annotations

import asyncio
import json
import os
import random
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

from scipy.stats import chi2

from ..protocol import SchemeParams, _require_builtin
from .actors import Dealer, RandomSource, Receiver, ScriptedSource, Transmitter
from .transport import TrafficAudit, Tamper, actor_name, make_fabric, receiver_id

SEED_ENV = "ANONCOMM_SEED"
CHI2_CONFIDENCE = 0.999


@dataclass
class RoundLog:
    round_id: int
    status: str
    transcript: list[list[int]] | None
    decoded: list[int] | None
    timestamps: dict[str, int]
    theta: int | None = None
    cause: str | None = None
    correct: bool | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> RoundLog:
        return cls(**json.loads(line))


class SimulationLog(list):
    """List of RoundLogs plus run metadata and the traffic audit."""

    def __init__(self, logs: Iterable[RoundLog], *, params, transport, seed, audit_mode, traffic):
        super().__init__(logs)
        self.params = params
        self.transport = transport
        self.seed = seed
        self.audit_mode = audit_mode
        self.traffic = traffic

    @property
    def correct(self) -> int:
        return sum(1 for log in self if log.correct)

    @property
    def failed(self) -> int:
        return sum(1 for log in self if log.status != "ok")

    def to_jsonl(self) -> str:
        return "".join(log.to_json() + "\n" for log in self)


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return random.SystemRandom().randrange(1 << 32)


async def _run(params, rounds, transport, source, audit, shutdown_round, tamper):
    K = params.K
    traffic = TrafficAudit(K, params.L, params.N)
    fabric = make_fabric(transport, traffic, tamper)
    ids = [0, *range(1, K + 1), receiver_id(K)]
    await fabric.start(ids)
    dealer = Dealer(params, fabric, source.for_dealer(), rounds, shutdown_round)
    txs = [Transmitter(i, params, fabric, source.for_transmitter(i)) for i in range(1, K + 1)]
    rx = Receiver(params, fabric)
    tasks = [asyncio.create_task(a.run()) for a in (dealer, *txs, rx)]
    error: BaseException | None = None
    try:
        pending = set(tasks) | {fabric.failure}
        while pending - {fabric.failure}:
            done, pending = await asyncio.wait(pending, return_when=asyncio.FIRST_COMPLETED)
            bad = [t for t in done if t.exception() is not None]
            if bad:
                error = bad[0].exception()
                break
    finally:
        for t in tasks:
            t.cancel()
        await asyncio.gather(*tasks, return_exceptions=True)
        if not fabric.failure.done():
            fabric.failure.cancel()
        await fabric.close()

    logs = []
    for r, rec in sorted(dealer.records.items()):
        got = rx.records.get(r)
        stamps = {"dealer": rec.clock} if rec.clock is not None else {}
        for t in txs:
            if r in t.clocks:
                stamps[actor_name(t.id, K)] = t.clocks[r]
        if got is not None and got.clock is not None:
            stamps["receiver"] = got.clock
        ok = rec.status == "ok" and got is not None and got.status == "ok"
        cause = None
        if not ok:
            cause = rec.cause or (got.cause if got is not None else None)
            if error is not None and rec.status != "ok":
                cause = f"{type(error).__name__}: {error}"
        theta_ok = ok and txs[rec.theta - 1].messages.get(r) == tuple(got.decoded)
        logs.append(RoundLog(
            round_id=r,
            status="ok" if ok else "failed",
            transcript=[list(s) for s in got.transcript] if ok else None,
            decoded=list(got.decoded) if ok else None,
            timestamps=dict(sorted(stamps.items())),
            theta=rec.theta if audit else None,
            cause=cause,
            correct=theta_ok if ok else None,
        ))
    return logs, traffic


def run_simulation(
    params: SchemeParams,
    rounds: int,
    transport: str = "in-process",
    seed: int | None = None,
    audit: bool = False,
    *,
    source: RandomSource | ScriptedSource | None = None,
    shutdown_round: int | None = None,
    tamper: Tamper | None = None,
) -> SimulationLog:
    """Run ``rounds`` lockstep rounds; theta appears in the logs only when ``audit`` is set.

    The seed falls back to $ANONCOMM_SEED, then to a fresh random value
    (recorded on the returned log).
    """
    _require_builtin(params)
    if rounds < 1:
        raise ValueError(f"rounds must be at least 1, got {rounds}")
    used = None
    if source is None:
        used = resolve_seed(seed)
        source = RandomSource(used)
    logs, traffic = asyncio.run(_run(params, rounds, transport, source, audit, shutdown_round, tamper))
    return SimulationLog(logs, params=params, transport=transport, seed=used, audit_mode=audit, traffic=traffic)


def write_jsonl(logs: Iterable[RoundLog], path: str | Path) -> None:
    Path(path).write_text("".join(log.to_json() + "\n" for log in logs))


def read_jsonl(path: str | Path) -> list[RoundLog]:
    return [RoundLog.from_json(line) for line in Path(path).read_text().splitlines() if line.strip()]


# -- receiver view -----------------------------------------------------------


class AuditLogError(ValueError):
    """Audit-mode logs carry theta and must not become a receiver dataset."""


@dataclass(frozen=True)
class ReceiverView:
    round_id: int
    transcript: tuple[tuple[int, ...], ...]
    decoded: tuple[int, ...]


def receiver_view_dump(logs: Iterable[RoundLog]) -> list[ReceiverView]:
    """What the receiver legitimately saw: transcripts and decoded values of completed rounds."""
    logs = list(logs)
    if getattr(logs, "audit_mode", False) or any(log.theta is not None for log in logs):
        raise AuditLogError("refusing to dump audit-mode logs: they record theta")
    return [
        ReceiverView(log.round_id, tuple(tuple(s) for s in log.transcript), tuple(log.decoded))
        for log in logs
        if log.status == "ok"
    ]


@dataclass(frozen=True)
class ChiSquare:
    statistic: float
    dof: int
    threshold: float
    samples: int
    passed: bool


def chi_square_screen(views: Iterable[ReceiverView], params: SchemeParams, confidence: float = CHI2_CONFIDENCE) -> ChiSquare:
    """Coarse uniformity screen of transcripts over all p^(K*N) cells.

    Passes when the Pearson statistic stays below the ``confidence``
    quantile of chi-square with p^(K*N) - 1 degrees of freedom, so a
    correct scheme fails it with probability 1 - confidence.
    """
    views = list(views)
    cells = params.p ** (params.K * params.N)
    counts = Counter(v.transcript for v in views)
    n = len(views)
    if n == 0:
        return ChiSquare(0.0, cells - 1, float(chi2.ppf(confidence, cells - 1)), 0, True)
    expected = n / cells
    stat = sum((c - expected) ** 2 / expected for c in counts.values()) + expected * (cells - len(counts))
    thr = float(chi2.ppf(confidence, cells - 1))
    return ChiSquare(float(stat), cells - 1, thr, n, stat < thr)
