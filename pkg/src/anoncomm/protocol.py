"""The rate-1/K anonymous scheme with coded (sum-to-zero) correlated randomness.

K transmitters each own a private noiseless link to one receiver. A trusted
dealer draws K-1 uniform symbols a_1..a_{K-1} per message symbol and hands
out Z_i = a_i (i < K) and Z_K = -(a_1 + ... + a_{K-1}), so the K shares sum
to zero (over F_2 the minus sign vanishes). Every transmitter sends
its share, the desired one adds its message, and the receiver adds all K
signals. Transmitters only learn whether they are the desired one.

Transmitter indices and theta are 1-based here.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from . import fp, info
from .fp import SymbolVector


@dataclass(frozen=True)
class SchemeParams:
    K: int
    p: int = 2
    L: int = 1
    N: int | None = None

    def __post_init__(self):
        if self.N is None:
            object.__setattr__(self, "N", self.L)
        if not isinstance(self.K, int) or self.K < 2:
            raise ValueError(f"need at least two transmitters, got K={self.K!r}")
        fp.check_prime(self.p)
        if self.L < 1:
            raise ValueError(f"message length must be positive, got L={self.L}")
        if self.N < 1:
            raise ValueError(f"channel uses must be positive, got N={self.N}")

    @property
    def rate(self) -> Fraction:
        return Fraction(self.L, self.K * self.N)

    @property
    def seed_len(self) -> int:
        return (self.K - 1) * self.L

    def to_dict(self) -> dict:
        return {"K": self.K, "p": self.p, "L": self.L, "N": self.N}


def _require_builtin(params: SchemeParams) -> None:
    if params.N != params.L:
        raise ValueError(f"the built-in scheme uses N = L channel uses, got N={params.N}, L={params.L}")


@dataclass(frozen=True)
class Seed:
    """Dealer randomness; symbol a_j of slot l sits at index l*(K-1) + j."""

    a: SymbolVector


@dataclass(frozen=True)
class Share:
    owner: int
    z: SymbolVector


@dataclass(frozen=True)
class Message:
    w: SymbolVector


@dataclass(frozen=True)
class DesireFlag:
    is_desired: bool


@dataclass(frozen=True)
class Transcript:
    signals: tuple[SymbolVector, ...]

    def __post_init__(self):
        sig = tuple(self.signals)
        object.__setattr__(self, "signals", sig)
        if not sig:
            raise ValueError("transcript has no signals")
        p, n = sig[0].p, len(sig[0])
        for s in sig:
            if s.p != p or len(s) != n:
                raise ValueError("transcript signals must share modulus and length")

    @property
    def K(self) -> int:
        return len(self.signals)

    def as_tuples(self) -> tuple[tuple[int, ...], ...]:
        return tuple(s.values for s in self.signals)


def make_seed(values: Sequence[int], params: SchemeParams) -> Seed:
    return Seed(SymbolVector(tuple(values), params.p))


def deal(params: SchemeParams, seed: Seed) -> list[Share]:
    _require_builtin(params)
    K, L, p = params.K, params.L, params.p
    if seed.a.p != p:
        raise fp.FieldError(f"seed modulus {seed.a.p} differs from p={p}")
    if len(seed.a) != (K - 1) * L:
        raise ValueError(f"seed must hold (K-1)*L = {(K - 1) * L} symbols, got {len(seed.a)}")
    a = seed.a.values
    z = [[0] * L for _ in range(K)]
    for slot in range(L):
        block = a[slot * (K - 1):(slot + 1) * (K - 1)]
        for j, v in enumerate(block):
            z[j][slot] = v
        z[K - 1][slot] = -sum(block) % p
    return [Share(i + 1, SymbolVector(tuple(z[i]), p)) for i in range(K)]


def encode(i: int, flag: DesireFlag, w: Message, z: Share) -> SymbolVector:
    if z.owner != i:
        raise ValueError(f"transmitter {i} was handed the share of transmitter {z.owner}")
    if not flag.is_desired:
        return z.z
    if len(w.w) != len(z.z):
        raise ValueError(f"message length {len(w.w)} differs from share length {len(z.z)}")
    return fp.vec_add(z.z, w.w)


def decode(y: Transcript) -> Message:
    """Symbol-wise sum of all received signals. Takes no theta."""
    return Message(fp.vec_sum(list(y.signals)))


def run_round(
    params: SchemeParams, theta: int, messages: Sequence[Message], seed: Seed
) -> tuple[Transcript, Message]:
    K = params.K
    if not 1 <= theta <= K:
        raise ValueError(f"theta must lie in 1..{K}, got {theta}")
    if len(messages) != K:
        raise ValueError(f"need {K} messages, got {len(messages)}")
    for m in messages:
        if len(m.w) != params.L or m.w.p != params.p:
            raise ValueError("every message must be L symbols over F_p")
    shares = deal(params, seed)
    signals = tuple(
        encode(i, DesireFlag(i == theta), messages[i - 1], shares[i - 1]) for i in range(1, K + 1)
    )
    y = Transcript(signals)
    return y, decode(y)


class Dealer:
    """Trusted offline source of theta and seeds. Confine to one owner."""

    def __init__(self, params: SchemeParams, rng: random.Random | None = None):
        _require_builtin(params)
        self.params = params
        self.rng = rng if rng is not None else random.Random()

    def draw_theta(self) -> int:
        return self.rng.randrange(self.params.K) + 1

    def draw_seed(self) -> Seed:
        p = self.params.p
        return make_seed([self.rng.randrange(p) for _ in range(self.params.seed_len)], self.params)


class Metrics(NamedTuple):
    rate: Fraction
    rho: Fraction | float
    eta: Fraction | float
    individual: tuple


def share_distribution(params: SchemeParams, cap: int | None = info.DEFAULT_MAX_STATES) -> info.DistTable:
    """Joint table of (Z_1, ..., Z_K) over all p^((K-1)L) seeds; each Z_i as a code."""
    _require_builtin(params)

    def shares_of(seed_values):
        return tuple(s.z.code() for s in deal(params, make_seed(seed_values, params)))

    return info.enumerate_distribution([params.p] * params.seed_len, shares_of, cap=cap)


def _as_number(h: info.EntropyValue, L: int):
    if h.exact is not None:
        return h.exact / L
    return float(h.value) / L


def metrics(params: SchemeParams, cap: int | None = info.DEFAULT_MAX_STATES) -> Metrics:
    """Rate L/(KN) and the randomness sizes H(Z_1)/L, H(Z_1..Z_K)/L in p-ary units."""
    table = share_distribution(params, cap)
    K, p, L = params.K, params.p, params.L
    individual = tuple(_as_number(info.entropy(table.marginal([i]), p), L) for i in range(K))
    eta = _as_number(info.entropy(table, p), L)
    return Metrics(params.rate, individual[0], eta, individual)
