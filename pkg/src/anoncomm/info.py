"""Exact finite distributions: count tables, p-ary entropies, mutual information.

Distributions arise from enumerating every point of a uniform finite input
space, so they are stored as integer counts. Verdicts about independence or
distributional identity are made on the integers; entropies are reported as
high-precision reals (and as exact rationals when the table is uniform over a
support whose size is a power of the base).
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import mpmath
import numpy as np

DEFAULT_MAX_STATES = 10**8
_DPS = 50


class StateSpaceTooLarge(RuntimeError):
    """Raised instead of enumerating a space larger than the configured cap."""

    def __init__(self, required: int, cap: int, what: str = "state space"):
        self.required = int(required)
        self.cap = int(cap)
        super().__init__(f"{what} needs {self.required} states, cap is {self.cap}")


def check_cap(required: int, cap: int | None, what: str = "state space") -> None:
    if cap is not None and required > cap:
        raise StateSpaceTooLarge(required, cap, what)


class DistTable:
    """Joint distribution of ``arity`` variables as outcome-tuple -> count."""

    __slots__ = ("arity", "counts", "total")

    def __init__(self, counts: Mapping[tuple, int], arity: int | None = None):
        clean = {}
        for k, c in counts.items():
            if not isinstance(k, tuple):
                k = (k,)
            c = int(c)
            if c < 0:
                raise ValueError(f"negative count for {k!r}")
            if c:
                clean[k] = clean.get(k, 0) + c
        if arity is None:
            if not clean:
                raise ValueError("cannot infer arity of an empty table")
            arity = len(next(iter(clean)))
        if any(len(k) != arity for k in clean):
            raise ValueError(f"outcome tuples must all have length {arity}")
        total = sum(clean.values())
        if total <= 0:
            raise ValueError("table has no mass")
        self.arity = arity
        self.counts = clean
        self.total = total

    @classmethod
    def from_outcomes(cls, outcomes: Iterable[tuple]) -> DistTable:
        return cls(Counter(tuple(o) for o in outcomes))

    @classmethod
    def from_columns(cls, *columns: np.ndarray) -> DistTable:
        """Table of the rows of equally sized integer arrays."""
        stacked = np.stack([np.asarray(c, dtype=np.int64).ravel() for c in columns], axis=1)
        rows, counts = np.unique(stacked, axis=0, return_counts=True)
        return cls({tuple(int(v) for v in r): int(c) for r, c in zip(rows, counts)}, len(columns))

    def marginal(self, indices: Sequence[int]) -> DistTable:
        indices = list(indices)
        if not indices:
            return DistTable({(): self.total}, 0)
        for i in indices:
            if not 0 <= i < self.arity:
                raise IndexError(f"variable {i} outside arity {self.arity}")
        out: dict[tuple, int] = {}
        for k, c in self.counts.items():
            key = tuple(k[i] for i in indices)
            out[key] = out.get(key, 0) + c
        return DistTable(out, len(indices))

    def support(self) -> int:
        return len(self.counts)

    def probability(self, outcome: tuple) -> Fraction:
        return Fraction(self.counts.get(tuple(outcome), 0), self.total)

    def is_uniform(self) -> bool:
        return len(set(self.counts.values())) == 1

    def __eq__(self, other):
        if not isinstance(other, DistTable):
            return NotImplemented
        return same_distribution(self, other)

    __hash__ = None

    def __repr__(self) -> str:
        return f"DistTable(arity={self.arity}, support={len(self.counts)}, total={self.total})"


@dataclass(frozen=True)
class EntropyValue:
    """An entropy (or mutual information) in base-``base`` units."""

    value: mpmath.mpf
    base: int
    exact: Fraction | None = None

    def __float__(self) -> float:
        return float(self.value)

    @property
    def is_exact_zero(self) -> bool:
        return self.exact == 0

    def __repr__(self) -> str:
        if self.exact is not None:
            return f"EntropyValue({self.exact}, base={self.base})"
        return f"EntropyValue({mpmath.nstr(self.value, 15)}, base={self.base})"


def _exact_log(n: int, base: int) -> Fraction | None:
    """log_base(n) as an integer when n is an exact power of base."""
    if n < 1:
        return None
    k = 0
    while n % base == 0:
        n //= base
        k += 1
    return Fraction(k) if n == 1 else None


def entropy_of_counts(counts: Iterable[int], base: int) -> EntropyValue:
    """-sum q log_base q for q = c / total.

    Uses H = log T - (1/T) sum c log c, grouped by distinct count so that
    large uniform-ish tables cost a handful of high-precision logs.
    """
    arr = np.asarray(list(counts) if not isinstance(counts, np.ndarray) else counts, dtype=np.int64)
    arr = arr[arr > 0]
    if arr.size == 0:
        raise ValueError("entropy of an empty table")
    values, mult = np.unique(arr, return_counts=True)
    total = int(np.dot(values.astype(object), mult.astype(object)))
    with mpmath.workdps(_DPS):
        lb = mpmath.log(base)
        acc = mpmath.mpf(0)
        for c, m in zip(values.tolist(), mult.tolist()):
            acc += m * c * mpmath.log(c)
        h = (mpmath.log(total) - acc / total) / lb
        if h < 0:
            h = mpmath.mpf(0)
        exact = None
        if len(values) == 1:
            exact = _exact_log(int(mult[0]), base)
            if exact is not None:
                h = mpmath.mpf(exact.numerator) / exact.denominator
    return EntropyValue(h, base, exact)


def entropy(d: DistTable, base: int) -> EntropyValue:
    return entropy_of_counts(list(d.counts.values()), base)


def conditional_entropy(d: DistTable, target: Sequence[int], given: Sequence[int], base: int) -> EntropyValue:
    joint = entropy(d.marginal(list(given) + list(target)), base)
    cond = entropy(d.marginal(given), base)
    with mpmath.workdps(_DPS):
        return EntropyValue(joint.value - cond.value, base)


def factorizes(d: DistTable, group_a: Sequence[int], group_b: Sequence[int]) -> bool:
    """Exact test that P(A, B) = P(A) P(B) via integer cross-multiplication."""
    ab = d.marginal(list(group_a) + list(group_b))
    a = d.marginal(group_a)
    b = d.marginal(group_b)
    na = len(group_a)
    if len(ab.counts) != len(a.counts) * len(b.counts):
        return False
    t = ab.total
    for k, c in ab.counts.items():
        if c * t != a.counts[k[:na]] * b.counts[k[na:]]:
            return False
    return True


def mutual_information(d: DistTable, group_a: Sequence[int], group_b: Sequence[int], base: int) -> EntropyValue:
    group_a, group_b = list(group_a), list(group_b)
    if not group_a or not group_b:
        raise ValueError("both variable groups must be non-empty")
    if set(group_a) & set(group_b):
        raise ValueError("variable groups overlap")
    for i in group_a + group_b:
        if not 0 <= i < d.arity:
            raise IndexError(f"variable {i} outside arity {d.arity}")
    ha = entropy(d.marginal(group_a), base)
    hb = entropy(d.marginal(group_b), base)
    hab = entropy(d.marginal(group_a + group_b), base)
    if factorizes(d, group_a, group_b):
        return EntropyValue(mpmath.mpf(0), base, Fraction(0))
    with mpmath.workdps(_DPS):
        return EntropyValue(ha.value + hb.value - hab.value, base)


def same_distribution(d1: DistTable, d2: DistTable) -> bool:
    """Exact equality of the normalized tables (no tolerance)."""
    if d1.arity != d2.arity:
        raise ValueError(f"arity mismatch: {d1.arity} vs {d2.arity}")
    if d1.counts.keys() != d2.counts.keys():
        return False
    t1, t2 = d1.total, d2.total
    return all(c * t2 == d2.counts[k] * t1 for k, c in d1.counts.items())


def first_difference(d1: DistTable, d2: DistTable):
    """An outcome on which two tables disagree after normalization, or None."""
    for k in sorted(set(d1.counts) | set(d2.counts)):
        a, b = d1.counts.get(k, 0), d2.counts.get(k, 0)
        if a * d2.total != b * d1.total:
            return k, Fraction(a, d1.total), Fraction(b, d2.total)
    return None


# -- enumeration --------------------------------------------------------------


def _enumerate_chunk(domains: tuple[int, ...], fn: Callable, first_values: Sequence[int]) -> Counter:
    out: Counter = Counter()
    rest = [range(n) for n in domains[1:]]
    for v in first_values:
        for tail in itertools.product(*rest):
            res = fn((v,) + tail)
            out[res if isinstance(res, tuple) else (res,)] += 1
    return out


def enumerate_distribution(
    domains: Sequence[int],
    fn: Callable[[tuple[int, ...]], Hashable],
    *,
    cap: int | None = DEFAULT_MAX_STATES,
    workers: int = 1,
) -> DistTable:
    """Push the uniform distribution on prod(range(n) for n in domains) through fn.

    With ``workers > 1`` the first input variable is split across processes
    (``fn`` must then be picklable); partial tables merge by summation.
    """
    domains = tuple(int(n) for n in domains)
    if any(n < 1 for n in domains):
        raise ValueError("every domain needs at least one value")
    size = math.prod(domains)
    check_cap(size, cap)
    if not domains:
        res = fn(())
        return DistTable({res if isinstance(res, tuple) else (res,): 1})
    firsts = list(range(domains[0]))
    if workers <= 1 or len(firsts) == 1:
        return DistTable(_enumerate_chunk(domains, fn, firsts))
    chunks = [firsts[i::workers] for i in range(workers) if firsts[i::workers]]
    merged: Counter = Counter()
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        for part in pool.map(_enumerate_chunk, [domains] * len(chunks), [fn] * len(chunks), chunks):
            merged.update(part)
    return DistTable(merged)


# -- array helpers for large coded tables --------------------------------------


class CodeCounter:
    """Accumulates integer outcome codes chunk by chunk; merge is a plain sum."""

    def __init__(self):
        self._parts: list[tuple[np.ndarray, np.ndarray]] = []

    def add(self, codes: np.ndarray) -> None:
        u, c = np.unique(np.asarray(codes, dtype=np.int64).ravel(), return_counts=True)
        self._parts.append((u, c.astype(np.int64)))

    def merge(self, other: CodeCounter) -> None:
        self._parts.extend(other._parts)

    def result(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted distinct codes and their counts."""
        if not self._parts:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        codes = np.concatenate([u for u, _ in self._parts])
        counts = np.concatenate([c for _, c in self._parts])
        u, inv = np.unique(codes, return_inverse=True)
        out = np.zeros(len(u), dtype=np.int64)
        np.add.at(out, inv, counts)
        self._parts = [(u, out)]
        return u, out


def code_counts(codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sorted distinct codes and their counts."""
    return np.unique(np.asarray(codes, dtype=np.int64).ravel(), return_counts=True)


def coded_same_distribution(a: tuple[np.ndarray, np.ndarray], b: tuple[np.ndarray, np.ndarray]) -> bool:
    """Exact normalized equality of two (codes, counts) tables."""
    ka, ca = a
    kb, cb = b
    if ka.shape != kb.shape or not np.array_equal(ka, kb):
        return False
    ta, tb = int(ca.sum()), int(cb.sum())
    return all(x * tb == y * ta for x, y in zip(ca.tolist(), cb.tolist()))


def _split_pairs(codes: np.ndarray, counts: np.ndarray, radix_b: int):
    a, b = np.divmod(np.asarray(codes, dtype=np.int64), radix_b)
    ua, ia = np.unique(a, return_inverse=True)
    ub, ib = np.unique(b, return_inverse=True)
    ca = np.zeros(len(ua), dtype=np.int64)
    cb = np.zeros(len(ub), dtype=np.int64)
    np.add.at(ca, ia, counts)
    np.add.at(cb, ib, counts)
    return ua, ia, ca, ub, ib, cb


def pair_factorizes(codes: np.ndarray, counts: np.ndarray, radix_b: int, witness: bool = False):
    """Exact independence of A and B for a table over codes a * radix_b + b.

    Holds iff every pair in supp(A) x supp(B) occurs and
    count(a, b) * T == count(a) * count(b). With ``witness=True`` returns
    ``(ok, (a, b) or None)``.
    """
    counts = np.asarray(counts, dtype=np.int64)
    ua, ia, ca, ub, ib, cb = _split_pairs(codes, counts, radix_b)
    total = int(counts.sum())
    bad = None
    if len(codes) != len(ua) * len(ub):
        present = set(zip(ia.tolist(), ib.tolist()))
        for x in range(len(ua)):
            for y in range(len(ub)):
                if (x, y) not in present:
                    bad = (int(ua[x]), int(ub[y]))
                    break
            if bad:
                break
    else:
        lhs = counts.astype(object) * total
        rhs = ca.astype(object)[ia] * cb.astype(object)[ib]
        mism = np.nonzero(lhs != rhs)[0]
        if len(mism):
            j = int(mism[0])
            bad = (int(ua[ia[j]]), int(ub[ib[j]]))
    ok = bad is None
    return (ok, bad) if witness else ok


def pair_mutual_information(codes: np.ndarray, counts: np.ndarray, radix_b: int, base: int) -> EntropyValue:
    counts = np.asarray(counts, dtype=np.int64)
    if pair_factorizes(codes, counts, radix_b):
        return EntropyValue(mpmath.mpf(0), base, Fraction(0))
    _, _, ca, _, _, cb = _split_pairs(codes, counts, radix_b)
    ha = entropy_of_counts(ca, base)
    hb = entropy_of_counts(cb, base)
    hab = entropy_of_counts(counts, base)
    with mpmath.workdps(_DPS):
        return EntropyValue(ha.value + hb.value - hab.value, base)
