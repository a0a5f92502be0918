"""Exhaustive checks of the guarantees an anonymous scheme must provide.

Every check enumerates all (theta, seed, messages) points of the tabulated
scheme. Enumeration is vectorized over the K message axes and chunked over
seeds; partial count tables merge by summation so the result does not depend
on chunking. Verdicts come from integer comparisons only.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import mpmath
import numpy as np

from . import fp, info
from .info import DEFAULT_MAX_STATES, CodeCounter, check_cap
from .protocol import SchemeParams
from .schemes import BuiltinScheme, Scheme, Tables, builtin_or, nominal_states, tabulate

CHECK_NAMES = (
    "correctness",
    "anonymity",
    "security",
    "collusion",
    "transcript_uniform",
    "share_determinism",
    "decoder_latin",
)

_CHUNK_ELEMS = 1 << 22


@dataclass
class CheckReport:
    check_name: str
    params: SchemeParams
    verdict: str  # "pass" | "fail" | "skipped"
    witness: dict | None = None
    states: int = 0
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in ("pass", "fail", "skipped"):
            raise ValueError(f"bad verdict {self.verdict!r}")
        if self.verdict == "fail" and self.witness is None:
            raise ValueError("a failing report needs a witness")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "check_name": self.check_name,
            "params": self.params.to_dict(),
            "verdict": self.verdict,
            "witness": self.witness,
            "stats": {"states": int(self.states), "seconds": round(self.seconds, 6)},
            "details": self.details,
        }


class Enumerator:
    """Vectorized walk over every (seed, W_1..W_K) point for a given theta."""

    def __init__(self, scheme: Scheme, cap: int | None = DEFAULT_MAX_STATES):
        self.scheme = scheme
        self.tables: Tables = tabulate(scheme, cap)
        P = scheme.params
        self.params = P
        self.p, self.K, self.L, self.N = P.p, P.K, P.L, P.N
        self.M = self.p**self.L  # message alphabet
        self.Q = self.p**self.N  # signal alphabet
        self.nominal = nominal_states(P, scheme.seed_dim)
        self.per_theta = self.nominal // self.K
        self.weights = [self.Q ** (self.K - 1 - i) for i in range(self.K)]
        per_seed = self.M**self.K
        self.chunk = max(1, _CHUNK_ELEMS // per_seed)

    def seed_chunks(self):
        n = self.tables.n_seeds
        for start in range(0, n, self.chunk):
            yield start, min(n, start + self.chunk)

    def _axis_shape(self, rows: int, i: int) -> list[int]:
        shape = [rows] + [1] * self.K
        shape[i + 1] = self.M
        return shape

    def signals(self, k: int, lo: int, hi: int) -> np.ndarray:
        """X[s, i, w] for seeds lo..hi-1 when transmitter k (0-based) is desired."""
        t = self.tables
        out = np.empty((hi - lo, self.K, self.M), dtype=np.int64)
        for i in range(self.K):
            table = t.enc[i, int(i == k)]
            out[:, i, :] = table[:, t.shares[lo:hi, i]].T
        return out

    def transcripts(self, X: np.ndarray) -> np.ndarray:
        rows = X.shape[0]
        Y = np.zeros([rows] + [self.M] * self.K, dtype=np.int64)
        for i in range(self.K):
            Y += X[:, i, :].reshape(self._axis_shape(rows, i)) * self.weights[i]
        return Y

    def message_grid(self, i: int, rows: int) -> np.ndarray:
        return np.broadcast_to(np.arange(self.M).reshape(self._axis_shape(1, i)), [rows] + [self.M] * self.K)

    def share_grid(self, i: int, lo: int, hi: int) -> np.ndarray:
        z = self.tables.shares[lo:hi, i].reshape([hi - lo] + [1] * self.K)
        return np.broadcast_to(z, [hi - lo] + [self.M] * self.K)

    def point(self, k: int, lo: int, flat_index: int) -> dict:
        """Decode a flat grid position into a readable (seed, messages) record."""
        idx = np.unravel_index(flat_index, [self.chunk] + [self.M] * self.K)
        seed_code = lo + int(idx[0])
        p = self.p
        t = self.tables
        seed = fp.decode_int(seed_code, self.scheme.seed_dim, p)
        msgs = [fp.decode_int(int(w), self.L, p) for w in idx[1:]]
        shares = [fp.decode_int(int(t.shares[seed_code, i]), t.share_dim, p) for i in range(self.K)]
        signals = [
            fp.decode_int(int(t.enc[i, int(i == k), int(idx[1 + i]), t.shares[seed_code, i]]), self.N, p)
            for i in range(self.K)
        ]
        return {"theta": k + 1, "seed": seed, "messages": msgs, "shares": shares, "transcript": signals}

    def transcript_table(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        acc = CodeCounter()
        for lo, hi in self.seed_chunks():
            acc.add(self.transcripts(self.signals(k, lo, hi)))
        return acc.result()

    def split_transcript(self, code: int) -> list[list[int]]:
        flat = fp.decode_int(int(code), self.K * self.N, self.p)
        return [flat[i * self.N:(i + 1) * self.N] for i in range(self.K)]


def _enumerator(scheme: Scheme | None, params: SchemeParams | None, cap, enum: Enumerator | None) -> Enumerator:
    if enum is not None:
        return enum
    if scheme is None:
        if params is None:
            raise ValueError("need a scheme or parameters for the built-in scheme")
        scheme = BuiltinScheme(params)
    elif params is not None and params != scheme.params:
        raise ValueError(f"scheme parameters {scheme.params} differ from {params}")
    return Enumerator(scheme, cap)


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def check_correctness(scheme=None, params=None, *, cap=DEFAULT_MAX_STATES, enum=None) -> CheckReport:
    e = _enumerator(scheme, params, cap, enum)
    witness = None
    with _Timer() as tm:
        for k in range(e.K):
            for lo, hi in e.seed_chunks():
                Y = e.transcripts(e.signals(k, lo, hi))
                decoded = e.tables.dec[Y]
                bad = np.flatnonzero(decoded != e.message_grid(k, hi - lo))
                if len(bad):
                    j = int(bad[0])
                    witness = e.point(k, lo, j)
                    witness["decoded"] = fp.decode_int(int(decoded.ravel()[j]), e.L, e.p)
                    witness["expected"] = witness["messages"][k]
                    break
            if witness:
                break
    return CheckReport(
        "correctness",
        e.params,
        "fail" if witness else "pass",
        witness,
        e.nominal,
        tm.seconds,
        {"scheme": e.scheme.name},
    )


def check_anonymity(scheme=None, params=None, *, cap=DEFAULT_MAX_STATES, enum=None) -> CheckReport:
    e = _enumerator(scheme, params, cap, enum)
    witness = None
    supports = []
    with _Timer() as tm:
        ref = e.transcript_table(0)
        supports.append(len(ref[0]))
        for k in range(1, e.K):
            cur = e.transcript_table(k)
            supports.append(len(cur[0]))
            if not info.coded_same_distribution(ref, cur):
                witness = _table_difference(e, ref, cur, 0, k)
                break
    return CheckReport(
        "anonymity",
        e.params,
        "fail" if witness else "pass",
        witness,
        e.nominal,
        tm.seconds,
        {"scheme": e.scheme.name, "decoder_sha256": e.tables.decoder_hash(), "supports": supports},
    )


def _table_difference(e: Enumerator, a, b, ka: int, kb: int, decode=None) -> dict:
    da = dict(zip(a[0].tolist(), a[1].tolist()))
    db = dict(zip(b[0].tolist(), b[1].tolist()))
    ta, tb = sum(da.values()), sum(db.values())
    decode = decode or e.split_transcript
    for code in sorted(set(da) | set(db)):
        x, y = da.get(code, 0), db.get(code, 0)
        if x * tb != y * ta:
            return {
                "theta_pair": [ka + 1, kb + 1],
                "outcome": decode(code),
                "probabilities": [f"{x}/{ta}", f"{y}/{tb}"],
                "supports": [len(da), len(db)],
            }
    raise AssertionError("tables differ but no differing outcome found")


def check_transcript_uniform(scheme=None, params=None, *, cap=DEFAULT_MAX_STATES, enum=None) -> CheckReport:
    e = _enumerator(scheme, params, cap, enum)
    if e.N != e.L:
        return CheckReport(
            "transcript_uniform", e.params, "skipped", details={"reason": "scheme is not rate 1/K (N != L)"}
        )
    witness = None
    cells = e.Q**e.K
    with _Timer() as tm:
        for k in range(e.K):
            codes, counts = e.transcript_table(k)
            if len(codes) != cells or counts.min() != counts.max():
                witness = {
                    "theta": k + 1,
                    "support": int(len(codes)),
                    "expected_support": cells,
                    "min_count": int(counts.min()),
                    "max_count": int(counts.max()),
                }
                break
    return CheckReport(
        "transcript_uniform",
        e.params,
        "fail" if witness else "pass",
        witness,
        e.nominal,
        tm.seconds,
        {"scheme": e.scheme.name, "cells": cells},
    )


def _others_code(e: Enumerator, k: int, rows: int) -> np.ndarray:
    code = np.zeros([rows] + [e.M] * e.K, dtype=np.int64)
    for i in range(e.K):
        if i != k:
            code = code * e.M + e.message_grid(i, rows)
    return code


def check_security(scheme=None, params=None, *, cap=DEFAULT_MAX_STATES, enum=None) -> CheckReport:
    """The receiver may learn W_theta and nothing else about the messages.

    Exact test of I(transcript, W_theta ; all undesired messages) = 0 for
    every theta. For a correct scheme W_theta is a function of the transcript,
    so this is the same as I(transcript ; undesired messages) = 0; the plain
    quantity is reported alongside.
    """
    e = _enumerator(scheme, params, cap, enum)
    witness = None
    mi, mi_plain = [], []
    radix = e.M ** (e.K - 1)
    with _Timer() as tm:
        for k in range(e.K):
            acc = CodeCounter()
            plain = CodeCounter()
            for lo, hi in e.seed_chunks():
                rows = hi - lo
                Y = e.transcripts(e.signals(k, lo, hi))
                others = _others_code(e, k, rows)
                acc.add((Y * e.M + e.message_grid(k, rows)) * radix + others)
                plain.add(Y * radix + others)
            codes, counts = acc.result()
            ok, bad = info.pair_factorizes(codes, counts, radix, witness=True)
            val = info.pair_mutual_information(codes, counts, radix, e.p)
            mi.append(float(val))
            mi_plain.append(float(info.pair_mutual_information(*plain.result(), radix, e.p)))
            if not ok:
                others = [i for i in range(e.K) if i != k]
                yw, wcode = bad
                ycode, wk = divmod(yw, e.M)
                ws = []
                for _ in others:
                    wcode, w = divmod(wcode, e.M)
                    ws.append(w)
                ws.reverse()
                witness = {
                    "theta": k + 1,
                    "mutual_information": mpmath.nstr(val.value, 12),
                    "transcript": e.split_transcript(ycode),
                    "desired_message": fp.decode_int(wk, e.L, e.p),
                    "undesired_messages": {
                        str(i + 1): fp.decode_int(w, e.L, e.p) for i, w in zip(others, ws)
                    },
                }
                break
    return CheckReport(
        "security",
        e.params,
        "fail" if witness else "pass",
        witness,
        e.nominal,
        tm.seconds,
        {
            "scheme": e.scheme.name,
            "mutual_information": mi,
            "mutual_information_transcript_only": mi_plain,
            "units": "p-ary-units",
        },
    )


def check_collusion(
    scheme=None, params=None, colluders: Iterable[int] = (), *, cap=DEFAULT_MAX_STATES, enum=None
) -> CheckReport:
    """Colluders (1-based) pool their shares, messages and flags with the receiver.

    For every theta outside the coalition the joint view must have one and
    the same distribution.
    """
    e = _enumerator(scheme, params, cap, enum)
    coalition = sorted(set(int(c) for c in colluders))
    if any(not 1 <= c <= e.K for c in coalition):
        raise ValueError(f"colluder indices must lie in 1..{e.K}")
    if len(coalition) > e.K - 2:
        raise ValueError(f"at most K-2 = {e.K - 2} colluders are covered, got {len(coalition)}")
    cidx = [c - 1 for c in coalition]
    zr = e.p**e.tables.share_dim
    radix = (zr * e.M * 2) ** len(cidx)

    def view_codes(k, lo, hi):
        rows = hi - lo
        v = np.zeros([rows] + [e.M] * e.K, dtype=np.int64)
        for c in cidx:
            v = ((v * zr + e.share_grid(c, lo, hi)) * e.M + e.message_grid(c, rows)) * 2 + int(c == k)
        Y = e.transcripts(e.signals(k, lo, hi))
        return Y * radix + v

    def describe(code):
        y, v = divmod(code, radix)
        view = []
        for c in reversed(cidx):
            v, flag = divmod(v, 2)
            v, w = divmod(v, e.M)
            v, z = divmod(v, zr)
            view.append({"transmitter": c + 1, "share": fp.decode_int(z, e.tables.share_dim, e.p),
                         "message": fp.decode_int(w, e.L, e.p), "desired": bool(flag)})
        return {"transcript": e.split_transcript(y), "colluders": view[::-1]}

    outside = [k for k in range(e.K) if k not in cidx]
    witness = None
    with _Timer() as tm:
        tables = {}
        for k in outside:
            acc = CodeCounter()
            for lo, hi in e.seed_chunks():
                acc.add(view_codes(k, lo, hi))
            tables[k] = acc.result()
            ref = tables[outside[0]]
            if k != outside[0] and not info.coded_same_distribution(ref, tables[k]):
                witness = _table_difference(e, ref, tables[k], outside[0], k, decode=describe)
                break
    return CheckReport(
        "collusion",
        e.params,
        "fail" if witness else "pass",
        witness,
        e.nominal,
        tm.seconds,
        {"scheme": e.scheme.name, "colluders": coalition},
    )


def colluder_sets(K: int, max_size: int | None = None) -> list[tuple[int, ...]]:
    max_size = K - 2 if max_size is None else min(max_size, K - 2)
    out = []
    for r in range(0, max_size + 1):
        out.extend(itertools.combinations(range(1, K + 1), r))
    return out


def check_share_determinism(scheme=None, params=None, *, cap=DEFAULT_MAX_STATES, enum=None) -> CheckReport:
    """Given all shares, every undesired signal must be a constant."""
    e = _enumerator(scheme, params, cap, enum)
    t = e.tables
    zr = e.p**t.share_dim
    share_tuple = np.zeros(t.n_seeds, dtype=np.int64)
    for i in range(e.K):
        share_tuple = share_tuple * zr + t.shares[:, i]
    witness = None
    with _Timer() as tm:
        for k in range(e.K):
            for i in range(e.K):
                if i == k:
                    continue
                # signal of i over (seed, w_i) pairs, keyed by the full share tuple
                x = t.enc[i, 0][:, t.shares[:, i]].T  # (seeds, M)
                keys = np.repeat(share_tuple, e.M)
                pairs = keys * e.Q + x.ravel()
                uniq = np.unique(pairs)
                tuples, nvals = np.unique(uniq // e.Q, return_counts=True)
                if nvals.max() > 1:
                    j = int(np.argmax(nvals > 1))
                    key = int(tuples[j])
                    vals = (uniq[uniq // e.Q == key] % e.Q)[:2]
                    shares = []
                    for _ in range(e.K):
                        key, z = divmod(key, zr)
                        shares.append(fp.decode_int(z, t.share_dim, e.p))
                    witness = {
                        "theta": k + 1,
                        "transmitter": i + 1,
                        "shares": shares[::-1],
                        "signals": [fp.decode_int(int(v), e.N, e.p) for v in vals],
                    }
                    break
            if witness:
                break
    return CheckReport(
        "share_determinism",
        e.params,
        "fail" if witness else "pass",
        witness,
        e.nominal,
        tm.seconds,
        {"scheme": e.scheme.name},
    )


def latin_violation(dec: np.ndarray, p: int, K: int):
    """First (cell, axis) where changing one coordinate leaves the output unchanged."""
    g = np.asarray(dec).reshape([p] * K)
    for axis in range(K):
        srt = np.sort(g, axis=axis)
        dup = np.diff(srt, axis=axis) == 0
        if dup.any():
            idx = [int(v) for v in np.unravel_index(int(np.argmax(dup)), dup.shape)]
            vals = []
            for x in range(p):
                idx[axis] = x
                vals.append(int(g[tuple(idx)]))
            for a, b in itertools.combinations(range(p), 2):
                if vals[a] == vals[b]:
                    c1, c2 = list(idx), list(idx)
                    c1[axis], c2[axis] = a, b
                    return {"axis": axis + 1, "cells": [c1, c2], "value": vals[a]}
    return None


def is_latin(dec: np.ndarray, p: int, K: int) -> bool:
    return latin_violation(dec, p, K) is None


def matches_sum_table(dec: np.ndarray, p: int, K: int) -> bool:
    """g(y) == g(0) + y_1 + ... + y_K for every cell (the parity table when p = 2)."""
    g = np.asarray(dec).reshape([p] * K)
    total = sum(np.indices([p] * K))
    return bool(np.all(g == (total + g.flat[0]) % p))


def check_decoder_latin_structure(scheme=None, params=None, *, cap=DEFAULT_MAX_STATES, enum=None) -> CheckReport:
    e = _enumerator(scheme, params, cap, enum)
    if not (e.N == e.L == 1):
        return CheckReport(
            "decoder_latin", e.params, "skipped", details={"reason": "needs N = L = 1"}
        )
    with _Timer() as tm:
        bad = latin_violation(e.tables.dec, e.p, e.K)
    details = {
        "scheme": e.scheme.name,
        "table": [int(v) for v in e.tables.dec],
        "matches_sum_table": matches_sum_table(e.tables.dec, e.p, e.K),
        "constant_w": int(e.tables.dec[0]),
    }
    return CheckReport(
        "decoder_latin", e.params, "fail" if bad else "pass", bad, e.p**e.K, tm.seconds, details
    )


_DISPATCH = {
    "correctness": check_correctness,
    "anonymity": check_anonymity,
    "security": check_security,
    "transcript_uniform": check_transcript_uniform,
    "share_determinism": check_share_determinism,
    "decoder_latin": check_decoder_latin_structure,
}


def run_checks(
    scheme: Scheme | None = None,
    params: SchemeParams | None = None,
    names: Sequence[str] = CHECK_NAMES,
    *,
    cap: int | None = DEFAULT_MAX_STATES,
    colluders: Sequence[Sequence[int]] | None = None,
) -> list[CheckReport]:
    """Run several checks over one shared tabulation. ``collusion`` expands to
    every coalition of size <= K-2 unless ``colluders`` is given."""
    unknown = set(names) - set(CHECK_NAMES)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    e = _enumerator(scheme, params, cap, None)
    reports = []
    for name in CHECK_NAMES:
        if name not in names:
            continue
        if name == "collusion":
            sets = colluders if colluders is not None else colluder_sets(e.K)
            for c in sets:
                reports.append(check_collusion(colluders=c, enum=e))
        else:
            reports.append(_DISPATCH[name](enum=e))
    return reports


def share_metrics(scheme: Scheme | None = None, params: SchemeParams | None = None, *, cap=DEFAULT_MAX_STATES) -> dict:
    """Rate, H(Z_i)/L and H(Z_1..Z_K)/L of any scheme, from its share table over all seeds.

    Entropies are Fractions when exact (uniform over p^n outcomes), floats otherwise.
    """
    scheme = builtin_or(scheme, params)
    P = scheme.params
    check_cap(P.p ** scheme.seed_dim, cap, "seed space")
    shares = np.array(
        [[fp.encode_int(z, P.p) for z in scheme.shares(tuple(fp.decode_int(c, scheme.seed_dim, P.p)))]
         for c in range(P.p ** scheme.seed_dim)],
        dtype=np.int64,
    ).reshape(-1, P.K)
    table = info.DistTable.from_columns(*[shares[:, i] for i in range(P.K)])

    def norm(h):
        return h.exact / P.L if h.exact is not None else float(h.value) / P.L

    individual = [norm(info.entropy(table.marginal([i]), P.p)) for i in range(P.K)]
    return {"rate": P.rate, "rho": min(individual), "eta": norm(info.entropy(table, P.p)), "individual": individual}


def required_states(params: SchemeParams, seed_dim: int | None = None) -> int:
    if seed_dim is None:
        seed_dim = params.seed_len
    return nominal_states(params, seed_dim)


__all__ = [
    "CHECK_NAMES",
    "CheckReport",
    "Enumerator",
    "check_anonymity",
    "check_collusion",
    "check_correctness",
    "check_decoder_latin_structure",
    "check_security",
    "check_share_determinism",
    "check_transcript_uniform",
    "colluder_sets",
    "is_latin",
    "matches_sum_table",
    "run_checks",
    "share_metrics",
]

