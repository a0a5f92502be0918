"""Census of decoders admitted by correct, anonymous table schemes (L = N = 1).

Every transmitter is allowed to see the whole seed, which is the largest
deterministic-share class at a given seed dimension: any share map
f_i(S) followed by an encoder is itself an encoder of (W_i, S). For a fixed
seed value v each transmitter then uses a pair of local maps F_p -> F_p
(desired, undesired), so a scheme is one "local combination" per seed value.

Correctness for every seed is correctness of every local combination.
Anonymity needs the theta=k transcript histograms, summed over seeds, to
agree for all k; equivalently the per-seed difference vectors
(D_1 - D_k)_{k>1} must sum to zero. Counting seed-indexed tuples with zero
sum is a convolution power over the multiset of difference vectors.
"""

from __future__ import annotations

import itertools
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .. import verify
from ..fp import decode_int
from ..info import DEFAULT_MAX_STATES, check_cap
from ..protocol import SchemeParams
from ..schemes import GeneralScheme


@dataclass
class CensusReport:
    params: SchemeParams
    seed_dim: int
    decoders_examined: int
    local_combinations: int
    space_size: int
    accepted: dict[tuple[int, ...], int]  # decoder table -> number of valid schemes
    witnesses: dict[tuple[int, ...], GeneralScheme] = field(repr=False)
    elapsed: float

    @property
    def all_latin(self) -> bool:
        p, K = self.params.p, self.params.K
        return all(verify.is_latin(np.array(g), p, K) for g in self.accepted)

    @property
    def all_match_sum_table(self) -> bool:
        p, K = self.params.p, self.params.K
        return all(verify.matches_sum_table(np.array(g), p, K) for g in self.accepted)

    @property
    def constants(self) -> list[int]:
        return sorted({g[0] for g in self.accepted})

    @property
    def addition_decoder_accepted(self) -> bool:
        p, K = self.params.p, self.params.K
        add = tuple(int(v) for v in (sum(np.indices([p] * K)) % p).ravel())
        return add in self.accepted

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "seed_dim": self.seed_dim,
            "decoders_examined": self.decoders_examined,
            "local_combinations": self.local_combinations,
            "space_size": str(self.space_size),
            "accepted_decoders": [
                {"table": list(g), "valid_schemes": str(n)} for g, n in sorted(self.accepted.items())
            ],
            "distinct_accepted_decoders": len(self.accepted),
            "valid_schemes_total": str(sum(self.accepted.values())),
            "all_latin": self.all_latin,
            "all_match_sum_table": self.all_match_sum_table,
            "constants_w": self.constants,
            "addition_decoder_accepted": self.addition_decoder_accepted,
            "elapsed_seconds": round(self.elapsed, 6),
        }


def _add(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def forced_decoder_census(
    params: SchemeParams, seed_dim: int | None = None, *, cap: int | None = DEFAULT_MAX_STATES
) -> CensusReport:
    K, p = params.K, params.p
    if params.L != 1 or params.N != 1:
        raise ValueError("the decoder census needs L = N = 1")
    s = K - 1 if seed_dim is None else seed_dim
    if s < 0:
        raise ValueError("seed_dim must be non-negative")
    n_fun = p**p
    n_local = n_fun ** (2 * K)
    n_dec = p ** (p**K)
    check_cap(n_dec * n_local * p**K, cap, "decoder census (decoders x local combinations x messages)")
    start = time.perf_counter()
    n_seeds = p**s

    fun = np.array([decode_int(c, p, p) for c in range(n_fun)], dtype=np.int64)  # fun[c, w]
    combos = np.array(list(itertools.product(range(n_fun), repeat=2 * K)), dtype=np.int64)  # (n_local, 2K)
    wgrid = np.array(list(itertools.product(range(p), repeat=K)), dtype=np.int64)  # (p^K, K)
    pw = p ** np.arange(K - 1, -1, -1)
    # y[k][c, w]: transcript code under theta=k for local combo c and messages w
    ys = []
    for k in range(K):
        sig = [fun[combos[:, i if i == k else K + i]][:, wgrid[:, i]] for i in range(K)]
        ys.append(sum(sig[i] * pw[i] for i in range(K)))
    n_cells = p**K
    hists = [np.stack([(y == c).sum(axis=1) for c in range(n_cells)], axis=1) for y in ys]
    diffs = np.concatenate([hists[0] - hists[k] for k in range(1, K)], axis=1)

    accepted: dict[tuple[int, ...], int] = {}
    witnesses: dict[tuple[int, ...], GeneralScheme] = {}
    for g in range(n_dec):
        table = np.array(decode_int(g, n_cells, p), dtype=np.int64)
        ok = np.ones(n_local, dtype=bool)
        for k in range(K):
            ok &= np.all(table[ys[k]] == wgrid[None, :, k], axis=1)
        good = np.nonzero(ok)[0]
        if good.size == 0:
            continue
        mult = Counter(tuple(int(v) for v in diffs[c]) for c in good)
        zero = (0,) * diffs.shape[1]
        layers = [Counter({zero: 1})]
        for _ in range(n_seeds):
            nxt = Counter()
            for a, na in layers[-1].items():
                for b, nb in mult.items():
                    nxt[_add(a, b)] += na * nb
            layers.append(nxt)
        count = layers[-1].get(zero, 0)
        if count:
            key = tuple(int(v) for v in table)
            accepted[key] = count
            witnesses[key] = _witness(params, s, key, good, diffs, layers, combos, fun)
    return CensusReport(
        params, s, n_dec, n_local, n_dec * n_local**n_seeds, accepted, witnesses, time.perf_counter() - start
    )


def _witness(params, s, decoder, good, diffs, layers, combos, fun) -> GeneralScheme:
    """Rebuild one valid scheme by walking the convolution layers backwards."""
    K, p = params.K, params.p
    n_seeds = p**s
    target = (0,) * diffs.shape[1]
    chosen = []
    for j in range(n_seeds, 0, -1):
        for c in good:
            rest = tuple(t - int(v) for t, v in zip(target, diffs[c]))
            if layers[j - 1].get(rest, 0):
                chosen.append(int(c))
                target = rest
                break
    chosen.reverse()  # chosen[v] is the local combination for seed code v
    encoders = []
    for i in range(K):
        tabs = []
        for slot in (i, K + i):  # desired, undesired
            tabs.append([int(fun[combos[chosen[v], slot], w]) for w in range(p) for v in range(n_seeds)])
        encoders.append(tuple(tabs))
    shares = [list(range(n_seeds)) for _ in range(K)]
    return GeneralScheme(params, s, s, shares, encoders, list(decoder), name="census-witness")
