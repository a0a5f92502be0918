"""Exhaustive search over table-defined schemes at K=2, p=2, L=N=1.

Candidate index layout (big-endian mixed radix)::

    index = ((g * n_share + f1 * n_map + f2) * 16**4) + enc
    enc   = ((e1d * 16 + e1u) * 16 + e2d) * 16 + e2u

where g is the decoder table over the 4 transcripts, f_i the share map of
transmitter i (a binary table over the 2**s seeds) and e_i{d,u} the desired
and undesired encoder tables over (w, z). All tables are bit strings read
big-endian, so table code c has entry j equal to digit j of c in base 2.

A (g, f1, f2) block is scored in one shot: correctness under theta=1 only
involves (e1d, e2u) and under theta=2 only (e1u, e2d), so the 65536
encoder combinations factor into two 16x16 grids joined on the transcript
distribution.
"""

from __future__ import annotations

from collections import defaultdict
from functools import lru_cache

import numpy as np

from .. import info
from ..fp import decode_int
from ..protocol import SchemeParams
from ..schemes import GeneralScheme
from .result import Partial

P = 2
N_TABLE = 16  # binary tables over (w, z) or over transcripts
N_ENC = N_TABLE ** 4
MAX_SEED_DIM = 2


def _tables(n_entries: int) -> np.ndarray:
    return np.array([decode_int(c, n_entries, P) for c in range(P ** n_entries)], dtype=np.int64)


ENC = _tables(4)  # ENC[e, w*2 + z]
DEC = _tables(4)  # DEC[g, x1*2 + x2]


class GeneralSpace:
    model = "general"

    def __init__(self, params: SchemeParams, seed_dim: int):
        if (params.K, params.p, params.L, params.N) != (2, 2, 1, 1):
            raise ValueError("general-model search is limited to K=2, p=2, L=N=1")
        if not 0 <= seed_dim <= MAX_SEED_DIM:
            raise ValueError(f"general-model search supports seed_dim 0..{MAX_SEED_DIM}, got {seed_dim}")
        self.params = params
        self.seed_dim = seed_dim
        self.n_seeds = P ** seed_dim
        self.n_map = P ** self.n_seeds
        self.n_share = self.n_map ** 2
        self.n_blocks = N_TABLE * self.n_share
        self.block_size = N_ENC
        self.space_size = self.n_blocks * self.block_size
        self.maps = _tables(self.n_seeds)

    def __reduce__(self):
        return GeneralSpace, (self.params, self.seed_dim)

    def split(self, index: int) -> tuple[int, int, int, tuple[int, int, int, int]]:
        block, enc = divmod(index, N_ENC)
        g, f = divmod(block, self.n_share)
        f1, f2 = divmod(f, self.n_map)
        return g, f1, f2, tuple(decode_int(enc, 4, N_TABLE))

    @lru_cache(maxsize=None)
    def _share_stats(self, f1: int, f2: int):
        z1, z2 = self.maps[f1], self.maps[f2]
        h1 = info.entropy_of_counts(np.bincount(z1, minlength=P), P)
        h2 = info.entropy_of_counts(np.bincount(z2, minlength=P), P)
        h12 = info.entropy_of_counts(np.bincount(z1 * P + z2, minlength=P * P), P)
        vals = tuple(h.exact if h.exact is not None else float(h.value) for h in (h1, h2, h12))
        return vals

    def _relation(self, g: int, za: np.ndarray, zb: np.ndarray, desired_first: bool):
        """For every (ea, eb) pair: is it correct, and its transcript histogram.

        ea encodes transmitter 1 and eb transmitter 2; the desired one is 1
        when desired_first, else 2.
        """
        w = np.arange(P)
        # x1[e, seed, w1], x2[e, seed, w2]
        x1 = ENC[:, w[None, :] * P + za[:, None]]
        x2 = ENC[:, w[None, :] * P + zb[:, None]]
        y = x1[:, None, :, :, None] * P + x2[None, :, :, None, :]  # (16, 16, S, w1, w2)
        out = DEC[g][y]
        target = w[None, None, None, :, None] if desired_first else w[None, None, None, None, :]
        ok = np.all(out == target, axis=(2, 3, 4))
        flat = y.reshape(N_TABLE, N_TABLE, -1)
        hist = np.stack([(flat == c).sum(axis=2) for c in range(P * P)], axis=2)
        return ok, hist

    def eval_block(self, block: int, stop_at_first: bool = False) -> Partial:
        g, f = divmod(block, self.n_share)
        f1, f2 = divmod(f, self.n_map)
        z1, z2 = self.maps[f1], self.maps[f2]
        ok1, hist1 = self._relation(g, z1, z2, True)    # (e1d, e2u)
        ok2, hist2 = self._relation(g, z1, z2, False)   # (e1u, e2d)
        part = Partial(visited=N_ENC)
        left = defaultdict(list)
        for e1d, e2u in zip(*np.nonzero(ok1)):
            left[tuple(hist1[e1d, e2u])].append((int(e1d), int(e2u)))
        if not left:
            return part
        right = defaultdict(list)
        for e1u, e2d in zip(*np.nonzero(ok2)):
            right[tuple(hist2[e1u, e2d])].append((int(e1u), int(e2d)))
        count, first = 0, None
        for key, a in left.items():
            b = right.get(key)
            if not b:
                continue
            count += len(a) * len(b)
            for e1d, e2u in a:
                for e1u, e2d in b:
                    enc = ((e1d * N_TABLE + e1u) * N_TABLE + e2d) * N_TABLE + e2u
                    if first is None or enc < first:
                        first = enc
        if count:
            h1, h2, h12 = self._share_stats(f1, f2)
            part.note_valid(count, block * N_ENC + first, min(h1, h2), h12, (h1, h2, h12))
        return part

    def accepted_in_block(self, block: int):
        """Yield (index, scheme) for every accepted candidate of a block, in index order."""
        g, f = divmod(block, self.n_share)
        f1, f2 = divmod(f, self.n_map)
        z1, z2 = self.maps[f1], self.maps[f2]
        ok1, hist1 = self._relation(g, z1, z2, True)
        ok2, hist2 = self._relation(g, z1, z2, False)
        hits = []
        for e1d, e2u in zip(*np.nonzero(ok1)):
            for e1u, e2d in zip(*np.nonzero(ok2)):
                if np.array_equal(hist1[e1d, e2u], hist2[e1u, e2d]):
                    hits.append(((int(e1d) * N_TABLE + int(e1u)) * N_TABLE + int(e2d)) * N_TABLE + int(e2u))
        for enc in sorted(hits):
            idx = block * N_ENC + enc
            yield idx, self.scheme_at(idx)

    def scheme_at(self, index: int) -> GeneralScheme:
        g, f1, f2, (e1d, e1u, e2d, e2u) = self.split(index)
        share_maps = [list(map(int, self.maps[f1])), list(map(int, self.maps[f2]))]
        encoders = [
            (list(map(int, ENC[e1d])), list(map(int, ENC[e1u]))),
            (list(map(int, ENC[e2d])), list(map(int, ENC[e2u]))),
        ]
        return GeneralScheme(
            self.params, self.seed_dim, 1, share_maps, encoders, list(map(int, DEC[g])),
            name=f"general#{index}",
        )
