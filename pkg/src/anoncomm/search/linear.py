"""Exhaustive search over linear schemes with L = N = 1.

Each transmitter i holds a share Z_i = M_i S (M_i is d x s over F_p, S the
uniform seed) and sends

    X_i = Vd_i W_i + Ud_i Z_i   when desired,
    X_i =            Uu_i Z_i   otherwise,

so undesired messages never enter the signal. The receiver outputs
sum_i G_i X_i.

Candidate index layout (big-endian mixed radix)::

    index = (G * n_enc + enc) * n_mix + mix

G packs (G_1..G_K); enc packs, transmitter-major, (Vd_i, Ud_i, Uu_i); mix
is the position of (M_1..M_K) in the product of allowed mixing blocks
(all d x s matrices, or only those whose rows are unit vectors when the
space is restricted to uncoded shares).

Correctness in theta=k reads G_k Vd_k = 1 and sum_i G_i U_i^{(k)} M_i = 0.
With W and S uniform, the theta=k transcript is uniform on the column span
of [e_k | E_k] where row i of E_k is U_i^{(k)} M_i, so anonymity is equality
of those spans across k.
"""

from __future__ import annotations

import itertools
from collections import Counter

import numpy as np

from .. import fp, info
from ..protocol import SchemeParams
from ..schemes import LinearScheme
from .result import Partial

MAX_K = 3
PRIMES = (2, 3)


def _grid(p: int, n: int) -> np.ndarray:
    """All vectors of F_p^n in big-endian code order, shape (p**n, n)."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64)


def _is_unit(row) -> bool:
    return sum(1 for v in row if v) == 1 and max(row) == 1


class LinearSpace:
    model = "linear"

    def __init__(self, params: SchemeParams, seed_dim: int, share_dim: int = 1, uncoded_only: bool = False):
        K, p = params.K, params.p
        if params.L != 1 or params.N != 1 or K > MAX_K or p not in PRIMES:
            raise ValueError("linear-model search is limited to K <= 3, p in {2, 3}, L = N = 1")
        if not 0 <= seed_dim <= K:
            raise ValueError(f"linear-model search supports seed_dim 0..{K}, got {seed_dim}")
        if not 1 <= share_dim <= 2:
            raise ValueError("share_dim must be 1 or 2")
        self.params = params
        self.seed_dim = seed_dim
        self.share_dim = share_dim
        self.uncoded_only = uncoded_only
        d, s = share_dim, seed_dim
        self.n_enc = p ** (K * (1 + 2 * d))
        blocks = _grid(p, d * s).reshape(p ** (d * s), d, s)
        if uncoded_only:
            blocks = blocks[[all(_is_unit(r) for r in b) for b in blocks]]
        self.mix_blocks = blocks  # allowed M_i, shape (n_block, d, s)
        nb = len(blocks)
        self.n_mix = nb ** K
        self.n_blocks = p ** K
        self.block_size = self.n_enc * self.n_mix
        self.space_size = self.n_blocks * self.block_size
        self._mix_ids = _grid(nb, K) if nb else np.zeros((0, K), dtype=np.int64)
        self._pts = _grid(p, K)
        self._pw = p ** np.arange(K - 1, -1, -1)
        n = p**K
        codes = np.arange(n)
        self._sub = np.array(
            [[self._code((self._pts[x] - self._pts[y]) % p) for y in codes] for x in codes], dtype=np.int64
        )
        self._mul = np.array(
            [[self._code((a * self._pts[y]) % p) for y in codes] for a in range(p)], dtype=np.int64
        )
        self._cache: dict = {}

    def __reduce__(self):
        return LinearSpace, (self.params, self.seed_dim, self.share_dim, self.uncoded_only)

    def _code(self, v) -> int:
        return int(np.dot(v, self._pw))

    # -- index <-> scheme -------------------------------------------------

    def split(self, index: int):
        K, p, d = self.params.K, self.params.p, self.share_dim
        rest, mix = divmod(index, self.n_mix)
        g, enc = divmod(rest, self.n_enc)
        G = fp.decode_int(g, K, p)
        digits = fp.decode_int(enc, K * (1 + 2 * d), p)
        per = 1 + 2 * d
        V, Ud, Uu = [], [], []
        for i in range(K):
            chunk = digits[i * per:(i + 1) * per]
            V.append(chunk[0])
            Ud.append(tuple(chunk[1:1 + d]))
            Uu.append(tuple(chunk[1 + d:]))
        M = [self.mix_blocks[j] for j in self._mix_ids[mix]]
        return G, V, Ud, Uu, M

    def enc_code(self, V, Ud, Uu) -> int:
        digits = []
        for i in range(self.params.K):
            digits += [V[i], *Ud[i], *Uu[i]]
        return fp.encode_int(digits, self.params.p)

    def scheme_at(self, index: int) -> LinearScheme:
        G, V, Ud, Uu, M = self.split(index)
        K, d, s = self.params.K, self.share_dim, self.seed_dim
        p = self.params.p
        mixing = [fp.Matrix.from_rows([list(map(int, r)) for r in M[i]], p, cols=s) for i in range(K)]
        Vm = [(fp.Matrix.from_rows([[V[i]]], p), fp.Matrix.zeros(1, 1, p)) for i in range(K)]
        Um = [(fp.Matrix.from_rows([list(Ud[i])], p), fp.Matrix.from_rows([list(Uu[i])], p)) for i in range(K)]
        Gm = [fp.Matrix.from_rows([[G[i]]], p) for i in range(K)]
        return LinearScheme(self.params, s, d, mixing, Vm, Um, Gm, name=f"linear#{index}")

    # -- share statistics ---------------------------------------------------

    def share_stats(self, mix_ids: tuple[int, ...]):
        """(H(Z_1), ..., H(Z_K), H(Z_1..Z_K)) in p-ary units, plus structure tags."""
        hit = self._cache.get(mix_ids)
        if hit is not None:
            return hit
        p, K, d, s = self.params.p, self.params.K, self.share_dim, self.seed_dim
        M = np.stack([self.mix_blocks[j] for j in mix_ids])  # (K, d, s)
        seeds = _grid(p, s)  # (S, s)
        Z = np.einsum("kds,ns->nkd", M, seeds) % p  # (S, K, d)
        zc = (Z * (p ** np.arange(d - 1, -1, -1))).sum(axis=2)  # share codes (S, K)
        table = info.DistTable.from_columns(*[zc[:, i] for i in range(K)])
        hs = [info.entropy(table.marginal([i]), p) for i in range(K)]
        hj = info.entropy(table, p)
        key = tuple(h.exact if h.exact is not None else float(h.value) for h in (*hs, hj))
        tags = []
        if all(_is_unit(r) for blk in M for r in blk):
            tags.append("uncoded")
        if d == 1:
            rows = M[:, 0, :]
            for c in itertools.product(range(1, p), repeat=K):
                if not np.any(np.dot(c, rows) % p):
                    tags.append("full_support_dependency")
                    break
        out = (key, tuple(tags))
        self._cache[mix_ids] = out
        return out

    # -- block evaluation ---------------------------------------------------

    def _span_masks(self, first: int, cols: np.ndarray) -> np.ndarray:
        """Bool masks (n, p**K) of span(e_first, cols[n, :, j] for each j)."""
        p, K = self.params.p, self.params.K
        n = cols.shape[0]
        size = p**K
        mask = np.zeros((n, size), dtype=bool)
        mask[:, 0] = True
        rows = np.arange(n)[:, None]
        pts = np.arange(size)[None, :]
        unit = np.zeros(K, dtype=np.int64)
        unit[first] = 1
        vecs = [np.full(n, self._code(unit))] + [cols[:, :, j] @ self._pw for j in range(cols.shape[2])]
        for c in vecs:
            new = mask.copy()
            for a in range(1, p):
                shift = self._mul[a][c]  # (n,)
                new |= mask[rows, self._sub[pts, shift[:, None]]]
            mask = new
        return mask

    def _accepted(self, block: int):
        """Yield (enc_code, mix_index_array) groups of accepted candidates of block."""
        p, K, d = self.params.p, self.params.K, self.share_dim
        G = np.array(fp.decode_int(block, K, p), dtype=np.int64)
        if self.n_mix == 0 or np.any(G == 0):
            return
        V = [pow(int(g), -1, p) for g in G]
        Mall = self.mix_blocks[self._mix_ids]  # (n_mix, K, d, s)
        for ud_uu in itertools.product(range(p), repeat=2 * d * K):
            U = np.array(ud_uu, dtype=np.int64).reshape(K, 2, d)  # [i, desired?0:1, :]
            Ud, Uu = U[:, 0, :], U[:, 1, :]
            # E[k][m, i, :] = U_i^{(k)} M_i
            Ed = np.einsum("id,mids->mis", Ud, Mall) % p
            Eu = np.einsum("id,mids->mis", Uu, Mall) % p
            ok = np.ones(self.n_mix, dtype=bool)
            Es = []
            for k in range(K):
                Ek = Eu.copy()
                Ek[:, k, :] = Ed[:, k, :]
                Es.append(Ek)
                ok &= ~np.any(np.einsum("i,mis->ms", G, Ek) % p, axis=1)
            idx = np.nonzero(ok)[0]
            if idx.size == 0:
                continue
            ref = self._span_masks(0, Es[0][idx])
            good = np.ones(idx.size, dtype=bool)
            for k in range(1, K):
                good &= np.all(self._span_masks(k, Es[k][idx]) == ref, axis=1)
            idx = idx[good]
            if idx.size:
                enc = self.enc_code(V, [tuple(r) for r in Ud.tolist()], [tuple(r) for r in Uu.tolist()])
                yield enc, idx

    def eval_block(self, block: int, stop_at_first: bool = False) -> Partial:
        part = Partial(visited=self.block_size)
        base = block * self.block_size
        tags = Counter()
        for enc, idx in self._accepted(block):
            groups = Counter()
            for m in idx:
                groups[tuple(int(v) for v in self._mix_ids[m])] += 1
            first = base + enc * self.n_mix + int(idx[0])
            for mix_ids, n in groups.items():
                key, t = self.share_stats(mix_ids)
                part.note_valid(n, first, min(key[:-1]), key[-1], key)
                for tag in t:
                    tags[tag] += n
        part.tags = tags
        return part

    def accepted_in_block(self, block: int):
        base = block * self.block_size
        hits = []
        for enc, idx in self._accepted(block):
            hits.extend(base + enc * self.n_mix + int(m) for m in idx)
        for index in sorted(hits):
            yield index, self.scheme_at(index)
