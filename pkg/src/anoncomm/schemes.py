"""Scheme descriptions and their tabulated form.

A scheme is anything that provides, for fixed parameters,

* ``shares(seed)``: the K shares as a deterministic function of a uniform
  seed of ``seed_dim`` symbols,
* ``encode(i, desired, w, z)``: transmitter ``i``'s signal (N symbols) from its
  message, its share and its desire flag,
* ``decode(y)``: the receiver's theta-free map from the K signals to L symbols.

Transmitter indices are 0-based at this level. Vectors are tuples of ints and
are coded as big-endian base-p integers wherever tables are built.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import fp, protocol
from .fp import Matrix, SymbolVector
from .info import DEFAULT_MAX_STATES, check_cap
from .protocol import SchemeParams

Vec = tuple[int, ...]


class Scheme:
    model = "abstract"
    name = "scheme"
    params: SchemeParams
    seed_dim: int
    share_dim: int

    def shares(self, seed: Vec) -> tuple[Vec, ...]:
        raise NotImplementedError

    def encode(self, i: int, desired: bool, w: Vec, z: Vec) -> Vec:
        raise NotImplementedError

    def decode(self, y: tuple[Vec, ...]) -> Vec:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


class BuiltinScheme(Scheme):
    """Adapter exposing the protocol module's scheme through the table interface."""

    model = "builtin"

    def __init__(self, params: SchemeParams):
        protocol._require_builtin(params)
        self.params = params
        self.seed_dim = params.seed_len
        self.share_dim = params.L
        self.name = f"builtin(K={params.K},p={params.p},L={params.L})"

    def shares(self, seed):
        out = protocol.deal(self.params, protocol.make_seed(seed, self.params))
        return tuple(s.z.values for s in out)

    def encode(self, i, desired, w, z):
        p = self.params.p
        sig = protocol.encode(
            i + 1,
            protocol.DesireFlag(desired),
            protocol.Message(SymbolVector(w, p)),
            protocol.Share(i + 1, SymbolVector(z, p)),
        )
        return sig.values

    def decode(self, y):
        p = self.params.p
        t = protocol.Transcript(tuple(SymbolVector(s, p) for s in y))
        return protocol.decode(t).w.values

    def to_json(self):
        return {"model": "builtin", "name": self.name, **self.params.to_dict()}


class FunctionScheme(Scheme):
    """Scheme assembled from plain callables (used for mutants)."""

    model = "function"

    def __init__(self, params, seed_dim, share_dim, shares, encode, decode, name="function"):
        self.params = params
        self.seed_dim = seed_dim
        self.share_dim = share_dim
        self._shares, self._encode, self._decode = shares, encode, decode
        self.name = name

    def shares(self, seed):
        return tuple(tuple(z) for z in self._shares(seed))

    def encode(self, i, desired, w, z):
        return tuple(self._encode(i, desired, w, z))

    def decode(self, y):
        return tuple(self._decode(y))

    def to_json(self):
        return to_general(self).to_json()


@dataclass
class GeneralScheme(Scheme):
    """Fully tabulated scheme.

    share_maps[i][seed_code] -> share code of transmitter i
    encoders[i] = (desired, undesired); table[w_code * p**share_dim + z_code] -> signal code
    decoder[transcript_code] -> message code
    """

    params: SchemeParams
    seed_dim: int
    share_dim: int
    share_maps: list[tuple[int, ...]]
    encoders: list[tuple[tuple[int, ...], tuple[int, ...]]]
    decoder: tuple[int, ...]
    name: str = "general"
    model: str = field(default="general", init=False)

    def __post_init__(self):
        P = self.params
        p, K = P.p, P.K
        self.share_maps = [tuple(int(v) for v in m) for m in self.share_maps]
        self.encoders = [(tuple(int(v) for v in d), tuple(int(v) for v in u)) for d, u in self.encoders]
        self.decoder = tuple(int(v) for v in self.decoder)
        if len(self.share_maps) != K or len(self.encoders) != K:
            raise ValueError(f"need {K} share maps and encoder pairs")
        for m in self.share_maps:
            if len(m) != p**self.seed_dim or any(not 0 <= v < p**self.share_dim for v in m):
                raise ValueError("share map table has wrong size or range")
        for pair in self.encoders:
            for t in pair:
                if len(t) != p ** (P.L + self.share_dim) or any(not 0 <= v < p**P.N for v in t):
                    raise ValueError("encoder table has wrong size or range")
        if len(self.decoder) != p ** (K * P.N) or any(not 0 <= v < p**P.L for v in self.decoder):
            raise ValueError("decoder table has wrong size or range")

    def shares(self, seed):
        p = self.params.p
        c = fp.encode_int(seed, p)
        return tuple(tuple(fp.decode_int(m[c], self.share_dim, p)) for m in self.share_maps)

    def encode(self, i, desired, w, z):
        p = self.params.p
        t = self.encoders[i][0 if desired else 1]
        idx = fp.encode_int(w, p) * p**self.share_dim + fp.encode_int(z, p)
        return tuple(fp.decode_int(t[idx], self.params.N, p))

    def decode(self, y):
        p = self.params.p
        code = fp.encode_int([v for s in y for v in s], p)
        return tuple(fp.decode_int(self.decoder[code], self.params.L, p))

    def to_json(self):
        return {
            "model": "general",
            "name": self.name,
            **self.params.to_dict(),
            "seed_dim": self.seed_dim,
            "share_dim": self.share_dim,
            "share_maps": [list(m) for m in self.share_maps],
            "encoders": [{"desired": list(d), "undesired": list(u)} for d, u in self.encoders],
            "decoder": list(self.decoder),
        }


@dataclass
class LinearScheme(Scheme):
    """X_i = V_i W_i + U_i Z_i with Z_i = M_i S and decoder sum_i G_i X_i.

    mixing[i]: share_dim x seed_dim; V[i], U[i]: pairs (desired, undesired) of
    N x L and N x share_dim matrices; G[i]: L x N.
    """

    params: SchemeParams
    seed_dim: int
    share_dim: int
    mixing: list[Matrix]
    V: list[tuple[Matrix, Matrix]]
    U: list[tuple[Matrix, Matrix]]
    G: list[Matrix]
    name: str = "linear"
    model: str = field(default="linear", init=False)

    def __post_init__(self):
        P = self.params
        for i in range(P.K):
            m = self.mixing[i]
            if (m.rows, m.cols) != (self.share_dim, self.seed_dim):
                raise ValueError("mixing matrix has wrong shape")
            for v in self.V[i]:
                if (v.rows, v.cols) != (P.N, P.L):
                    raise ValueError("V matrix has wrong shape")
            for u in self.U[i]:
                if (u.rows, u.cols) != (P.N, self.share_dim):
                    raise ValueError("U matrix has wrong shape")
            if (self.G[i].rows, self.G[i].cols) != (P.L, P.N):
                raise ValueError("G matrix has wrong shape")

    def shares(self, seed):
        s = SymbolVector(seed, self.params.p)
        return tuple(fp.mat_apply(m, s).values for m in self.mixing)

    def encode(self, i, desired, w, z):
        p = self.params.p
        k = 0 if desired else 1
        a = fp.mat_apply(self.V[i][k], SymbolVector(w, p))
        b = fp.mat_apply(self.U[i][k], SymbolVector(z, p))
        return fp.vec_add(a, b).values

    def decode(self, y):
        p = self.params.p
        parts = [fp.mat_apply(g, SymbolVector(x, p)) for g, x in zip(self.G, y)]
        return fp.vec_sum(parts).values

    def to_json(self):
        return {
            "model": "linear",
            "name": self.name,
            **self.params.to_dict(),
            "seed_dim": self.seed_dim,
            "share_dim": self.share_dim,
            "mixing": [m.to_rows() for m in self.mixing],
            "encoders": [
                {
                    "V_desired": self.V[i][0].to_rows(),
                    "V_undesired": self.V[i][1].to_rows(),
                    "U_desired": self.U[i][0].to_rows(),
                    "U_undesired": self.U[i][1].to_rows(),
                }
                for i in range(self.params.K)
            ],
            "decoder": [g.to_rows() for g in self.G],
        }


# -- tabulation -----------------------------------------------------------------


@dataclass
class Tables:
    """Every map of a scheme evaluated on its whole (finite) domain."""

    params: SchemeParams
    seed_dim: int
    share_dim: int
    shares: np.ndarray  # (p**seed_dim, K) share codes
    enc: np.ndarray  # (K, 2, p**L, p**share_dim) signal codes; axis 1: 0 undesired, 1 desired
    dec: np.ndarray  # (p**(K*N),) message codes
    name: str = ""

    @property
    def n_seeds(self) -> int:
        return self.shares.shape[0]

    def decoder_hash(self) -> str:
        return hashlib.sha256(self.dec.astype(np.int64).tobytes()).hexdigest()


def nominal_states(params: SchemeParams, seed_dim: int) -> int:
    """K * p^seed_dim * p^(K L): every (theta, seed, messages) point."""
    return params.K * params.p**seed_dim * params.p ** (params.K * params.L)


def tabulate(scheme: Scheme, cap: int | None = DEFAULT_MAX_STATES) -> Tables:
    P = scheme.params
    p, K, L, N = P.p, P.K, P.L, P.N
    s, dz = scheme.seed_dim, scheme.share_dim
    check_cap(nominal_states(P, s), cap)
    check_cap(p ** (K * N) + p**s * K + 2 * K * p ** (L + dz), cap, "scheme tables")
    if isinstance(scheme, GeneralScheme):
        shares = np.array(scheme.share_maps, dtype=np.int64).T.copy()
        enc = np.zeros((K, 2, p**L, p**dz), dtype=np.int64)
        for i, (d, u) in enumerate(scheme.encoders):
            enc[i, 1] = np.array(d).reshape(p**L, p**dz)
            enc[i, 0] = np.array(u).reshape(p**L, p**dz)
        dec = np.array(scheme.decoder, dtype=np.int64)
        return Tables(P, s, dz, shares, enc, dec, scheme.name)

    shares = np.zeros((p**s, K), dtype=np.int64)
    for c in range(p**s):
        zs = scheme.shares(tuple(fp.decode_int(c, s, p)))
        if len(zs) != K:
            raise ValueError(f"share map returned {len(zs)} shares")
        for i, z in enumerate(zs):
            if len(z) != dz:
                raise ValueError(f"share of transmitter {i + 1} has length {len(z)}, expected {dz}")
            shares[c, i] = fp.encode_int(z, p)
    enc = np.zeros((K, 2, p**L, p**dz), dtype=np.int64)
    for i in range(K):
        for flag in (0, 1):
            for wc in range(p**L):
                w = tuple(fp.decode_int(wc, L, p))
                for zc in range(p**dz):
                    x = scheme.encode(i, bool(flag), w, tuple(fp.decode_int(zc, dz, p)))
                    if len(x) != N:
                        raise ValueError(f"signal has length {len(x)}, expected N={N}")
                    enc[i, flag, wc, zc] = fp.encode_int(x, p)
    dec = np.zeros(p ** (K * N), dtype=np.int64)
    for yc in range(p ** (K * N)):
        flat = fp.decode_int(yc, K * N, p)
        y = tuple(tuple(flat[j * N:(j + 1) * N]) for j in range(K))
        m = scheme.decode(y)
        if len(m) != L:
            raise ValueError(f"decoder output has length {len(m)}, expected L={L}")
        dec[yc] = fp.encode_int(m, p)
    return Tables(P, s, dz, shares, enc, dec, scheme.name)


def to_general(scheme: Scheme, name: str | None = None) -> GeneralScheme:
    t = tabulate(scheme, cap=None)
    K = scheme.params.K
    return GeneralScheme(
        scheme.params,
        t.seed_dim,
        t.share_dim,
        [tuple(t.shares[:, i].tolist()) for i in range(K)],
        [(tuple(t.enc[i, 1].ravel().tolist()), tuple(t.enc[i, 0].ravel().tolist())) for i in range(K)],
        tuple(t.dec.tolist()),
        name=name or scheme.name,
    )


# -- files ------------------------------------------------------------------------


def from_json(doc: dict) -> Scheme:
    params = SchemeParams(int(doc["K"]), int(doc["p"]), int(doc["L"]), int(doc.get("N", doc["L"])))
    model = doc.get("model")
    name = doc.get("name", model or "scheme")
    if model == "builtin":
        return BuiltinScheme(params)
    if model == "general":
        return GeneralScheme(
            params,
            int(doc["seed_dim"]),
            int(doc["share_dim"]),
            doc["share_maps"],
            [(e["desired"], e["undesired"]) for e in doc["encoders"]],
            doc["decoder"],
            name=name,
        )
    if model == "linear":
        p, s, dz = params.p, int(doc["seed_dim"]), int(doc["share_dim"])

        def mat(rows, r, c):
            return Matrix.from_rows(rows, p, cols=c) if rows else Matrix.zeros(r, c, p)

        enc = doc["encoders"]
        return LinearScheme(
            params,
            s,
            dz,
            [mat(m, dz, s) for m in doc["mixing"]],
            [(mat(e["V_desired"], params.N, params.L), mat(e["V_undesired"], params.N, params.L)) for e in enc],
            [(mat(e["U_desired"], params.N, dz), mat(e["U_undesired"], params.N, dz)) for e in enc],
            [mat(g, params.L, params.N) for g in doc["decoder"]],
            name=name,
        )
    raise ValueError(f"unknown scheme model {model!r}")


def load_scheme(path: str | Path) -> Scheme:
    return from_json(json.loads(Path(path).read_text()))


def dump_scheme(scheme: Scheme, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scheme.to_json(), indent=1) + "\n")


def builtin_or(scheme: Scheme | None, params: SchemeParams) -> Scheme:
    return BuiltinScheme(params) if scheme is None else scheme


def transcript_code(signals: Sequence[Vec], p: int) -> int:
    return fp.encode_int([v for s in signals for v in s], p)

