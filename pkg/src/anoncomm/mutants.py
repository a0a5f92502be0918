"""Broken schemes that each violate one guarantee, with the check expected to catch it."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .protocol import SchemeParams
from .schemes import BuiltinScheme, FunctionScheme, Scheme, dump_scheme, to_general


def _add(p, a, b):
    return tuple((x + y) % p for x, y in zip(a, b))


def _sum(p, vecs, n):
    out = (0,) * n
    for v in vecs:
        out = _add(p, out, v)
    return out


def decoder_drops_last(params: SchemeParams) -> Scheme:
    """Receiver ignores X_K. Wrong whenever Z_K != 0 or theta = K."""
    base = BuiltinScheme(params)
    p, L = params.p, params.L
    return FunctionScheme(
        params, base.seed_dim, base.share_dim, base.shares, base.encode,
        lambda y: _sum(p, y[:-1], L), name="decoder_drops_last",
    )


def naive(params: SchemeParams) -> Scheme:
    """No randomness: the desired transmitter sends W in the clear, the rest send zeros."""
    p, L = params.p, params.L
    return FunctionScheme(
        params, 0, 0,
        lambda seed: [()] * params.K,
        lambda i, desired, w, z: w if desired else (0,) * L,
        lambda y: _sum(p, y, L),
        name="naive",
    )


def leaky(params: SchemeParams) -> Scheme:
    """Transmitter 2 adds W_2 to its signal even when it is not desired."""
    base = BuiltinScheme(params)
    p = params.p

    def enc(i, desired, w, z):
        x = base.encode(i, desired, w, z)
        return _add(p, x, w) if (i == 1 and not desired) else x

    return FunctionScheme(params, base.seed_dim, base.share_dim, base.shares, enc, base.decode, name="leaky")


def mixing(params: SchemeParams) -> Scheme:
    """Every undesired transmitter mixes its own message into its signal."""
    base = BuiltinScheme(params)
    p = params.p

    def enc(i, desired, w, z):
        return base.encode(i, desired, w, z) if desired else _add(p, z, w)

    return FunctionScheme(params, base.seed_dim, base.share_dim, base.shares, enc, base.decode, name="mixing")


def point_mass(params: SchemeParams) -> Scheme:
    """Everyone sends zeros and the receiver always outputs zeros."""
    L, N = params.L, params.N
    return FunctionScheme(
        params, 0, 0,
        lambda seed: [()] * params.K,
        lambda i, desired, w, z: (0,) * N,
        lambda y: (0,) * L,
        name="point_mass",
    )


def constant_decoder(params: SchemeParams) -> Scheme:
    base = BuiltinScheme(params)
    L = params.L
    return FunctionScheme(
        params, base.seed_dim, base.share_dim, base.shares, base.encode,
        lambda y: (0,) * L, name="constant_decoder",
    )


@dataclass(frozen=True)
class Mutant:
    factory: Callable[[SchemeParams], Scheme]
    fails: tuple[str, ...]
    note: str


CATALOG: dict[str, Mutant] = {
    "decoder_drops_last": Mutant(
        decoder_drops_last, ("correctness",),
        "correctness witness: any seed with a_1 + ... + a_{K-1} != 0 decodes to W_theta - Z_K",
    ),
    "naive": Mutant(
        naive, ("anonymity", "transcript_uniform", "collusion"),
        "anonymity witness: only coordinate theta of the transcript is ever nonzero",
    ),
    "leaky": Mutant(
        leaky, ("correctness", "security", "share_determinism"),
        "security witness: the sum of the transcript equals W_theta + W_2",
    ),
    "mixing": Mutant(
        mixing, ("correctness", "security", "share_determinism"),
        "share-determinism witness: fixed shares, two different undesired signals",
    ),
    "point_mass": Mutant(
        point_mass, ("correctness", "transcript_uniform"),
        "transcript-uniform witness: support of size 1",
    ),
    "constant_decoder": Mutant(
        constant_decoder, ("correctness", "decoder_latin"),
        "latin witness: two cells differing in one coordinate decode equally",
    ),
}


def build(name: str, params: SchemeParams) -> Scheme:
    return CATALOG[name].factory(params)


FIXTURE_PARAMS = SchemeParams(3, 2, 1)


def write_fixtures(directory: str | Path, params: SchemeParams = FIXTURE_PARAMS) -> list[Path]:
    """Serialize every mutant (and the built-in scheme) as general-model JSON."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name in CATALOG:
        path = directory / f"{name}.scheme"
        dump_scheme(to_general(build(name, params), name=name), path)
        out.append(path)
    path = directory / "builtin.scheme"
    dump_scheme(to_general(BuiltinScheme(params), name="builtin"), path)
    out.append(path)
    return out


if __name__ == "__main__":
    import sys

    for p in write_fixtures(sys.argv[1] if len(sys.argv) > 1 else "fixtures"):
        print(p)
