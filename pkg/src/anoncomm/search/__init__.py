"""Brute-force search over small scheme spaces.

Each space is cut into blocks (a fixed decoder, plus fixed share maps for
the general model) that are scored in one vectorized pass. Blocks are
grouped into a fixed number of chunks so that parallel runs and resumed
runs see the same partition.

Checkpoints are plain text, one completed candidate-index range per line
written as ``start-end`` (inclusive, decimal). Merged statistics of the
completed ranges live next to it in ``<checkpoint>.json``.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path

from .. import fp
from ..info import StateSpaceTooLarge, check_cap
from ..protocol import SchemeParams
from .census import CensusReport, forced_decoder_census
from .general import GeneralSpace
from .linear import LinearSpace
from .result import Partial, SearchResult

__all__ = [
    "CensusReport",
    "Partial",
    "SearchResult",
    "SearchSpaceUnsupported",
    "check_coded_randomness_necessity",
    "check_rate_infeasible",
    "coded_randomness_report",
    "count_full_rank_pairs",
    "forced_decoder_census",
    "make_space",
    "min_seed_dimension",
    "search",
]

MODELS = ("general", "linear")
N_CHUNKS = 64


class SearchSpaceUnsupported(StateSpaceTooLarge):
    """The requested space lies outside what the search enumerates."""

    def __init__(self, required: int, cap: int, reason: str):
        super().__init__(required, cap)
        self.reason = reason
        self.args = (f"{reason}; the space would hold about {required:.3e} candidates",)

    def __str__(self):
        return self.args[0]


def general_space_size(params: SchemeParams, seed_dim: int, share_dim: int | None = None) -> int:
    """Number of table-defined schemes: decoders x share maps x encoder pairs."""
    K, p, L, N = params.K, params.p, params.L, params.N
    d = L if share_dim is None else share_dim
    dec = p ** (L * p ** (K * N))
    shares = p ** (d * p**seed_dim * K)
    enc = p ** (N * p ** (L + d) * 2 * K)
    return dec * shares * enc


def make_space(model: str, params: SchemeParams, seed_dim: int, *, share_dim: int = 1, uncoded_only: bool = False):
    if model == "general":
        if (params.K, params.p, params.L, params.N) != (2, 2, 1, 1) or not 0 <= seed_dim <= 2:
            raise SearchSpaceUnsupported(
                general_space_size(params, max(seed_dim, 0)), 0,
                "general-model search is limited to K=2, p=2, L=N=1, seed_dim <= 2",
            )
        return GeneralSpace(params, seed_dim)
    if model == "linear":
        K, p = params.K, params.p
        if params.L != 1 or params.N != 1 or K > 3 or p not in (2, 3) or not 0 <= seed_dim <= K:
            d, s = share_dim, max(seed_dim, 0)
            size = p ** K * p ** (K * (1 + 2 * d * params.L)) * p ** (K * d * s)
            raise SearchSpaceUnsupported(
                size, 0, "linear-model search is limited to K <= 3, p in {2, 3}, L = N = 1, seed_dim <= K"
            )
        return LinearSpace(params, seed_dim, share_dim, uncoded_only)
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")


def _eval_range(space, lo: int, hi: int) -> Partial:
    part = Partial()
    for b in range(lo, hi):
        part = part.merge(space.eval_block(b))
    return part


def _chunks(n_blocks: int) -> list[tuple[int, int]]:
    step = max(1, math.ceil(n_blocks / N_CHUNKS))
    return [(lo, min(lo + step, n_blocks)) for lo in range(0, n_blocks, step)]


class _Checkpoint:
    def __init__(self, path: str | Path, space):
        self.path = Path(path)
        self.side = self.path.with_name(self.path.name + ".json")
        self.space = space
        self.header = {
            "model": space.model,
            "params": space.params.to_dict(),
            "seed_dim": space.seed_dim,
            "space_size": str(space.space_size),
            "share_dim": getattr(space, "share_dim", 1),
            "uncoded_only": getattr(space, "uncoded_only", False),
        }
        self.done: set[tuple[int, int]] = set()
        self.partial = Partial()
        if self.path.exists() and self.side.exists():
            doc = json.loads(self.side.read_text())
            if doc["header"] != self.header:
                raise ValueError(f"checkpoint {self.path} belongs to a different search")
            bs = space.block_size
            for line in self.path.read_text().split():
                a, b = (int(x) for x in line.split("-"))
                if a % bs or (b + 1) % bs:
                    raise ValueError(f"checkpoint range {line} is not block aligned")
                self.done.add((a // bs, (b + 1) // bs))
            self.partial = Partial.from_json(doc["partial"])

    def record(self, lo: int, hi: int, part: Partial) -> None:
        self.done.add((lo, hi))
        self.partial = self.partial.merge(part)
        bs = self.space.block_size
        lines = "".join(f"{a * bs}-{b * bs - 1}\n" for a, b in sorted(self.done))
        doc = {"header": self.header, "partial": self.partial.to_json()}
        for target, text in ((self.side, json.dumps(doc)), (self.path, lines)):
            tmp = target.with_name(target.name + ".tmp")
            tmp.write_text(text)
            os.replace(tmp, target)


def search(
    model: str,
    params: SchemeParams,
    seed_dim: int,
    stop_at_first: bool = False,
    *,
    workers: int = 1,
    cap: int | None = None,
    checkpoint: str | Path | None = None,
    share_dim: int = 1,
    uncoded_only: bool = False,
) -> SearchResult:
    """Enumerate a scheme space and keep candidates that are correct and anonymous.

    With stop_at_first the scan runs block by block in index order and stops
    after the first block holding a valid scheme, so ``visited`` covers only
    the blocks scanned.
    """
    space = make_space(model, params, seed_dim, share_dim=share_dim, uncoded_only=uncoded_only)
    check_cap(space.space_size, cap, f"{model} search space")
    start = time.perf_counter()
    ckpt = _Checkpoint(checkpoint, space) if checkpoint is not None else None
    total = ckpt.partial if ckpt else Partial()
    todo = [c for c in _chunks(space.n_blocks) if not (ckpt and c in ckpt.done)]
    complete = True

    if stop_at_first:
        done_any = total.valid > 0
        for lo, hi in todo:
            if done_any:
                complete = False
                break
            for b in range(lo, hi):
                part = space.eval_block(b)
                total = total.merge(part)
                if part.valid:
                    done_any = True
                    complete = b == space.n_blocks - 1
                    break
    elif workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = {pool.submit(_eval_range, space, lo, hi): (lo, hi) for lo, hi in todo}
            for fut in as_completed(futs):
                lo, hi = futs[fut]
                part = fut.result()
                if ckpt:
                    ckpt.record(lo, hi, part)
                total = total.merge(part)
    else:
        for lo, hi in todo:
            part = _eval_range(space, lo, hi)
            if ckpt:
                ckpt.record(lo, hi, part)
            total = total.merge(part)

    witness = space.scheme_at(total.first_index) if total.first_index is not None else None
    return SearchResult(
        model, params, seed_dim, space.space_size, total.visited, total.valid, witness,
        total.first_index, total.min_rho, total.min_eta, total.profiles,
        time.perf_counter() - start, complete, total.tags,
    )


def accepted_schemes(model: str, params: SchemeParams, seed_dim: int, **kw):
    """Yield (index, scheme) for every accepted candidate, in index order."""
    space = make_space(model, params, seed_dim, **kw)
    for b in range(space.n_blocks):
        yield from space.accepted_in_block(b)


def min_seed_dimension(model: str, params: SchemeParams, *, workers: int = 1, cap: int | None = None) -> int | None:
    """Smallest seed dimension with at least one valid scheme, or None within the supported range."""
    top = 2 if model == "general" else params.K
    for s in range(top + 1):
        if search(model, params, s, stop_at_first=True, workers=workers, cap=cap).valid_schemes_found:
            return s
    return None


def coded_randomness_report(params: SchemeParams, *, workers: int = 1) -> dict:
    """Accepted linear schemes at seed_dim K-1, split by whether every share is a raw seed symbol."""
    s = params.K - 1
    res = search("linear", params, s, workers=workers)
    uncoded = res.tags.get("uncoded", 0)
    doc = {
        "params": params.to_dict(),
        "seed_dim": s,
        "valid_schemes": res.valid_schemes_found,
        "uncoded_valid_schemes": uncoded,
        "coded_necessary": res.valid_schemes_found > 0 and uncoded == 0,
    }
    if params.K == 2:
        doc["note"] = (
            "with one seed symbol both shares are multiples of it, so unit-row "
            "shares already achieve the minimum and no coding is needed"
        )
    return doc


def check_coded_randomness_necessity(params: SchemeParams, *, workers: int = 1) -> bool:
    """True iff valid schemes exist at seed_dim K-1 and none of them uses only raw seed symbols as shares."""
    return coded_randomness_report(params, workers=workers)["coded_necessary"]


def count_full_rank_pairs(L: int, N: int, p: int, *, cap: int | None = 10**7) -> int:
    """Number of (G, V) with G in F_p^{L x N}, V in F_p^{N x L} and rank(G V) = L."""
    n = L * N
    check_cap(p ** (2 * n), cap, "coefficient pairs")
    count = 0
    for g in range(p**n):
        G = fp.Matrix(L, N, tuple(fp.decode_int(g, n, p)), p)
        for v in range(p**n):
            V = fp.Matrix(N, L, tuple(fp.decode_int(v, n, p)), p)
            if fp.rank(G @ V) == L:
                count += 1
    return count


def check_rate_infeasible(params: SchemeParams, model: str = "linear") -> bool:
    """True iff no linear scheme at these (K, L, N) can decode the desired message.

    For N < L every candidate (G_k, V_k) is enumerated; for L = N = 1 the
    linear search decides.
    """
    if model != "linear":
        raise ValueError("rate infeasibility is decided for the linear model only")
    if params.N < params.L:
        return count_full_rank_pairs(params.L, params.N, params.p) == 0
    if params.L == params.N == 1:
        return min_seed_dimension("linear", params) is None
    raise SearchSpaceUnsupported(0, 0, "feasibility with N >= L > 1 is outside the linear search")
