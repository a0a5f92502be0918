from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction


def _num(x):
    if x is None:
        return None
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return float(x)


def _parse_num(x):
    if x is None or isinstance(x, float):
        return x
    n, _, d = x.partition("/")
    return Fraction(int(n), int(d or 1))


def _lt(a, b) -> bool:
    return b is None or (a is not None and a < b)


@dataclass
class Partial:
    """Search statistics over a contiguous range of blocks; merges associatively."""

    visited: int = 0
    valid: int = 0
    first_index: int | None = None
    min_rho: Fraction | float | None = None
    min_eta: Fraction | float | None = None
    profiles: Counter = field(default_factory=Counter)
    tags: Counter = field(default_factory=Counter)

    def merge(self, other: Partial) -> Partial:
        first = self.first_index
        if other.first_index is not None and (first is None or other.first_index < first):
            first = other.first_index
        return Partial(
            self.visited + other.visited,
            self.valid + other.valid,
            first,
            other.min_rho if _lt(other.min_rho, self.min_rho) else self.min_rho,
            other.min_eta if _lt(other.min_eta, self.min_eta) else self.min_eta,
            self.profiles + other.profiles,
            self.tags + other.tags,
        )

    def note_valid(self, count: int, index: int, rho, eta, profile) -> None:
        if count <= 0:
            return
        self.valid += count
        if self.first_index is None or index < self.first_index:
            self.first_index = index
        if _lt(rho, self.min_rho):
            self.min_rho = rho
        if _lt(eta, self.min_eta):
            self.min_eta = eta
        self.profiles[profile] += count

    def to_json(self) -> dict:
        return {
            "visited": self.visited,
            "valid": self.valid,
            "first_index": self.first_index,
            "min_rho": _num(self.min_rho),
            "min_eta": _num(self.min_eta),
            "profiles": [[[_num(h) for h in k], v] for k, v in self.profiles.items()],
            "tags": dict(self.tags),
        }

    @classmethod
    def from_json(cls, doc: dict) -> Partial:
        return cls(
            doc["visited"],
            doc["valid"],
            doc["first_index"],
            _parse_num(doc["min_rho"]),
            _parse_num(doc["min_eta"]),
            Counter({tuple(_parse_num(h) for h in k): v for k, v in doc["profiles"]}),
            Counter(doc.get("tags", {})),
        )


@dataclass
class SearchResult:
    model: str
    params: object
    seed_dim: int
    space_size: int
    visited: int
    valid_schemes_found: int
    first_witness: object | None
    first_witness_index: int | None
    min_rho: Fraction | float | None
    min_eta: Fraction | float | None
    profiles: Counter
    elapsed: float
    complete: bool = True
    tags: Counter = field(default_factory=Counter)

    def __post_init__(self):
        if self.valid_schemes_found > self.space_size:
            raise ValueError("more valid schemes than candidates")

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": self.params.to_dict(),
            "seed_dim": self.seed_dim,
            "space_size": str(self.space_size),
            "visited": str(self.visited),
            "valid_schemes_found": str(self.valid_schemes_found),
            "complete": self.complete,
            "first_witness_index": None if self.first_witness_index is None else str(self.first_witness_index),
            "first_witness": None if self.first_witness is None else self.first_witness.to_json(),
            "min_rho": _num(self.min_rho),
            "min_eta": _num(self.min_eta),
            "share_profiles": [
                {"individual": [_num(h) for h in k[:-1]], "joint": _num(k[-1]), "count": str(v)}
                for k, v in sorted(self.profiles.items(), key=lambda kv: str(kv[0]))
            ],
            "tags": {k: str(v) for k, v in sorted(self.tags.items())},
            "units": {"min_rho": "p-ary-units per message symbol", "min_eta": "p-ary-units per message symbol"},
            "elapsed_seconds": round(self.elapsed, 6),
        }
