"""Arithmetic over small prime fields F_p and vectors/matrices of field symbols."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

SUPPORTED_PRIMES = (2, 3, 5, 7, 11, 13)


class FieldError(ValueError):
    pass


def check_prime(p: int) -> int:
    if p not in SUPPORTED_PRIMES:
        raise FieldError(f"unsupported modulus {p!r}; expected one of {SUPPORTED_PRIMES}")
    return p


@dataclass(frozen=True)
class FieldElement:
    value: int
    p: int

    def __post_init__(self):
        check_prime(self.p)
        if not 0 <= self.value < self.p:
            raise FieldError(f"{self.value} is not a residue mod {self.p}")

    def _same(self, other: FieldElement) -> None:
        if self.p != other.p:
            raise FieldError(f"modulus mismatch: {self.p} vs {other.p}")

    def __add__(self, other: FieldElement) -> FieldElement:
        self._same(other)
        return FieldElement((self.value + other.value) % self.p, self.p)

    def __sub__(self, other: FieldElement) -> FieldElement:
        self._same(other)
        return FieldElement((self.value - other.value) % self.p, self.p)

    def __mul__(self, other: FieldElement) -> FieldElement:
        self._same(other)
        return FieldElement(self.value * other.value % self.p, self.p)

    def __neg__(self) -> FieldElement:
        return FieldElement(-self.value % self.p, self.p)

    def inverse(self) -> FieldElement:
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse")
        return FieldElement(pow(self.value, -1, self.p), self.p)

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.p})"


def add(x: FieldElement, y: FieldElement) -> FieldElement:
    return x + y


@dataclass(frozen=True)
class SymbolVector:
    """Fixed-length vector over F_p. Residues are kept as plain ints."""

    values: tuple[int, ...]
    p: int

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        for v in self.values:
            if not 0 <= v < self.p:
                raise FieldError(f"{v} is not a residue mod {self.p}")

    @classmethod
    def of(cls, elems: Iterable[FieldElement]) -> SymbolVector:
        elems = list(elems)
        if not elems:
            raise FieldError("cannot infer modulus of an empty element list; use SymbolVector((), p)")
        p = elems[0].p
        if any(e.p != p for e in elems):
            raise FieldError("elements do not share one modulus")
        return cls(tuple(e.value for e in elems), p)

    @classmethod
    def zeros(cls, n: int, p: int) -> SymbolVector:
        return cls((0,) * n, p)

    @property
    def elems(self) -> list[FieldElement]:
        return [FieldElement(v, self.p) for v in self.values]

    @property
    def length(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __add__(self, other: SymbolVector) -> SymbolVector:
        return vec_add(self, other)

    def is_zero(self) -> bool:
        return not any(self.values)

    def code(self) -> int:
        """Big-endian base-p integer code of the vector."""
        c = 0
        for v in self.values:
            c = c * self.p + v
        return c

    @classmethod
    def from_code(cls, code: int, n: int, p: int) -> SymbolVector:
        return cls(tuple(decode_int(code, n, p)), p)


def vec_add(x: SymbolVector, y: SymbolVector) -> SymbolVector:
    if x.p != y.p:
        raise FieldError(f"modulus mismatch: {x.p} vs {y.p}")
    if len(x) != len(y):
        raise FieldError(f"length mismatch: {len(x)} vs {len(y)}")
    return SymbolVector(tuple((a + b) % x.p for a, b in zip(x.values, y.values)), x.p)


def vec_sum(vectors: Sequence[SymbolVector]) -> SymbolVector:
    if not vectors:
        raise FieldError("empty sum")
    total = vectors[0]
    for v in vectors[1:]:
        total = vec_add(total, v)
    return total


def scale(c: FieldElement, v: SymbolVector) -> SymbolVector:
    if c.p != v.p:
        raise FieldError(f"modulus mismatch: {c.p} vs {v.p}")
    return SymbolVector(tuple(c.value * a % v.p for a in v.values), v.p)


@dataclass(frozen=True)
class Matrix:
    """Row-major matrix over F_p stored as a flat residue tuple."""

    rows: int
    cols: int
    data: tuple[int, ...]
    p: int

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "data", tuple(int(v) for v in self.data))
        if self.rows < 0 or self.cols < 0 or len(self.data) != self.rows * self.cols:
            raise FieldError(f"{len(self.data)} entries do not fill a {self.rows}x{self.cols} matrix")
        for v in self.data:
            if not 0 <= v < self.p:
                raise FieldError(f"{v} is not a residue mod {self.p}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], p: int, cols: int | None = None) -> Matrix:
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise FieldError("ragged rows")
        return cls(len(rows), cols, tuple(v for r in rows for v in r), p)

    @classmethod
    def identity(cls, n: int, p: int) -> Matrix:
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)), p)

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> Matrix:
        return cls(rows, cols, (0,) * (rows * cols), p)

    def row(self, i: int) -> tuple[int, ...]:
        return self.data[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.data[i * self.cols + j]

    def __matmul__(self, other: Matrix) -> Matrix:
        return mat_mul(self, other)


def mat_apply(m: Matrix, v: SymbolVector) -> SymbolVector:
    if m.p != v.p:
        raise FieldError(f"modulus mismatch: {m.p} vs {v.p}")
    if m.cols != len(v):
        raise FieldError(f"cannot apply {m.rows}x{m.cols} matrix to length-{len(v)} vector")
    p = m.p
    out = []
    for i in range(m.rows):
        r = m.row(i)
        out.append(sum(a * b for a, b in zip(r, v.values)) % p)
    return SymbolVector(tuple(out), p)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if a.p != b.p:
        raise FieldError(f"modulus mismatch: {a.p} vs {b.p}")
    if a.cols != b.rows:
        raise FieldError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    p = a.p
    data = []
    for i in range(a.rows):
        r = a.row(i)
        for j in range(b.cols):
            data.append(sum(r[t] * b.data[t * b.cols + j] for t in range(a.cols)) % p)
    return Matrix(a.rows, b.cols, tuple(data), p)


def rank_rows(rows: Sequence[Sequence[int]], p: int) -> int:
    """Rank of a list of residue rows over F_p (Gaussian elimination)."""
    m = [[v % p for v in r] for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(m)) if m[r][col]), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = pow(m[rank][col], -1, p)
        m[rank] = [v * inv % p for v in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][col]:
                f = m[r][col]
                m[r] = [(a - f * b) % p for a, b in zip(m[r], m[rank])]
        rank += 1
        if rank == len(m):
            break
    return rank


def rank(m: Matrix) -> int:
    return rank_rows(m.to_rows(), m.p)


def decode_int(code: int, n: int, p: int) -> list[int]:
    """Digits of ``code`` in base p, most significant first, padded to n."""
    out = [0] * n
    for i in range(n - 1, -1, -1):
        code, out[i] = divmod(code, p)
    if code:
        raise FieldError(f"code does not fit in {n} base-{p} digits")
    return out


def encode_int(digits: Sequence[int], p: int) -> int:
    c = 0
    for d in digits:
        c = c * p + d
    return c
