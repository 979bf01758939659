"""Exact linear algebra over the prime field Z_p.

Everything here is integer arithmetic; matrices are immutable tuples of rows.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

MAX_MODULUS = 2**31


class FieldError(ValueError):
    """Bad modulus, out-of-range entry or dimension mismatch."""


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def check_modulus(p: int) -> int:
    if not isinstance(p, int) or isinstance(p, bool):
        raise FieldError(f"modulus must be an integer, got {p!r}")
    if p >= MAX_MODULUS or not is_prime(p):
        raise FieldError(f"modulus {p} is not a prime below 2^31")
    return p


def inv(a: int, p: int) -> int:
    return pow(a, -1, p)


@dataclass(frozen=True)
class FieldMatrix:
    """A d x e matrix over Z_p. ``d`` may be zero; ``e`` must be positive."""

    p: int
    rows: tuple[tuple[int, ...], ...]
    cols: int

    def __post_init__(self):
        check_modulus(self.p)
        if self.cols < 1:
            raise FieldError("matrix must have at least one column")
        for r in self.rows:
            if len(r) != self.cols:
                raise FieldError(f"row {r} has length {len(r)}, expected {self.cols}")
            for v in r:
                if not isinstance(v, int) or not 0 <= v < self.p:
                    raise FieldError(f"entry {v!r} not reduced mod {self.p}")

    @classmethod
    def from_rows(cls, p: int, rows: Iterable[Sequence[int]], cols: int | None = None) -> "FieldMatrix":
        rows = tuple(tuple(r) for r in rows)
        if cols is None:
            if not rows:
                raise FieldError("cannot infer column count of an empty matrix")
            cols = len(rows[0])
        return cls(p, rows, cols)

    @property
    def d(self) -> int:
        return len(self.rows)

    @property
    def e(self) -> int:
        return self.cols

    def transpose(self) -> "FieldMatrix":
        if not self.rows:
            raise FieldError("transpose of a matrix with no rows has no columns")
        return FieldMatrix(self.p, tuple(zip(*self.rows)), self.d)

    def select(self, indices: Iterable[int]) -> "FieldMatrix":
        """Sub-matrix of the given 0-based row indices."""
        return FieldMatrix(self.p, tuple(self.rows[i] for i in indices), self.cols)


def rref_rank(m: FieldMatrix) -> tuple[FieldMatrix, int]:
    """Reduced row-echelon form of ``m`` and its rank."""
    p = m.p
    a = [list(r) for r in m.rows]
    rank = 0
    for c in range(m.cols):
        pivot = next((i for i in range(rank, len(a)) if a[i][c]), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        s = inv(a[rank][c], p)
        a[rank] = [(v * s) % p for v in a[rank]]
        for i in range(len(a)):
            if i != rank and a[i][c]:
                f = a[i][c]
                a[i] = [(v - f * w) % p for v, w in zip(a[i], a[rank])]
        rank += 1
        if rank == len(a):
            break
    return FieldMatrix(p, tuple(tuple(r) for r in a), m.cols), rank


def rank(m: FieldMatrix) -> int:
    return rref_rank(m)[1]


class SpanChecker:
    """Incremental span-membership test.

    Rows are inserted one at a time into an echelon basis keyed by pivot
    column. ``steps`` counts vector-level reductions (one row update against
    one basis vector), which is the unit the owner-evaluation audit uses.
    """

    def __init__(self, p: int, cols: int):
        self.p = p
        self.cols = cols
        self.basis: dict[int, list[int]] = {}  # pivot column -> row with pivot 1
        self.steps = 0

    def _reduce(self, v: Sequence[int]) -> list[int]:
        p = self.p
        v = [x % p for x in v]
        for c in sorted(self.basis):
            if v[c]:
                f = v[c]
                b = self.basis[c]
                v = [(x - f * y) % p for x, y in zip(v, b)]
                self.steps += 1
        return v

    def add(self, row: Sequence[int]) -> bool:
        """Insert ``row``; return True if it enlarged the span."""
        if len(row) != self.cols:
            raise FieldError(f"row length {len(row)} != {self.cols}")
        v = self._reduce(row)
        c = next((i for i, x in enumerate(v) if x), None)
        if c is None:
            return False
        s = inv(v[c], self.p)
        self.basis[c] = [(x * s) % self.p for x in v]
        return True

    def contains(self, t: Sequence[int]) -> bool:
        if len(t) != self.cols:
            raise FieldError(f"vector length {len(t)} != {self.cols}")
        return not any(self._reduce(t))


def in_span(rows: FieldMatrix, t: Sequence[int]) -> bool:
    """True iff ``t`` is a Z_p-linear combination of ``rows``."""
    if len(t) != rows.cols:
        raise FieldError(f"target length {len(t)} does not match {rows.cols} columns")
    if any(not isinstance(v, int) or not 0 <= v < rows.p for v in t):
        raise FieldError(f"target {tuple(t)} not reduced mod {rows.p}")
    sc = SpanChecker(rows.p, rows.cols)
    for r in rows.rows:
        sc.add(r)
    return sc.contains(t)
