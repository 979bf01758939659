"""Span programs over Z_p and the monotone (indicator) decomposition.

A span program is a matrix ``M`` over Z_p, a labelling ``phi`` sending every
row to a pair ``(k, eps)`` with 1-based input index ``k``, and a nonzero
target vector. Input ``z`` activates row ``i`` when ``z[k] == eps``; the
program accepts when the target lies in the span of the activated rows.
"""
from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Sequence

from .zp import FieldError, FieldMatrix, SpanChecker, check_modulus, in_span

MAX_TABLE_INPUTS = 20
# decompose() re-checks its guarantees exhaustively up to this many msp inputs
MAX_CHECK_INPUTS = 15

Bits = tuple[int, ...]


class SpanProgramError(ValueError):
    pass


class DecompositionError(AssertionError):
    """A guarantee of the decomposition failed; always an implementation bug."""


@dataclass(frozen=True)
class SpanProgram:
    matrix: FieldMatrix
    phi: tuple[tuple[int, int], ...]
    target: tuple[int, ...]
    num_inputs: int

    def __post_init__(self):
        m = self.matrix
        if len(self.phi) != m.d:
            raise SpanProgramError(f"phi has {len(self.phi)} entries for {m.d} rows")
        if len(self.target) != m.e:
            raise SpanProgramError(f"target length {len(self.target)} != {m.e} columns")
        if any(not isinstance(v, int) or not 0 <= v < m.p for v in self.target):
            raise SpanProgramError(f"target {self.target} not reduced mod {m.p}")
        if not any(self.target):
            raise SpanProgramError("target vector must be nonzero")
        if self.num_inputs < 1:
            raise SpanProgramError("span program needs at least one input")
        for i, (k, eps) in enumerate(self.phi, 1):
            if not 1 <= k <= self.num_inputs:
                raise SpanProgramError(f"row {i} labelled with input {k}, outside 1..{self.num_inputs}")
            if eps not in (0, 1):
                raise SpanProgramError(f"row {i} has epsilon {eps}")

    @classmethod
    def build(cls, p: int, rows: Sequence[Sequence[int]], phi: Sequence[tuple[int, int]],
              target: Sequence[int], num_inputs: int | None = None) -> "SpanProgram":
        check_modulus(p)
        cols = len(target)
        matrix = FieldMatrix.from_rows(p, rows, cols)
        phi = tuple((int(k), int(e)) for k, e in phi)
        if num_inputs is None:
            num_inputs = max((k for k, _ in phi), default=1)
        sp = cls(matrix, phi, tuple(target), num_inputs)
        if matrix.e > matrix.d:
            warnings.warn(f"span program has more columns ({matrix.e}) than rows ({matrix.d})", stacklevel=2)
        return sp

    @property
    def p(self) -> int:
        return self.matrix.p

    @property
    def size(self) -> int:
        return self.matrix.d

    @property
    def is_monotone(self) -> bool:
        return all(eps == 1 for _, eps in self.phi)

    def rows_for_input(self, k: int) -> list[int]:
        """0-based indices of rows labelled with input ``k``."""
        return [i for i, (j, _) in enumerate(self.phi) if j == k]

    def share_dims(self) -> list[int]:
        """Rows per input; the share log-dimensions of the matching Smith code."""
        return [len(self.rows_for_input(k)) for k in range(1, self.num_inputs + 1)]

    def to_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "num_inputs": self.num_inputs,
            "target": list(self.target),
            "rows": [
                {"coeffs": list(r), "input": k, "epsilon": eps}
                for r, (k, eps) in zip(self.matrix.rows, self.phi)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SpanProgram":
        try:
            p = data["p"]
            target = data["target"]
            rows = data["rows"]
            n = data["num_inputs"]
            coeffs = [r["coeffs"] for r in rows]
            phi = [(r["input"], r["epsilon"]) for r in rows]
        except (KeyError, TypeError) as exc:
            raise SpanProgramError(f"malformed span program object: {exc}") from None
        try:
            return cls.build(p, coeffs, phi, target, n)
        except FieldError as exc:
            raise SpanProgramError(str(exc)) from None


def load_span_program(path) -> SpanProgram:
    with open(path) as fh:
        return SpanProgram.from_dict(json.load(fh))


def save_span_program(sp: SpanProgram, path) -> None:
    with open(path, "w") as fh:
        json.dump(sp.to_dict(), fh, indent=2)
        fh.write("\n")


def _check_input(sp: SpanProgram, z: Sequence[int]) -> None:
    if len(z) != sp.num_inputs:
        raise SpanProgramError(f"input has {len(z)} bits, program expects {sp.num_inputs}")
    if any(b not in (0, 1) for b in z):
        raise SpanProgramError(f"input {tuple(z)} is not a bit string")


def activated_rows(sp: SpanProgram, z: Sequence[int]) -> set[int]:
    """1-based indices of the rows switched on by ``z``."""
    _check_input(sp, z)
    return {i for i, (k, eps) in enumerate(sp.phi, 1) if z[k - 1] == eps}


def evaluate(sp: SpanProgram, z: Sequence[int]) -> int:
    rows = sorted(activated_rows(sp, z))
    sub = sp.matrix.select(i - 1 for i in rows)
    return int(in_span(sub, sp.target))


def evaluate_counted(sp: SpanProgram, z: Sequence[int]) -> tuple[int, int]:
    """Like :func:`evaluate`, also returning the number of reduction steps."""
    _check_input(sp, z)
    sc = SpanChecker(sp.p, sp.matrix.e)
    for r, (k, eps) in zip(sp.matrix.rows, sp.phi):
        if z[k - 1] == eps:
            sc.add(r)
    return int(sc.contains(sp.target)), sc.steps


def all_inputs(n: int):
    """Bit strings of length ``n`` in lexicographic order (first bit most significant)."""
    return itertools.product((0, 1), repeat=n)


def truth_table(sp: SpanProgram) -> tuple[int, ...]:
    if sp.num_inputs > MAX_TABLE_INPUTS:
        raise SpanProgramError(f"{sp.num_inputs} inputs exceeds the truth-table limit {MAX_TABLE_INPUTS}")
    return tuple(evaluate(sp, z) for z in all_inputs(sp.num_inputs))


@lru_cache(maxsize=1024)
def cached_table(sp: SpanProgram) -> tuple[int, ...]:
    """Memoized :func:`truth_table` for programs evaluated many times."""
    return truth_table(sp)


def table_index(z: Sequence[int]) -> int:
    idx = 0
    for b in z:
        idx = 2 * idx + b
    return idx


@dataclass(frozen=True)
class IndicatorCheck:
    valid: bool
    reason: str = ""  # "monotone" | "no-cloning" | ""
    witness: tuple[Bits, Bits] | None = None

    def __bool__(self):
        return self.valid

    def describe(self) -> str:
        if self.valid:
            return "valid indicator"
        a, b = ("".join(map(str, w)) for w in self.witness)
        if self.reason == "monotone":
            return f"not monotone: f({a})=1 but f({b})=0 with {a} <= {b}"
        return f"violates no-cloning: f({a})=1 and f({b})=1 for complementary inputs"


def check_indicator_validity(table: Sequence[int]) -> IndicatorCheck:
    """Monotonicity and no-cloning check, with a witness pair on failure."""
    size = len(table)
    n = size.bit_length() - 1
    if size < 1 or 1 << n != size:
        raise SpanProgramError(f"truth table length {size} is not a power of two")
    if n > MAX_TABLE_INPUTS:
        raise SpanProgramError(f"{n} inputs exceeds the truth-table limit {MAX_TABLE_INPUTS}")
    inputs = list(all_inputs(n))
    # scan from the top so the witness pairs the largest accepted input with its first rejecting superset
    for idx in range(size - 1, -1, -1):
        z = inputs[idx]
        if not table[idx]:
            continue
        for i in range(n):
            if z[i] == 0:
                up = z[:i] + (1,) + z[i + 1:]
                if not table[table_index(up)]:
                    return IndicatorCheck(False, "monotone", (z, up))
    full = size - 1
    for idx, z in enumerate(inputs):
        if table[idx] and table[full ^ idx]:
            return IndicatorCheck(False, "no-cloning", (z, inputs[full ^ idx]))
    return IndicatorCheck(True)


# -- library ------------------------------------------------------------------

def library_program(name: str) -> SpanProgram:
    name = name.upper()
    if name == "AND":
        return SpanProgram.build(2, [(1, 0), (0, 1)], [(1, 1), (2, 1)], (1, 1), 2)
    if name == "OR":
        return SpanProgram.build(2, [(1,), (1,)], [(1, 1), (2, 1)], (1,), 2)
    if name == "XOR":
        return SpanProgram.build(
            2, [(1, 0), (0, 1), (1, 0), (0, 1)], [(1, 1), (1, 0), (2, 1), (2, 0)], (1, 1), 2
        )
    if name == "MAJ3":
        # share i carries t + (i-1)s over Z_3; any two recover s
        return SpanProgram.build(3, [(1, 0), (1, 1), (1, 2)], [(1, 1), (2, 1), (3, 1)], (0, 1), 3)
    if name == "EQ2":
        return SpanProgram.build(
            2, [(1, 0), (0, 1), (0, 1), (1, 0)], [(1, 1), (1, 0), (2, 1), (2, 0)], (1, 1), 2
        )
    raise SpanProgramError(f"unknown library program {name!r}")


LIBRARY = ("AND", "OR", "XOR", "MAJ3", "EQ2")


def threshold23_program() -> SpanProgram:
    """Canonical monotone program of the 2-of-3 qutrit threshold code."""
    return library_program("MAJ3")


# -- decomposition ------------------------------------------------------------

@dataclass(frozen=True)
class DecompositionResult:
    msp: SpanProgram
    # for each msp input: (1-based index into (z, b), negated?)
    g_map: tuple[tuple[int, bool], ...]
    original_size: int
    msp_size: int

    @property
    def m(self) -> int:
        return (len(self.g_map) - 1) // 2

    def g(self, zb: Sequence[int]) -> Bits:
        return tuple((1 - zb[k - 1]) if neg else zb[k - 1] for k, neg in self.g_map)

    def to_dict(self) -> dict[str, Any]:
        return {
            "msp": self.msp.to_dict(),
            "g": [{"source": k, "negated": neg} for k, neg in self.g_map],
            "original_size": self.original_size,
            "msp_size": self.msp_size,
        }


def extend_with_and_bit(sp: SpanProgram) -> SpanProgram:
    """Program for f(z) AND b: one new row and column, new input b last."""
    m = sp.matrix
    rows = [tuple(r) + (0,) for r in m.rows]
    rows.append((0,) * m.e + (1,))
    phi = sp.phi + ((sp.num_inputs + 1, 1),)
    return SpanProgram(FieldMatrix(m.p, tuple(rows), m.e + 1), phi, sp.target + (1,), sp.num_inputs + 1)


def _check_and_bit(sp: SpanProgram) -> None:
    n, d, e = sp.num_inputs, sp.matrix.d, sp.matrix.e
    ok = (
        d >= 1 and e >= 2
        and sp.phi[-1] == (n, 1)
        and all(k != n for k, _ in sp.phi[:-1])
        and sp.matrix.rows[-1] == (0,) * (e - 1) + (1,)
        and all(r[-1] == 0 for r in sp.matrix.rows[:-1])
        and sp.target[-1] == 1
    )
    if not ok:
        raise SpanProgramError("program does not end with an AND bit (use extend_with_and_bit first)")


def monotonize(sp: SpanProgram) -> DecompositionResult:
    """Route negated literals to negated input copies so that every eps is 1.

    Input ``k <= m`` of ``sp`` becomes msp inputs ``2k-1`` (copy) and ``2k``
    (negated copy); the AND bit ``m+1`` becomes input ``2m+1``.
    """
    _check_and_bit(sp)
    m = sp.num_inputs - 1
    phi = []
    for k, eps in sp.phi:
        if k == m + 1:
            phi.append((2 * m + 1, 1))
        else:
            phi.append((2 * k - 1 if eps else 2 * k, 1))
    msp = SpanProgram(sp.matrix, tuple(phi), sp.target, 2 * m + 1)
    g_map = tuple(itertools.chain.from_iterable(((k, False), (k, True)) for k in range(1, m + 1)))
    g_map += ((m + 1, False),)
    return DecompositionResult(msp, g_map, sp.size - 1, msp.size)


def decompose(sp: SpanProgram) -> DecompositionResult:
    """f -> (f_I, g) with f(z) = f_I(g(z, 1)) and f_I a valid indicator."""
    ext = extend_with_and_bit(sp)
    res = monotonize(ext)
    res = DecompositionResult(res.msp, res.g_map, sp.size, res.msp.size)
    m = sp.num_inputs

    if res.msp_size != sp.size + 1:
        raise DecompositionError(f"msp size {res.msp_size} != {sp.size} + 1")
    if not res.msp.is_monotone:
        raise DecompositionError("decomposed program is not monotone")
    expect_g = tuple((k, neg) for k in range(1, m + 1) for neg in (False, True)) + ((m + 1, False),)
    if res.g_map != expect_g:
        raise DecompositionError("g is not copy-and-negate")
    if res.msp.num_inputs <= MAX_CHECK_INPUTS:
        for zb in all_inputs(m + 1):
            fprime = evaluate(ext, zb)
            if zb[-1] == 1 and fprime != evaluate(sp, zb[:-1]):
                raise DecompositionError(f"f'({zb}) differs from f on b=1")
            if fprime != evaluate(res.msp, res.g(zb)):
                raise DecompositionError(f"f' != f_I o g at {zb}")
        chk = check_indicator_validity(truth_table(res.msp))
        if not chk:
            raise DecompositionError(f"f_I is not a valid indicator: {chk.describe()}")
    return res
