"""Compilers that emit protocol tapes."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import formula as fm
from .protocol import (
    LEFT,
    RIGHT,
    BitRef,
    CodeSpec,
    ProtocolTape,
    ShareRecord,
    TapeError,
    entanglement_cost,
    validate_and_build_tree,
)
from .span import (
    LIBRARY,
    SpanProgram,
    SpanProgramError,
    check_indicator_validity,
    decompose,
    library_program,
    truth_table,
)


class IndicatorError(ValueError):
    def __init__(self, check):
        super().__init__(check.describe())
        self.check = check


def compile_formula(f: fm.Formula | str, left_bits: int | None = None, right_bits: int | None = None) -> ProtocolTape:
    """Concatenated 2-of-3 qutrit codes following the formula's shape.

    AND keeps one share with the current holder, OR sends it across; the two
    remaining shares carry the subformulas. Leaves unit-route on their
    (possibly negated) variable.
    """
    if isinstance(f, str):
        f = fm.parse_formula(f)
    else:
        f = fm.normalize(f)
    nx, ny = fm.variables(f)
    left_bits = nx if left_bits is None else left_bits
    right_bits = ny if right_bits is None else right_bits
    records: list[ShareRecord] = []

    def emit(node, share: str, holder: int) -> None:
        if isinstance(node, fm.Var):
            records.append(ShareRecord.unit_route(share, BitRef(node.side, node.index, node.negated)))
            return
        spare, a, b = f"{share}.0", f"{share}.1", f"{share}.2"
        records.append(ShareRecord.encode(share, (spare, a, b), CodeSpec.threshold23()))
        if isinstance(node, fm.Or):
            records.append(ShareRecord.unit_route(spare, BitRef.const(1 - holder)))
        emit(node.left, a, holder)
        emit(node.right, b, holder)

    emit(f, "Q", LEFT)
    return ProtocolTape(3, left_bits, right_bits, "Q", 1, tuple(records))


def _share_names(n: int) -> list[str]:
    return [f"S{i}" for i in range(1, n + 1)]


def compile_theorem1_indicator(msp: SpanProgram, assignment: Sequence[BitRef],
                               left_bits: int | None = None, right_bits: int | None = None) -> ProtocolTape:
    """Single encoding of Q into the Smith code of ``msp``; share i routes on ``assignment[i]``."""
    if len(assignment) != msp.num_inputs:
        raise SpanProgramError(f"{len(assignment)} bits assigned for {msp.num_inputs} shares")
    chk = check_indicator_validity(truth_table(msp))
    if not chk:
        raise IndicatorError(chk)
    if not msp.is_monotone:
        raise SpanProgramError("indicator protocol needs a monotone span program (all epsilon = 1)")
    left_bits = max([b.index for b in assignment if b.side == "left"], default=0) if left_bits is None else left_bits
    right_bits = max([b.index for b in assignment if b.side == "right"], default=0) if right_bits is None else right_bits
    shares = _share_names(msp.num_inputs)
    records = [ShareRecord.encode("Q", shares, CodeSpec.smith(msp))]
    records += [ShareRecord.unit_route(s, b) for s, b in zip(shares, assignment)]
    return ProtocolTape(msp.p, left_bits, right_bits, "Q", 1, tuple(records))


def compile_theorem2(sp: SpanProgram, alpha_len: int, beta_len: int) -> ProtocolTape:
    """General protocol: decompose ``sp`` and route copies/negated copies of each bit.

    Program inputs ``1..alpha_len`` are x bits, the rest are y bits. The final
    share (the AND bit b = 1) is always sent to the right.
    """
    if alpha_len < 0 or beta_len < 0 or alpha_len + beta_len != sp.num_inputs:
        raise SpanProgramError(
            f"split {alpha_len}+{beta_len} does not match the program's {sp.num_inputs} inputs"
        )
    res = decompose(sp)
    bits = []
    for k, neg in res.g_map:
        if k == sp.num_inputs + 1:
            bits.append(BitRef.const(1))
        elif k <= alpha_len:
            bits.append(BitRef.left(k, neg))
        else:
            bits.append(BitRef.right(k - alpha_len, neg))
    shares = _share_names(res.msp.num_inputs)
    records = [ShareRecord.encode("Q", shares, CodeSpec.smith(res.msp))]
    records += [ShareRecord.unit_route(s, b) for s, b in zip(shares, bits)]
    return ProtocolTape(sp.p, alpha_len, beta_len, "Q", 1, tuple(records))


GH_PAIRS = {"AND": 2, "OR": 3}


def compile_garden_hose_example(f: str, x: int, y: int) -> ProtocolTape:
    """Per-input qubit tape for the two small garden-hose strategies.

    AND (pairs 1, 2): left Bell-measures Q with pair 1 iff x = 1; right
    measures the two right halves iff y = 0.
    OR (pairs 1, 2, 3): left Bell-measures Q with pair 3 if x = 1, else with
    pair 1; right measures the right halves of pairs 1 and 2 iff y = 0.
    Pairs that Q never passes through are recorded as spare.
    """
    f = f.upper()
    if f not in GH_PAIRS:
        raise TapeError(f"garden-hose example must be AND or OR, got {f!r}")
    if x not in (0, 1) or y not in (0, 1):
        raise TapeError("garden-hose inputs are single bits")
    recs: list[ShareRecord] = []
    if f == "AND":
        if x == 0:
            recs.append(ShareRecord.unit_route("Q", BitRef.const(0)))
        else:
            recs.append(ShareRecord.teleport("Q", "Q.p1", RIGHT))
            if y == 0:
                recs.append(ShareRecord.teleport("Q.p1", "Q.p2", LEFT))
    else:
        if x == 1:
            recs.append(ShareRecord.teleport("Q", "Q.p3", RIGHT))
        else:
            recs.append(ShareRecord.teleport("Q", "Q.p1", RIGHT))
            if y == 0:
                recs.append(ShareRecord.teleport("Q.p1", "Q.p2", LEFT))
    used = sum(1 for r in recs if r.kind == "teleport")
    tape = ProtocolTape(2, 1, 1, "Q", 1, tuple(recs), spare_pairs=GH_PAIRS[f] - used)
    validate_and_build_tree(tape)
    return tape


def parse_assignment(text: str) -> list[BitRef]:
    """Parse ``"x1,!y2,1"`` into bit references (``!`` negates; 0/1 are constants)."""
    out = []
    for tok in (t.strip() for t in text.split(",")):
        neg = tok.startswith("!")
        body = tok[1:] if neg else tok
        if body in ("0", "1") and not neg:
            out.append(BitRef.const(int(body)))
        elif len(body) > 1 and body[0] in "xy" and body[1:].isdigit():
            out.append(BitRef("left" if body[0] == "x" else "right", int(body[1:]), neg))
        else:
            raise ValueError(f"bad bit reference {tok!r} (use x<i>, y<i>, !x<i>, 0 or 1)")
    return out


# how each library program's inputs split between x and y, and an equivalent formula
LIBRARY_SPLITS = {"AND": (1, 1), "OR": (1, 1), "XOR": (1, 1), "MAJ3": (2, 1), "EQ2": (1, 1)}
LIBRARY_FORMULAS = {
    "AND": "AND(x1,y1)",
    "OR": "OR(x1,y1)",
    "XOR": "OR(AND(x1,NOT(y1)),AND(NOT(x1),y1))",
    "MAJ3": "OR(AND(x1,x2),AND(y1,OR(x1,x2)))",
    "EQ2": "OR(AND(x1,y1),AND(NOT(x1),NOT(y1)))",
}


@dataclass(frozen=True)
class BenchRow:
    name: str
    formula_size: int
    span_size: int
    msp_size: int
    e_theorem2: int
    e_formula: int
    e_garden_hose: int | None


def bench_library() -> list[BenchRow]:
    rows = []
    for name in LIBRARY:
        sp = library_program(name)
        left, right = LIBRARY_SPLITS[name]
        t2 = validate_and_build_tree(compile_theorem2(sp, left, right))
        f = fm.parse_formula(LIBRARY_FORMULAS[name])
        tf = validate_and_build_tree(compile_formula(f, left, right))
        gh = None
        if name in GH_PAIRS:
            gh = max(entanglement_cost(validate_and_build_tree(compile_garden_hose_example(name, x, y)))
                     for x in (0, 1) for y in (0, 1))
        rows.append(BenchRow(name, fm.size(f), sp.size, decompose(sp).msp_size,
                             entanglement_cost(t2), entanglement_cost(tf), gh))
    return rows
