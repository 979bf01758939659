"""Three ways to find the side on which Q ends up recoverable.

* :func:`get_owner` -- recursive span-program evaluation with an audit of the
  span-check work against the sum of squared code sizes.
* :func:`eval_modp` -- bottom-up accepting/rejecting path counts mod p.
* :func:`eval_depth_first` -- pruning evaluation that keeps only the current
  share and a small override map instead of a recursion stack.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

from .protocol import (
    ENCODE,
    TELEPORT,
    UNIT_ROUTE,
    BitRef,
    ProtocolTape,
    ProtocolTree,
    ShareRecord,
    TapeError,
    validate_and_build_tree,
)
from .span import SpanProgram, cached_table, evaluate_counted, table_index
from .zp import check_modulus

DEFAULT_FAN_IN_CAP = 16
DEFAULT_ARITY_BOUND = 3


class AuditError(AssertionError):
    pass


class FanInError(ValueError):
    pass


class ArityError(ValueError):
    pass


def _tree(tape: ProtocolTape | ProtocolTree) -> ProtocolTree:
    return tape if isinstance(tape, ProtocolTree) else validate_and_build_tree(tape)


def _leaf_side(tree: ProtocolTree, share: str, x, y) -> int | None:
    """Side of a terminal share, or None if the share is consumed by a teleport/encode."""
    rec = tree.record_for(share)
    if rec is None:
        return tree.holder[share]
    if rec.kind == UNIT_ROUTE:
        return rec.bit.resolve(x, y)
    return None


# -- GetOwner ---------------------------------------------------------------------

@dataclass
class OwnerAudit:
    steps: int = 0          # vector reductions spent in span checks
    bound: int = 0          # sum of n_tilde^2 over visited encodes
    encodes_visited: int = 0
    n_total: int = 0        # sum of n_tilde over visited encodes


def get_owner(tape: ProtocolTape | ProtocolTree, x: Sequence[int], y: Sequence[int]) -> tuple[int, OwnerAudit]:
    tree = _tree(tape)
    tree.check_inputs(x, y)
    audit = OwnerAudit()

    def owner(share: str) -> int:
        side = _leaf_side(tree, share, x, y)
        if side is not None:
            return side
        rec = tree.record_for(share)
        if rec.kind == TELEPORT:
            return owner(rec.outputs[0])
        sp = rec.code.program
        z = [owner(w) for w in rec.outputs]
        bit, steps = evaluate_counted(sp, z)
        n_tilde = sum(tree.log_dim[w] for w in rec.outputs)
        audit.steps += steps
        audit.bound += n_tilde**2
        audit.n_total += n_tilde
        audit.encodes_visited += 1
        return bit

    result = owner(tree.tape.root)
    if audit.steps > audit.bound:
        raise AuditError(f"span checks took {audit.steps} steps, above the bound {audit.bound}")
    return result, audit


def share_owners(tape: ProtocolTape | ProtocolTree, x: Sequence[int], y: Sequence[int]) -> dict[str, int]:
    """Side on which every share of the tree ends up recoverable."""
    tree = _tree(tape)
    tree.check_inputs(x, y)
    out: dict[str, int] = {}

    def visit(share: str) -> int:
        side = _leaf_side(tree, share, x, y)
        if side is None:
            rec = tree.record_for(share)
            z = [visit(w) for w in rec.outputs]
            side = z[0] if rec.kind == TELEPORT else cached_table(rec.code.program)[table_index(z)]
        out[share] = side
        return side

    visit(tree.tape.root)
    return out


# -- mod-p path counting ----------------------------------------------------------

def lemma3_transform(f0: int, f0bar: int, p: int) -> tuple[int, int]:
    """Normalize a machine's path counts so accepting = f and rejecting = 1 - f mod p.

    ``f0`` accepting paths become ``f0^(p-1)`` (Fermat: 1 iff f0 != 0 mod p);
    the rejecting count is ``1 + (p-1) F1 + p f0bar``.
    """
    check_modulus(p)
    if f0 < 0 or f0bar < 0:
        raise ValueError("path counts must be non-negative")
    f1 = pow(f0, p - 1, p)
    f2bar = (1 + (p - 1) * f1 + p * f0bar) % p
    return f1, f2bar


@lru_cache(maxsize=1024)
def _table_items(sp: SpanProgram) -> tuple[tuple[tuple[int, ...], int], ...]:
    return tuple(zip(itertools.product((0, 1), repeat=sp.num_inputs), cached_table(sp)))


def eval_modp(tape: ProtocolTape | ProtocolTree, x: Sequence[int], y: Sequence[int], p: int,
              fan_in_cap: int = DEFAULT_FAN_IN_CAP) -> int:
    """Owner side from path counts mod ``p``.

    Each node carries (accepting, rejecting) counts. An encode with indicator
    f composes its children's counts as
    ``sum_z f(z) * prod_j (acc_j if z_j else rej_j)``; teleports pass counts
    through unchanged.
    """
    check_modulus(p)
    tree = _tree(tape)
    tree.check_inputs(x, y)

    def counts(share: str) -> tuple[int, int]:
        side = _leaf_side(tree, share, x, y)
        if side is not None:
            return side, 1 - side
        rec = tree.record_for(share)
        if rec.kind == TELEPORT:
            return counts(rec.outputs[0])
        k = len(rec.outputs)
        if k > fan_in_cap:
            raise FanInError(f"encode of {share!r} has fan-in {k} above the cap {fan_in_cap}")
        child = [counts(w) for w in rec.outputs]
        acc = rej = 0
        for z, fz in _table_items(rec.code.program):
            w = 1
            for zj, (a, r) in zip(z, child):
                w = w * (a if zj else r) % p
            if fz:
                acc += w
            else:
                rej += w
        acc, rej = acc % p, rej % p
        if (acc + rej) % p != 1 % p:
            raise AuditError(f"path counts at {share!r} violate acc + rej = 1 mod {p}")
        return acc, rej

    acc, _ = counts(tree.tape.root)
    if acc not in (0, 1):
        raise AuditError(f"root accepting count {acc} mod {p} is not a bit")
    return acc


# -- depth-first pruning ------------------------------------------------------

@dataclass
class DepthFirstAudit:
    peak_r: int = 0
    prunes: int = 0
    descents: int = 0
    # identifiers held besides R at any moment; always 1 (the current share)
    retained_ids: int = 1
    r_history: list[int] = field(default_factory=list)


def _terminal(tree: ProtocolTree, share: str, R: dict[str, int]) -> str:
    """Follow teleports down from ``share`` (teleports are transparent)."""
    while share not in R:
        rec = tree.record_for(share)
        if rec is None or rec.kind != TELEPORT:
            break
        share = rec.outputs[0]
    return share


def _is_leaf(tree, share, R) -> bool:
    s = _terminal(tree, share, R)
    if s in R:
        return True
    rec = tree.record_for(s)
    return rec is None or rec.kind == UNIT_ROUTE


def _leaf_value(tree, share, R, x, y) -> int:
    s = _terminal(tree, share, R)
    if s in R:
        return R[s]
    return _leaf_side(tree, s, x, y)


def _effective_layer(tree, share, R) -> int:
    s = _terminal(tree, share, R)
    if s in R:
        return 0
    rec = tree.record_for(s)
    if rec is None or not rec.outputs:
        return 0
    return 1 + max(_effective_layer(tree, w, R) for w in rec.outputs)


def _encode_parent(tree: ProtocolTree, share: str) -> str | None:
    """Nearest ancestor share that is consumed by an encode, found by searching the tape."""
    u = tree.parent(share)
    while u is not None and tree.record_for(u).kind == TELEPORT:
        u = tree.parent(u)
    return u


def eval_depth_first(tape: ProtocolTape | ProtocolTree, x: Sequence[int], y: Sequence[int],
                     arity_bound: int = DEFAULT_ARITY_BOUND,
                     on_prune: Callable[[ProtocolTree, dict[str, int]], None] | None = None,
                     ) -> tuple[int, DepthFirstAudit]:
    """Evaluate by repeatedly pruning fully-leafed encodes into overrides.

    State between steps is the current share ``v`` and the override map ``R``
    (share -> resolved side). There is no recursion stack: moving up means
    searching the tape for the record that produced ``v``.
    """
    tree = _tree(tape)
    tree.check_inputs(x, y)
    for rec in tree.tape.records:
        if len(rec.outputs) > arity_bound:
            raise ArityError(f"encode of {rec.input!r} has {len(rec.outputs)} shares, bound is {arity_bound}")
    audit = DepthFirstAudit()
    R: dict[str, int] = {}

    v = _terminal(tree, tree.tape.root, R)
    if _is_leaf(tree, v, R):
        return _leaf_value(tree, v, R, x, y), audit
    while True:
        rec = tree.record_for(v)
        outs = rec.outputs
        if all(_is_leaf(tree, w, R) for w in outs):
            value = cached_table(rec.code.program)[table_index([_leaf_value(tree, w, R, x, y) for w in outs])]
            for w in outs:
                R.pop(_terminal(tree, w, R), None)
            R[v] = value
            audit.prunes += 1
            audit.peak_r = max(audit.peak_r, len(R))
            audit.r_history.append(len(R))
            if on_prune is not None:
                on_prune(tree, dict(R))
            up = _encode_parent(tree, v)
            if up is None:
                return value, audit
            v = up
        else:
            inner = [w for w in outs if not _is_leaf(tree, w, R)]
            w_star = max(inner, key=lambda w: _effective_layer(tree, w, R))
            v = _terminal(tree, w_star, R)
            audit.descents += 1


def effective_tape(tree: ProtocolTree, R: dict[str, int]) -> ProtocolTape:
    """The tape with every overridden share turned into a constant routing."""
    records: list[ShareRecord] = []
    stack = [tree.tape.root]
    while stack:
        s = stack.pop()
        if s in R:
            records.append(ShareRecord.unit_route(s, BitRef.const(R[s])))
            continue
        rec = tree.record_for(s)
        if rec is None:
            continue
        records.append(rec)
        stack.extend(reversed(rec.outputs))
    t = tree.tape
    return ProtocolTape(t.base, t.left_bits, t.right_bits, t.root, t.root_log_dim, tuple(records), t.spare_pairs)


def effective_size(tree: ProtocolTree, R: dict[str, int]) -> int:
    """Number of vertices (shares) of the effective protocol tree."""
    count = 0
    stack = [tree.tape.root]
    while stack:
        s = stack.pop()
        count += 1
        if s in R:
            continue
        rec = tree.record_for(s)
        if rec is not None:
            stack.extend(rec.outputs)
    return count


EVALUATORS = ("getowner", "modp", "depthfirst")


def evaluate_tape(tape, x, y, evaluator: str = "getowner", p: int = 3) -> tuple[int, dict]:
    """Dispatch helper returning the owner bit and audit numbers as a dict."""
    if evaluator == "getowner":
        bit, a = get_owner(tape, x, y)
        return bit, {"steps": a.steps, "bound": a.bound, "encodes": a.encodes_visited}
    if evaluator == "modp":
        return eval_modp(tape, x, y, p), {"p": p}
    if evaluator == "depthfirst":
        bit, a = eval_depth_first(tape, x, y)
        return bit, {"peak_R": a.peak_r, "prunes": a.prunes}
    raise TapeError(f"unknown evaluator {evaluator!r}")
