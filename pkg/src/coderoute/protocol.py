"""Protocol tapes, their trees and cost metrics.

A tape is a list of share records. Each record consumes one share and either
unit-routes it (no outputs), teleports it across (one output) or encodes it
into a secret sharing scheme (several outputs). Shares that no record
consumes are kept by whichever side holds them. Sides are ``0`` (left, the
agent that receives Q and x) and ``1`` (right, the agent that receives y).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any, Iterator, Sequence

from .span import SpanProgram, SpanProgramError, check_indicator_validity, threshold23_program, truth_table

LEFT, RIGHT = 0, 1
SIDE_NAMES = ("left", "right")

UNIT_ROUTE = "unit-route"
TELEPORT = "teleport"
ENCODE = "encode"
KINDS = (UNIT_ROUTE, TELEPORT, ENCODE)


class TapeError(ValueError):
    """Structurally invalid tape or malformed tape file."""


def side_from_name(name: str) -> int:
    try:
        return SIDE_NAMES.index(name)
    except ValueError:
        raise TapeError(f"unknown side {name!r}") from None


@dataclass(frozen=True)
class BitRef:
    """The bit a unit-routing is conditioned on.

    ``side`` is ``"left"``/``"right"`` for an input bit (1-based ``index``
    into x or y, optionally negated) or ``"const"`` for a fixed bit whose
    value is ``index``. Constant bits route a share unconditionally ("keep"
    or "send") and never need entanglement.
    """

    side: str
    index: int
    negated: bool = False

    def __post_init__(self):
        if self.side == "const":
            if self.index not in (0, 1):
                raise TapeError(f"constant bit must be 0 or 1, got {self.index}")
        elif self.side in SIDE_NAMES:
            if self.index < 1:
                raise TapeError(f"bit index {self.index} must be >= 1")
        else:
            raise TapeError(f"unknown bit side {self.side!r}")

    @classmethod
    def const(cls, value: int) -> "BitRef":
        return cls("const", int(value))

    @classmethod
    def left(cls, index: int, negated: bool = False) -> "BitRef":
        return cls("left", index, negated)

    @classmethod
    def right(cls, index: int, negated: bool = False) -> "BitRef":
        return cls("right", index, negated)

    @property
    def is_const(self) -> bool:
        return self.side == "const"

    @property
    def side_id(self) -> int | None:
        return None if self.is_const else side_from_name(self.side)

    def resolve(self, x: Sequence[int], y: Sequence[int]) -> int:
        if self.is_const:
            return self.index
        bits = x if self.side == "left" else y
        return bits[self.index - 1] ^ int(self.negated)

    def label(self) -> str:
        if self.is_const:
            return str(self.index)
        s = f"{'x' if self.side == 'left' else 'y'}{self.index}"
        return f"!{s}" if self.negated else s

    def to_dict(self) -> dict[str, Any]:
        if self.is_const:
            return {"const": self.index}
        return {"side": self.side, "index": self.index, "negated": self.negated}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "BitRef":
        if "const" in d:
            return cls.const(d["const"])
        try:
            return cls(d["side"], d["index"], bool(d.get("negated", False)))
        except KeyError as exc:
            raise TapeError(f"bit reference missing {exc}") from None


THRESHOLD23 = "threshold23"
SMITH = "smith"


@dataclass(frozen=True)
class CodeSpec:
    variant: str
    msp: SpanProgram | None = None

    def __post_init__(self):
        if self.variant == THRESHOLD23:
            if self.msp is not None:
                raise TapeError("threshold23 code takes no span program")
        elif self.variant == SMITH:
            if self.msp is None:
                raise TapeError("smith code needs a span program")
        else:
            raise TapeError(f"unknown code variant {self.variant!r}")

    @classmethod
    def threshold23(cls) -> "CodeSpec":
        return cls(THRESHOLD23)

    @classmethod
    def smith(cls, msp: SpanProgram) -> "CodeSpec":
        return cls(SMITH, msp)

    @property
    def program(self) -> SpanProgram:
        """Monotone span program for the code's indicator function."""
        return threshold23_program() if self.msp is None else self.msp

    @property
    def share_dims(self) -> tuple[int, ...]:
        if self.variant == THRESHOLD23:
            return (1, 1, 1)
        return tuple(self.msp.share_dims())

    @property
    def arity(self) -> int:
        return len(self.share_dims)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"variant": self.variant}
        if self.msp is not None:
            d["span_program"] = self.msp.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CodeSpec":
        variant = d.get("variant")
        if variant == SMITH:
            if "span_program" not in d:
                raise TapeError("smith code needs a span_program")
            try:
                return cls.smith(SpanProgram.from_dict(d["span_program"]))
            except SpanProgramError as exc:
                raise TapeError(f"bad span program in code: {exc}") from None
        if "span_program" in d:
            raise TapeError(f"{variant} code takes no span_program")
        return cls(variant)


@dataclass(frozen=True)
class ShareRecord:
    input: str
    outputs: tuple[str, ...]
    kind: str
    bit: BitRef | None = None
    to_side: int | None = None
    code: CodeSpec | None = None

    @classmethod
    def unit_route(cls, share: str, bit: BitRef) -> "ShareRecord":
        return cls(share, (), UNIT_ROUTE, bit=bit)

    @classmethod
    def teleport(cls, share: str, out: str, to_side: int) -> "ShareRecord":
        return cls(share, (out,), TELEPORT, to_side=to_side)

    @classmethod
    def encode(cls, share: str, outs: Sequence[str], code: CodeSpec) -> "ShareRecord":
        return cls(share, tuple(outs), ENCODE, code=code)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"input": self.input, "outputs": list(self.outputs), "kind": self.kind}
        if self.kind == UNIT_ROUTE:
            d["bit"] = self.bit.to_dict()
        elif self.kind == TELEPORT:
            d["to_side"] = SIDE_NAMES[self.to_side]
        else:
            d["code"] = self.code.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ShareRecord":
        kind = d.get("kind")
        if kind not in KINDS:
            raise TapeError(f"record {d.get('input')!r}: unknown kind {kind!r}")
        allowed = {"input", "outputs", "kind", {UNIT_ROUTE: "bit", TELEPORT: "to_side", ENCODE: "code"}[kind]}
        extra = set(d) - allowed
        missing = allowed - set(d)
        if extra or missing:
            raise TapeError(
                f"record {d.get('input')!r} ({kind}): "
                + (f"unexpected fields {sorted(extra)} " if extra else "")
                + (f"missing fields {sorted(missing)}" if missing else "")
            )
        outs = tuple(d["outputs"])
        if kind == UNIT_ROUTE:
            return cls(d["input"], outs, kind, bit=BitRef.from_dict(d["bit"]))
        if kind == TELEPORT:
            return cls(d["input"], outs, kind, to_side=side_from_name(d["to_side"]))
        return cls(d["input"], outs, kind, code=CodeSpec.from_dict(d["code"]))


@dataclass(frozen=True)
class ProtocolTape:
    base: int
    left_bits: int
    right_bits: int
    root: str
    root_log_dim: int
    records: tuple[ShareRecord, ...]
    # pre-shared EPR pairs in the resource state that this tape never touches
    spare_pairs: int = 0

    def to_dict(self) -> dict[str, Any]:
        d = {
            "base": self.base,
            "left_bits": self.left_bits,
            "right_bits": self.right_bits,
            "root": {"id": self.root, "log_dim": self.root_log_dim},
            "records": [r.to_dict() for r in self.records],
        }
        if self.spare_pairs:
            d["spare_pairs"] = self.spare_pairs
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ProtocolTape":
        try:
            return cls(
                base=d["base"],
                left_bits=d["left_bits"],
                right_bits=d["right_bits"],
                root=d["root"]["id"],
                root_log_dim=d["root"]["log_dim"],
                records=tuple(ShareRecord.from_dict(r) for r in d["records"]),
                spare_pairs=d.get("spare_pairs", 0),
            )
        except (KeyError, TypeError) as exc:
            raise TapeError(f"malformed tape: {exc}") from None


def load_tape(path) -> ProtocolTape:
    with open(path) as fh:
        try:
            return ProtocolTape.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise TapeError(f"{path}: invalid JSON ({exc})") from None


def save_tape(tape: ProtocolTape, path) -> None:
    with open(path, "w") as fh:
        json.dump(tape.to_dict(), fh, indent=2)
        fh.write("\n")


@lru_cache(maxsize=256)
def _indicator_ok(msp: SpanProgram):
    return check_indicator_validity(truth_table(msp))


@dataclass(frozen=True)
class ProtocolTree:
    """A validated tape with its share bookkeeping resolved."""

    tape: ProtocolTape
    consumer: dict[str, int] = field(repr=False)   # share -> index of the record consuming it
    producer: dict[str, int] = field(repr=False)   # share -> index of the record producing it
    log_dim: dict[str, int] = field(repr=False)
    holder: dict[str, int] = field(repr=False)     # side holding the share before routing

    @cached_property
    def _by_input(self) -> dict[str, ShareRecord]:
        return {r.input: r for r in self.tape.records}

    def record_for(self, share: str) -> ShareRecord | None:
        return self._by_input.get(share)

    def parent(self, share: str) -> str | None:
        i = self.producer.get(share)
        return None if i is None else self.tape.records[i].input

    def walk(self) -> Iterator[ShareRecord]:
        """Records in depth-first order from the root."""
        stack = [self.tape.root]
        while stack:
            rec = self.record_for(stack.pop())
            if rec is not None:
                yield rec
                stack.extend(reversed(rec.outputs))

    def shares(self) -> list[str]:
        return list(self.log_dim)

    @cached_property
    def max_arity(self) -> int:
        return max((len(r.outputs) for r in self.tape.records), default=0)

    @cached_property
    def depth(self) -> int:
        return layer(self, self.tape.root)

    def check_inputs(self, x: Sequence[int], y: Sequence[int]) -> None:
        if len(x) != self.tape.left_bits or len(y) != self.tape.right_bits:
            raise TapeError(
                f"inputs have lengths ({len(x)}, {len(y)}), tape expects "
                f"({self.tape.left_bits}, {self.tape.right_bits})"
            )
        if any(b not in (0, 1) for b in (*x, *y)):
            raise TapeError("inputs must be bit strings")


def layer(tree: ProtocolTree, share: str) -> int:
    """Length of the longest path from ``share`` down to a leaf."""
    rec = tree.record_for(share)
    if rec is None or not rec.outputs:
        return 0
    return 1 + max(layer(tree, w) for w in rec.outputs)


def validate_and_build_tree(tape: ProtocolTape) -> ProtocolTree:
    from .zp import is_prime

    if not isinstance(tape.base, int) or not is_prime(tape.base):
        raise TapeError(f"base {tape.base} must be prime")
    if tape.left_bits < 0 or tape.right_bits < 0:
        raise TapeError("input lengths must be non-negative")
    if tape.root_log_dim < 1:
        raise TapeError("root log-dimension must be at least 1")
    if tape.spare_pairs < 0:
        raise TapeError("spare_pairs must be non-negative")

    consumer: dict[str, int] = {}
    producer: dict[str, int] = {}
    for i, rec in enumerate(tape.records):
        where = f"record {i} (input {rec.input!r})"
        n = len(rec.outputs)
        expected = {UNIT_ROUTE: n == 0, TELEPORT: n == 1, ENCODE: n > 1}[rec.kind]
        if not expected:
            raise TapeError(f"{where}: kind {rec.kind} does not match {n} outputs")
        if rec.kind == UNIT_ROUTE and rec.bit is None:
            raise TapeError(f"{where}: unit-route needs a bit")
        if rec.kind == TELEPORT and rec.to_side not in (LEFT, RIGHT):
            raise TapeError(f"{where}: teleport needs a destination side")
        if rec.kind == ENCODE and rec.code is None:
            raise TapeError(f"{where}: encode needs a code")
        if rec.input in consumer:
            raise TapeError(f"{where}: share {rec.input!r} already consumed by record {consumer[rec.input]}")
        consumer[rec.input] = i
        for w in rec.outputs:
            if w == tape.root:
                raise TapeError(f"{where}: root {w!r} cannot be an output")
            if w in producer:
                raise TapeError(f"{where}: share {w!r} already produced by record {producer[w]}")
            producer[w] = i
        if len(set(rec.outputs)) != n:
            raise TapeError(f"{where}: repeated output share")
        if rec.kind == UNIT_ROUTE and not rec.bit.is_const:
            limit = tape.left_bits if rec.bit.side == "left" else tape.right_bits
            if rec.bit.index > limit:
                raise TapeError(f"{where}: bit {rec.bit.label()} outside declared input length {limit}")

    if tape.root not in consumer:
        raise TapeError(f"root {tape.root!r} is never consumed")
    for i, rec in enumerate(tape.records):
        if rec.input != tape.root and rec.input not in producer:
            raise TapeError(f"record {i}: input {rec.input!r} is dangling (never produced)")

    log_dim = {tape.root: tape.root_log_dim}
    holder = {tape.root: LEFT}
    stack = [tape.root]
    seen = 0
    while stack:
        s = stack.pop()
        i = consumer.get(s)
        if i is None:
            continue
        rec = tape.records[i]
        seen += 1
        where = f"record {i} (input {s!r})"
        if rec.kind == TELEPORT:
            if rec.to_side == holder[s]:
                raise TapeError(f"{where}: teleport to the side already holding the share")
            out = rec.outputs[0]
            log_dim[out] = log_dim[s]
            holder[out] = rec.to_side
        elif rec.kind == ENCODE:
            code = rec.code
            if code.variant == THRESHOLD23 and tape.base != 3:
                raise TapeError(f"{where}: threshold23 code needs base 3, tape base is {tape.base}")
            if code.variant == SMITH:
                msp = code.msp
                if msp.p != tape.base:
                    raise TapeError(f"{where}: code over Z_{msp.p} in a base-{tape.base} tape")
                if not msp.is_monotone:
                    raise TapeError(f"{where}: smith code program is not monotone")
                chk = _indicator_ok(msp)
                if not chk:
                    raise TapeError(f"{where}: code indicator invalid ({chk.describe()})")
            if code.arity != len(rec.outputs):
                raise TapeError(f"{where}: code has {code.arity} shares, record lists {len(rec.outputs)}")
            if log_dim[s] != 1:
                raise TapeError(f"{where}: encoded share must have log-dimension 1, has {log_dim[s]}")
            for w, dim in zip(rec.outputs, code.share_dims):
                log_dim[w] = dim
                holder[w] = holder[s]
        stack.extend(rec.outputs)
    if seen != len(tape.records):
        unreached = [r.input for r in tape.records if r.input not in log_dim]
        raise TapeError(f"records unreachable from the root (cycle or orphan): {unreached}")

    return ProtocolTree(tape, consumer, producer, log_dim, holder)


# -- metrics --------------------------------------------------------------------

def size_H(tree: ProtocolTree) -> int:
    h = 1
    for rec in tree.tape.records:
        n = len(rec.outputs)
        if n > 1:
            h += n - 1
        elif n == 1:
            h += 1
    return h


def weighted_size_Htilde(tree: ProtocolTree) -> int:
    h = tree.tape.root_log_dim
    for rec in tree.tape.records:
        n_tilde = sum(tree.log_dim[w] for w in rec.outputs)
        if len(rec.outputs) > 1:
            h += n_tilde - tree.log_dim[rec.input]
        elif len(rec.outputs) == 1:
            h += n_tilde
    return h


def total_encoded_size(tree: ProtocolTree) -> int:
    """N: total log-dimension of all encode outputs."""
    return sum(sum(tree.log_dim[w] for w in r.outputs) for r in tree.tape.records if r.kind == ENCODE)


def entanglement_cost(tree: ProtocolTree, x: Sequence[int] | None = None, y: Sequence[int] | None = None) -> int:
    """EPR pairs (of the tape's base) consumed.

    Teleports cost their share's log-dimension; a unit-routing costs the
    same when its bit lives on the side not holding the share. The cost
    depends on the input lengths only, so x and y are optional.
    """
    if x is not None or y is not None:
        tree.check_inputs(x or (), y or ())
    e = tree.tape.spare_pairs
    for rec in tree.tape.records:
        if rec.kind == TELEPORT:
            e += tree.log_dim[rec.input]
        elif rec.kind == UNIT_ROUTE and not rec.bit.is_const and rec.bit.side_id != tree.holder[rec.input]:
            e += tree.log_dim[rec.input]
    return e
