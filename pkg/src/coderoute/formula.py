"""Boolean formulas over x1..xn, y1..yn with binary AND/OR and NOT.

Grammar::

    expr := AND(expr,expr) | OR(expr,expr) | NOT(expr) | x<digits> | y<digits>

Parsed formulas are normalized with De Morgan's laws so that negations sit
on variables only.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union


class FormulaSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


@dataclass(frozen=True)
class Var:
    side: str          # "left" for x, "right" for y
    index: int         # 1-based
    negated: bool = False

    def __str__(self):
        s = f"{'x' if self.side == 'left' else 'y'}{self.index}"
        return f"NOT({s})" if self.negated else s


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"AND({self.left},{self.right})"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"OR({self.left},{self.right})"


@dataclass(frozen=True)
class Not:
    arg: "Formula"

    def __str__(self):
        return f"NOT({self.arg})"


Formula = Union[Var, And, Or, Not]

_TOKEN = re.compile(r"\s*(?:(AND|OR|NOT)\b|([xy])(\d+)\b|([(),])|(\S))")


def _tokens(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # trailing whitespace
            break
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("op", m.group(1), start))
        elif m.group(2):
            out.append(("var", (m.group(2), m.group(3)), start))
        elif m.group(4):
            out.append((m.group(4), m.group(4), start))
        else:
            bad = re.match(r"\w+", text[start:])
            word = bad.group(0) if bad else m.group(5)
            raise FormulaSyntaxError(f"unknown name {word!r}", start)
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


def parse_formula(text: str) -> Formula:
    """Parse and normalize; raises :class:`FormulaSyntaxError`."""
    toks = _tokens(text)
    i = 0

    def expect(kind):
        nonlocal i
        t = toks[i]
        if t[0] != kind:
            found = "end of input" if t[0] == "end" else repr(t[1] if t[0] != "var" else "".join(t[1]))
            raise FormulaSyntaxError(f"expected {kind!r}, found {found}", t[2])
        i += 1
        return t

    def expr():
        nonlocal i
        t = toks[i]
        if t[0] == "var":
            i += 1
            letter, digits = t[1]
            idx = int(digits)
            if idx < 1:
                raise FormulaSyntaxError(f"variable index must be >= 1 in {letter}{digits}", t[2])
            return Var("left" if letter == "x" else "right", idx)
        if t[0] == "op":
            i += 1
            expect("(")
            a = expr()
            if t[1] == "NOT":
                expect(")")
                return Not(a)
            expect(",")
            b = expr()
            expect(")")
            return And(a, b) if t[1] == "AND" else Or(a, b)
        found = "end of input" if t[0] == "end" else repr(t[1])
        raise FormulaSyntaxError(f"expected a formula, found {found}", t[2])

    tree = expr()
    expect("end")
    return normalize(tree)


def normalize(f: Formula, negate: bool = False) -> Formula:
    """Push NOTs to the leaves."""
    if isinstance(f, Var):
        return Var(f.side, f.index, f.negated ^ negate)
    if isinstance(f, Not):
        return normalize(f.arg, not negate)
    a, b = normalize(f.left, negate), normalize(f.right, negate)
    if isinstance(f, And):
        return Or(a, b) if negate else And(a, b)
    return And(a, b) if negate else Or(a, b)


def size(f: Formula) -> int:
    """Leaf occurrences, counted with repetition."""
    if isinstance(f, Var):
        return 1
    if isinstance(f, Not):
        return size(f.arg)
    return size(f.left) + size(f.right)


def variables(f: Formula) -> tuple[int, int]:
    """Largest x index and largest y index used."""
    if isinstance(f, Var):
        return (f.index, 0) if f.side == "left" else (0, f.index)
    if isinstance(f, Not):
        return variables(f.arg)
    (a, b), (c, d) = variables(f.left), variables(f.right)
    return max(a, c), max(b, d)


def evaluate_formula(f: Formula, x, y) -> int:
    if isinstance(f, Var):
        bits = x if f.side == "left" else y
        return bits[f.index - 1] ^ int(f.negated)
    if isinstance(f, Not):
        return 1 - evaluate_formula(f.arg, x, y)
    a, b = evaluate_formula(f.left, x, y), evaluate_formula(f.right, x, y)
    return (a & b) if isinstance(f, And) else (a | b)
