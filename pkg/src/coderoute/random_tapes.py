"""Seeded random tape generator for the evaluator equivalence harness."""
from __future__ import annotations

import os
import random

from .protocol import LEFT, RIGHT, BitRef, CodeSpec, ProtocolTape, ShareRecord
from .span import SpanProgram

DEFAULT_SEED = 20240521


def default_seed() -> int:
    return int(os.environ.get("CODEROUTE_SEED", DEFAULT_SEED))


# small valid indicator codes over Z_3, all with one row per share
def _code_pool() -> list[CodeSpec]:
    sm = SpanProgram.build
    return [
        CodeSpec.threshold23(),
        CodeSpec.smith(sm(3, [(1, 0), (0, 1)], [(1, 1), (2, 1)], (1, 1), 2)),                       # z1 & z2
        CodeSpec.smith(sm(3, [(1, 0, 0), (0, 1, 0), (0, 0, 1)], [(1, 1), (2, 1), (3, 1)], (1, 1, 1), 3)),  # z1 & z2 & z3
        CodeSpec.smith(sm(3, [(1, 0), (0, 1), (0, 1)], [(1, 1), (2, 1), (3, 1)], (1, 1), 3)),       # z1 & (z2 | z3)
        CodeSpec.smith(sm(3, [(1, 0), (1, 1), (1, 2)], [(1, 1), (2, 1), (3, 1)], (0, 1), 3)),       # 2-of-3
    ]


def random_tape(rng: random.Random, max_depth: int = 6, max_arity: int = 3, max_bits: int = 6) -> ProtocolTape:
    """A valid tape of depth <= max_depth with codes of at most max_arity shares."""
    left_bits = rng.randint(1, max_bits)
    right_bits = rng.randint(1, max_bits)
    codes = [c for c in _code_pool() if c.arity <= max_arity]
    records: list[ShareRecord] = []
    counter = 0

    def fresh() -> str:
        nonlocal counter
        counter += 1
        return f"s{counter}"

    def bit() -> BitRef:
        r = rng.random()
        if r < 0.1:
            return BitRef.const(rng.randint(0, 1))
        if r < 0.55:
            return BitRef.left(rng.randint(1, left_bits), rng.random() < 0.3)
        return BitRef.right(rng.randint(1, right_bits), rng.random() < 0.3)

    def grow(share: str, depth_left: int, holder: int, is_root: bool) -> None:
        r = rng.random()
        if depth_left > 0 and (r < 0.42 or (is_root and r < 0.95)):
            code = rng.choice(codes)
            outs = [fresh() for _ in range(code.arity)]
            records.append(ShareRecord.encode(share, outs, code))
            for w in outs:
                grow(w, depth_left - 1, holder, False)
        elif depth_left > 0 and r < 0.56:
            out = fresh()
            records.append(ShareRecord.teleport(share, out, 1 - holder))
            grow(out, depth_left - 1, 1 - holder, False)
        elif is_root or rng.random() < 0.75:
            records.append(ShareRecord.unit_route(share, bit()))
        # else: kept by the holder

    grow("Q", max_depth, LEFT, True)
    return ProtocolTape(3, left_bits, right_bits, "Q", 1, tuple(records))


def random_tapes(count: int, seed: int | None = None, **kw) -> list[ProtocolTape]:
    rng = random.Random(default_seed() if seed is None else seed)
    return [random_tape(rng, **kw) for _ in range(count)]


__all__ = ["random_tape", "random_tapes", "default_seed", "DEFAULT_SEED", "RIGHT"]
