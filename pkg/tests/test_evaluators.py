import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coderoute.compilers import compile_formula, compile_theorem2
from coderoute.evaluators import (
    ArityError,
    FanInError,
    effective_size,
    effective_tape,
    eval_depth_first,
    eval_modp,
    evaluate_tape,
    get_owner,
    lemma3_transform,
    share_owners,
)
from coderoute.protocol import LEFT, RIGHT, BitRef, CodeSpec, ProtocolTape, ShareRecord, validate_and_build_tree
from coderoute.random_tapes import random_tape, random_tapes
from coderoute.span import library_program

from oracles import bits

FIG4C = "AND(NOT(x1),OR(x1,y1))"


def inputs(t):
    return itertools.product(bits(t.left_bits), bits(t.right_bits))


def test_fig4c_examples():
    t = compile_formula(FIG4C)
    assert get_owner(t, (0,), (1,))[0] == 1
    for x, y in inputs(t):
        g = get_owner(t, x, y)[0]
        assert g == (1 - x[0]) & (x[0] | y[0])
        assert all(eval_modp(t, x, y, p) == g for p in (2, 3, 5))
        bit, audit = eval_depth_first(t, x, y)
        assert bit == g and audit.peak_r <= 3


def test_fig4a_left_holds_two_shares():
    t = compile_formula("AND(x1,y1)")
    owners = share_owners(t, (1,), (0,))
    assert owners["Q"] == 0
    assert sum(owners[w] == LEFT for w in ("Q.0", "Q.1", "Q.2")) == 2


def test_keep_only():
    t = ProtocolTape(3, 0, 0, "Q", 1, (ShareRecord.unit_route("Q", BitRef.const(0)),))
    assert get_owner(t, (), ())[0] == 0
    assert eval_modp(t, (), (), 5) == 0
    assert eval_depth_first(t, (), ())[0] == 0


def test_teleport_chain():
    recs, side, prev = [], LEFT, "Q"
    for i in range(50):
        side = 1 - side
        recs.append(ShareRecord.teleport(prev, f"t{i}", side))
        prev = f"t{i}"
    t = ProtocolTape(2, 0, 0, "Q", 1, tuple(recs))
    bit, audit = eval_depth_first(t, (), ())
    assert bit == side == get_owner(t, (), ())[0] == eval_modp(t, (), (), 3)
    assert audit.peak_r == 0 and audit.prunes == 0


def test_audit_bound():
    t = compile_theorem2(library_program("XOR"), 1, 1)
    for x, y in inputs(t):
        _, audit = get_owner(t, x, y)
        assert audit.steps <= audit.bound <= audit.n_total ** 2


# -- path-count normalization ----------------------------------------------------------------------------

def test_lemma3_examples():
    assert lemma3_transform(2, 5, 3) == (1, 0)
    for p in (2, 3, 5, 7):
        assert lemma3_transform(0, 9, p) == (0, 1)
    assert lemma3_transform(5, 0, 5)[0] == 0


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**12), st.integers(0, 10**12), st.sampled_from([2, 3, 5, 7, 11, 13]))
def test_lemma3_property(f0, f0bar, p):
    f2, f2bar = lemma3_transform(f0, f0bar, p)
    assert f2 == int(f0 % p != 0)
    assert (f2 + f2bar) % p == 1 % p


def test_lemma3_rejects_negative():
    with pytest.raises(ValueError):
        lemma3_transform(-1, 0, 3)


# -- mod p -------------------------------------------------------------------------------

def _and_node(bit_a, bit_b):
    and_sp = library_program("AND")
    recs = (ShareRecord.encode("Q", ["a", "b"], CodeSpec.smith(and_sp)),
            ShareRecord.unit_route("a", bit_a), ShareRecord.unit_route("b", bit_b))
    return ProtocolTape(2, 1, 1, "Q", 1, recs)


def test_modp_and_node():
    from coderoute.span import SpanProgram

    and3 = SpanProgram.build(3, [(1, 0), (0, 1)], [(1, 1), (2, 1)], (1, 1), 2)
    recs = (ShareRecord.encode("Q", ["a", "b"], CodeSpec.smith(and3)),
            ShareRecord.unit_route("a", BitRef.const(1)), ShareRecord.unit_route("b", BitRef.const(1)))
    assert eval_modp(ProtocolTape(3, 0, 0, "Q", 1, recs), (), (), 3) == 1


def test_modp_partial_evaluation():
    t = _and_node(BitRef.const(0), BitRef.right(1))
    for y in (0, 1):
        assert eval_modp(t, (0,), (y,), 2) == 0
    t = _and_node(BitRef.const(1), BitRef.right(1))
    for y in (0, 1):
        assert eval_modp(t, (0,), (y,), 2) == y


def test_modp_fan_in_cap():
    t = compile_formula("AND(x1,y1)")
    with pytest.raises(FanInError):
        eval_modp(t, (1,), (1,), 3, fan_in_cap=2)


def test_depth_first_arity_bound():
    t = compile_theorem2(library_program("XOR"), 1, 1)
    with pytest.raises(ArityError):
        eval_depth_first(t, (1,), (0,))
    assert eval_depth_first(t, (1,), (0,), arity_bound=5)[0] == 1


def test_evaluate_tape_dispatch():
    t = compile_formula(FIG4C)
    for ev in ("getowner", "modp", "depthfirst"):
        assert evaluate_tape(t, (0,), (1,), ev)[0] == 1


# -- pruning invariants -----------------------------------------------------------------

def _small_tapes(n, seed):
    rng = random.Random(seed)
    return [random_tape(rng, max_depth=4, max_bits=3) for _ in range(n)]


def test_effective_tree_preserved_and_shrinks():
    checked = 0
    for t in _small_tapes(60, 17):
        tree = validate_and_build_tree(t)
        for x, y in inputs(t):
            truth = get_owner(tree, x, y)[0]
            sizes = [effective_size(tree, {})]

            def hook(tr, R):
                eff = effective_tape(tr, R)
                assert get_owner(eff, x, y)[0] == truth
                sizes.append(effective_size(tr, R))

            assert eval_depth_first(tree, x, y, on_prune=hook)[0] == truth
            assert all(b < a for a, b in zip(sizes, sizes[1:]))
            checked += len(sizes) - 1
    assert checked > 100


def test_equivalence_sample():
    for t in random_tapes(25, seed=4):
        tree = validate_and_build_tree(t)
        for x, y in itertools.islice(inputs(t), 64):
            g = get_owner(tree, x, y)[0]
            assert [eval_modp(tree, x, y, p) for p in (2, 3, 5)] == [g] * 3
            assert eval_depth_first(tree, x, y)[0] == g


def test_random_tapes_seeded(monkeypatch):
    monkeypatch.setenv("CODEROUTE_SEED", "123")
    a = random_tapes(3)
    assert a == random_tapes(3, seed=123)
    assert a != random_tapes(3, seed=124)
