"""Dense state-vector simulation of qudit registers and of small tapes.

A tape is run as a one-round non-local protocol: encodings and Bell
measurements happen before the communication round, every unit-routed
share is sent during it, and Pauli corrections plus decoding happen after
it. The verifier holds a reference qudit maximally entangled with Q and
checks that Q comes back on the side ``get_owner`` predicts.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .evaluators import get_owner, share_owners
from .protocol import (
    ENCODE,
    TELEPORT,
    THRESHOLD23,
    UNIT_ROUTE,
    ProtocolTape,
    ProtocolTree,
    entanglement_cost,
    validate_and_build_tree,
)

DEFAULT_MAX_QUDITS = 12
REF = "ref"
SIDES = ("left", "right", REF)
NORM_TOL = 1e-9


class QsimError(Exception):
    pass


class ProtocolError(QsimError):
    """An operation the two parties cannot physically perform."""


class CapabilityError(QsimError):
    """The tape is valid but outside what the simulator runs."""


class RegisterSizeError(CapabilityError):
    pass


@dataclass
class PureState:
    base: int
    names: list[str] = field(default_factory=list)
    sides: dict[str, str] = field(default_factory=dict)
    psi: np.ndarray = field(default_factory=lambda: np.ones((), dtype=complex))
    max_qudits: int = DEFAULT_MAX_QUDITS

    @property
    def size(self) -> int:
        return len(self.names)

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise QsimError(f"no qudit named {name!r}") from None

    def add(self, name: str, side: str, value: int = 0) -> None:
        if name in self.sides:
            raise QsimError(f"qudit {name!r} already exists")
        if side not in SIDES:
            raise QsimError(f"unknown side {side!r}")
        if self.size + 1 > self.max_qudits:
            raise RegisterSizeError(f"register would exceed {self.max_qudits} qudits")
        e = np.zeros(self.base, dtype=complex)
        e[value] = 1
        self.psi = np.multiply.outer(self.psi, e)
        self.names.append(name)
        self.sides[name] = side

    def apply(self, op: np.ndarray, inputs: Sequence[str], outputs: Sequence[str] | None = None) -> None:
        """Contract ``op`` (output axes first, then input axes) into the register.

        Outputs take the inputs' places when their count matches; otherwise
        they are appended and inherit the first input's side.
        """
        outputs = list(inputs) if outputs is None else list(outputs)
        n_in, n_out = len(inputs), len(outputs)
        if op.shape != (self.base,) * (n_out + n_in):
            raise QsimError(f"operator shape {op.shape} does not fit {n_out} outputs, {n_in} inputs")
        side = self.sides[inputs[0]] if inputs else None
        fresh = [w for w in outputs if w not in inputs]
        if self.size - n_in + n_out > self.max_qudits:
            raise RegisterSizeError(f"register would exceed {self.max_qudits} qudits")
        axes = [self.axis(q) for q in inputs]
        new = np.tensordot(op, self.psi, axes=(list(range(n_out, n_out + n_in)), axes))
        rest = [q for q in self.names if q not in inputs]
        names = outputs + rest
        for q in inputs:
            if q not in outputs:
                del self.sides[q]
        for w in fresh:
            if w in self.sides:
                raise QsimError(f"qudit {w!r} already exists")
            self.sides[w] = side
        if outputs == list(inputs):
            order = [names.index(q) for q in self.names]
            self.psi = np.transpose(new, order)
        else:
            self.names = rest + outputs
            self.psi = np.moveaxis(new, list(range(n_out)), list(range(len(rest), len(rest) + n_out)))

    def measure(self, names: Sequence[str], rng: np.random.Generator) -> tuple[int, ...]:
        """Computational-basis measurement; the measured qudits are discarded."""
        axes = [self.axis(q) for q in names]
        moved = np.moveaxis(self.psi, axes, list(range(len(axes))))
        probs = np.sum(np.abs(moved.reshape(self.base ** len(axes), -1)) ** 2, axis=1)
        probs = probs / probs.sum()
        flat = int(rng.choice(len(probs), p=probs))
        outcome = np.unravel_index(flat, (self.base,) * len(axes))
        self.psi = moved[outcome] / np.sqrt(probs[flat])
        for q in names:
            del self.sides[q]
        self.names = [q for q in self.names if q not in names]
        return tuple(int(v) for v in outcome)

    def norm_error(self) -> float:
        return abs(float(np.vdot(self.psi, self.psi).real) - 1.0)

    def check_norm(self) -> None:
        err = self.norm_error()
        if err > NORM_TOL:
            raise QsimError(f"state norm drifted by {err:.3e}")

    def reduced(self, keep: Sequence[str]) -> np.ndarray:
        return reduced_density(self.psi, [self.axis(q) for q in keep], self.base)

    def side_qudits(self, side: str) -> list[str]:
        return [q for q in self.names if self.sides[q] == side]

    def copy(self) -> "PureState":
        return PureState(self.base, list(self.names), dict(self.sides), self.psi.copy(), self.max_qudits)


def reduced_density(psi: np.ndarray, keep_axes: Sequence[int], k: int) -> np.ndarray:
    m = _split(psi, keep_axes, k)
    return m @ m.conj().T


def _split(psi: np.ndarray, keep_axes: Sequence[int], k: int) -> np.ndarray:
    moved = np.moveaxis(psi, list(keep_axes), list(range(len(keep_axes))))
    return moved.reshape(k ** len(keep_axes), -1)


def reduced_trace_distance(psi1: np.ndarray, psi2: np.ndarray, keep_axes: Sequence[int], k: int) -> float:
    """Trace distance between the reductions of two pure states onto ``keep_axes``.

    Works on whichever side of the cut is smaller: if the kept part is large,
    write A = [M1 M2] = QR; then M1 M1^+ - M2 M2^+ = Q (R J R^+) Q^+ with
    J = diag(I, -I), so the small Hermitian R J R^+ has the same spectrum.
    """
    if not keep_axes:
        return 0.0
    m1, m2 = _split(psi1, keep_axes, k), _split(psi2, keep_axes, k)
    if m1.shape[0] <= 2 * m1.shape[1]:
        diff = m1 @ m1.conj().T - m2 @ m2.conj().T
        ev = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    else:
        _, r = np.linalg.qr(np.hstack([m1, m2]))
        j = np.concatenate([np.ones(m1.shape[1]), -np.ones(m2.shape[1])])
        small = (r * j) @ r.conj().T
        ev = np.linalg.eigvalsh((small + small.conj().T) / 2)
    return float(np.sum(np.abs(ev)) / 2)


# -- Paulis and primitives ------------------------------------------------------

def shift(k: int, a: int = 1) -> np.ndarray:
    """X^a: |j> -> |j+a>."""
    return np.roll(np.eye(k, dtype=complex), a % k, axis=0)


def clock(k: int, b: int = 1) -> np.ndarray:
    """Z^b: |j> -> w^(bj) |j>."""
    return np.diag(np.exp(2j * np.pi * b * np.arange(k) / k))


def epr_vector(k: int) -> np.ndarray:
    return np.eye(k, dtype=complex) / np.sqrt(k)


def make_epr(state: PureState, left_name: str, right_name: str,
             left_side: str = "left", right_side: str = "right") -> None:
    """Append (1/sqrt k) sum_t |t,t> on two fresh qudits."""
    if state.size + 2 > state.max_qudits:
        raise RegisterSizeError(f"register would exceed {state.max_qudits} qudits")
    for name in (left_name, right_name):
        if name in state.sides:
            raise QsimError(f"qudit {name!r} already exists")
    state.psi = np.multiply.outer(state.psi, epr_vector(state.base))
    state.names += [left_name, right_name]
    state.sides[left_name] = left_side
    state.sides[right_name] = right_side


def bell_to_computational(k: int) -> np.ndarray:
    """Unitary B[a, b, j, l] = <Phi_ab | j, l> with |Phi_ab> = k^-1/2 sum_j w^(bj) |j, j+a>."""
    w = np.exp(2j * np.pi / k)
    u = np.zeros((k, k, k, k), dtype=complex)
    for a, b, j in itertools.product(range(k), repeat=3):
        u[a, b, j, (j + a) % k] = w ** (-b * j) / np.sqrt(k)
    return u


def teleport(state: PureState, source: str, near: str, rng: np.random.Generator) -> tuple[int, int]:
    """Bell-measure ``source`` with the near half of an EPR pair.

    The far half then holds X^a Z^(-b) applied to the source state; the
    correction is :func:`teleport_correction`.
    """
    if state.sides[source] != state.sides[near]:
        raise ProtocolError(
            f"cannot Bell-measure {source!r} ({state.sides[source]}) with {near!r} ({state.sides[near]})"
        )
    k = state.base
    a_name, b_name = f"{source}#a", f"{source}#b"
    state.apply(bell_to_computational(k), [source, near], [a_name, b_name])
    a, b = state.measure([a_name, b_name], rng)
    return a, b


def teleport_frame(k: int, a: int, b: int) -> np.ndarray:
    """Operator left on the far half after outcome (a, b)."""
    return shift(k, a) @ clock(k, -b)


def teleport_correction(k: int, a: int, b: int) -> np.ndarray:
    return clock(k, b) @ shift(k, -a)


# -- 2-of-3 qutrit threshold code -------------------------------------------------

SHARE_POINTS = (0, 1, 2)   # share m holds t + m*s


def threshold23_isometry() -> np.ndarray:
    v = np.zeros((3, 3, 3, 3), dtype=complex)
    for s, t in itertools.product(range(3), repeat=2):
        v[t, (t + s) % 3, (t + 2 * s) % 3, s] = 1 / np.sqrt(3)
    return v


def encode_threshold23(state: PureState, secret: str, shares: Sequence[str]) -> list[str]:
    if state.base != 3:
        raise CapabilityError(f"threshold23 encoding needs qutrits, register base is {state.base}")
    if len(shares) != 3:
        raise QsimError("threshold23 encoding produces exactly three shares")
    state.apply(threshold23_isometry(), [secret], list(shares))
    return list(shares)


def threshold23_decoder(i: int, j: int) -> np.ndarray:
    """Unitary on shares (i, j): (v_i, v_j) -> (v_i + (c_k - c_i) s, s), s = (v_j - v_i)/(c_j - c_i)."""
    if i == j:
        raise QsimError("decoding needs two distinct shares")
    if not {i, j} <= {0, 1, 2}:
        raise QsimError(f"share positions must be 0, 1 or 2, got {i}, {j}")
    m = 3 - i - j
    ci, cj, cm = (SHARE_POINTS[q] for q in (i, j, m))
    inv = pow((cj - ci) % 3, -1, 3)
    u = np.zeros((3, 3, 3, 3), dtype=complex)
    for vi, vj in itertools.product(range(3), repeat=2):
        s = (vj - vi) * inv % 3
        u[(vi + (cm - ci) * s) % 3, s, vi, vj] = 1
    return u


def decode_threshold23(state: PureState, share_i: str, share_j: str, i: int, j: int) -> str:
    """Recover the secret from shares at positions ``i`` and ``j``; it lands in ``share_j``'s qudit."""
    if share_i == share_j:
        raise QsimError("decoding needs two distinct shares")
    if state.sides[share_i] != state.sides[share_j]:
        raise ProtocolError(f"shares {share_i!r} and {share_j!r} are on different sides")
    state.apply(threshold23_decoder(i, j), [share_i, share_j])
    return share_j


# -- running tapes --------------------------------------------------------------------

@dataclass
class Transcript:
    outcomes: list[tuple[str, int, int]] = field(default_factory=list)   # (share, a, b)
    bindings: dict[str, str] = field(default_factory=dict)              # share -> qudit
    pending: dict[str, np.ndarray] = field(default_factory=dict)        # qudit -> Pauli frame
    consumed: list[str] = field(default_factory=list)


@dataclass
class QuantumReport:
    x: tuple[int, ...]
    y: tuple[int, ...]
    owner: int
    success_prob: float
    wrong_side_trace_distance: float
    epr_pairs_used: int
    peak_qudits: int = 0
    corrections: int = 0
    final_state: PureState | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "x": "".join(map(str, self.x)),
            "y": "".join(map(str, self.y)),
            "owner": self.owner,
            "success_prob": round(self.success_prob, 6),
            "wrong_side_trace_distance": round(self.wrong_side_trace_distance, 6),
            "epr_pairs_used": self.epr_pairs_used,
        }


def check_one_round(tree: ProtocolTree) -> None:
    """Reject tapes the simulator cannot run as a single-round protocol."""
    if tree.tape.root_log_dim != 1:
        raise CapabilityError(f"root has log-dimension {tree.tape.root_log_dim}; only single qudits are simulated")
    for rec in tree.tape.records:
        if rec.kind != ENCODE:
            continue
        if rec.code.variant != THRESHOLD23:
            raise CapabilityError(f"record for {rec.input!r}: {rec.code.variant} codes are checked classically only")
        u = rec.input
        while (u := tree.parent(u)) is not None:
            if tree.record_for(u).kind == TELEPORT:
                raise CapabilityError(
                    f"record for {rec.input!r}: encoding after a teleport needs a Pauli correction before the round"
                )


def decoupling_distance(state: PureState, side: str, rng: np.random.Generator, trials: int = 2) -> float:
    """Largest trace distance between ``side``'s reduced states for two random secrets.

    The secret is chosen by projecting the reference qudit, which steers Q
    into the conjugate state.
    """
    dist = 0.0
    for _ in range(trials):
        s1 = _steer(state, _random_qudit(state.base, rng))
        s2 = _steer(state, _random_qudit(state.base, rng))
        keep = [s1.axis(q) for q in s1.side_qudits(side)]
        dist = max(dist, reduced_trace_distance(s1.psi, s2.psi, keep, state.base))
    return dist


def _steer(state: PureState, phi: np.ndarray) -> PureState:
    s = state.copy()
    s.apply(phi.astype(complex), ["Qbar"], [])
    s.psi = s.psi / np.linalg.norm(s.psi)
    return s


def _random_qudit(k: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=k) + 1j * rng.normal(size=k)
    return v / np.linalg.norm(v)


def run_quantum_tape(tape: ProtocolTape | ProtocolTree, x: Sequence[int], y: Sequence[int],
                     seed: int | None = 0, max_qudits: int = DEFAULT_MAX_QUDITS,
                     decoupling_trials: int = 2) -> QuantumReport:
    tree = tape if isinstance(tape, ProtocolTree) else validate_and_build_tree(tape)
    tree.check_inputs(x, y)
    check_one_round(tree)
    rng = np.random.default_rng(seed)
    k = tree.tape.base
    owner, _ = get_owner(tree, x, y)
    side_of = share_owners(tree, x, y)

    st = PureState(k, max_qudits=max_qudits)
    root_q = f"s:{tree.tape.root}"
    make_epr(st, "Qbar", root_q, REF, "left")
    tr = Transcript()
    tr.bindings[tree.tape.root] = root_q
    pairs = 0
    peak = st.size

    def new_pair(near_side: str, far_side: str) -> tuple[str, str]:
        nonlocal pairs, peak
        pairs += 1
        near, far = f"epr{pairs}.{near_side[0]}", f"epr{pairs}.{far_side[0]}"
        make_epr(st, near, far, near_side, far_side)
        peak = max(peak, st.size)
        return near, far

    for _ in range(tree.tape.spare_pairs):
        new_pair("left", "right")

    def hop(share: str, q: str) -> str:
        """Teleport qudit ``q`` (carrying ``share``) to the other side; returns the far qudit."""
        here = st.sides[q]
        near, far = new_pair(here, "right" if here == "left" else "left")
        a, b = teleport(st, q, near, rng)
        tr.outcomes.append((share, a, b))
        frame = tr.pending.pop(q, np.eye(k, dtype=complex))
        tr.pending[far] = teleport_frame(k, a, b) @ frame
        st.check_norm()
        return far

    # before the round: encodings and Bell measurements; sends are recorded
    sends: list[tuple[str, str]] = []
    for rec in tree.walk():
        q = tr.bindings[rec.input]
        if rec.kind == ENCODE:
            if q in tr.pending:
                raise CapabilityError(f"share {rec.input!r} carries an uncorrected Pauli frame")
            outs = [f"s:{w}" for w in rec.outputs]
            encode_threshold23(st, q, outs)
            peak = max(peak, st.size)
            tr.bindings.update(zip(rec.outputs, outs))
        elif rec.kind == TELEPORT:
            tr.bindings[rec.outputs[0]] = hop(rec.input, q)
        else:
            bit = rec.bit
            here = st.sides[q]
            if not bit.is_const and bit.side != here:
                q = hop(rec.input, q)
                tr.bindings[rec.input] = q
            sends.append((q, "right" if bit.resolve(x, y) else "left"))
        st.check_norm()

    # the communication round
    for q, dest in sends:
        st.sides[q] = dest
    if pairs != entanglement_cost(tree):
        raise QsimError(f"used {pairs} EPR pairs, cost accounting says {entanglement_cost(tree)}")

    # after the round: Pauli corrections by the final holders
    corrections = 0
    for q, frame in list(tr.pending.items()):
        st.apply(frame.conj().T, [q])
        tr.consumed.append(q)
        del tr.pending[q]
        corrections += 1
    if tr.pending:
        raise QsimError("unconsumed Pauli corrections")
    st.check_norm()

    side = "right" if owner else "left"
    losing = "left" if owner else "right"

    def decode(share: str) -> str:
        rec = tree.record_for(share)
        if rec is None or rec.kind == UNIT_ROUTE:
            q = tr.bindings[share]
            if st.sides[q] != side:
                raise QsimError(f"share {share!r} expected on the {side} side, found on {st.sides[q]}")
            return q
        if rec.kind == TELEPORT:
            return decode(rec.outputs[0])
        owners = [side_of[w] for w in rec.outputs]
        mine = [i for i, o in enumerate(owners) if o == owner][:2]
        if len(mine) < 2:
            raise QsimError(f"share {share!r} has fewer than two pieces on the {side} side")
        i, j = mine
        qi, qj = decode(rec.outputs[i]), decode(rec.outputs[j])
        return decode_threshold23(st, qi, qj, i, j)

    r = decode(tree.tape.root)
    st.check_norm()
    probe = st.copy()
    probe.apply(epr_vector(k).conj(), ["Qbar", r], [])
    success = float(np.vdot(probe.psi, probe.psi).real)

    dist = decoupling_distance(st, losing, rng, decoupling_trials)
    return QuantumReport(tuple(x), tuple(y), owner, success, dist, pairs, peak, corrections, st)


def sweep(tape: ProtocolTape, seed: int | None = 0, max_qudits: int = DEFAULT_MAX_QUDITS) -> list[QuantumReport]:
    tree = validate_and_build_tree(tape)
    return [
        run_quantum_tape(tree, xs, ys, seed=seed, max_qudits=max_qudits)
        for xs in itertools.product((0, 1), repeat=tape.left_bits)
        for ys in itertools.product((0, 1), repeat=tape.right_bits)
    ]
