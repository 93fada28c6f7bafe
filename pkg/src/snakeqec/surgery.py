"""Logical-level verification of the snake teleportation protocols.

Snakes are represented as single logical qubits on a dense statevector.
Growing a snake merges it with a fresh |0> qubit through a projective XX
parity measurement; splitting simply stops enforcing the parity, so the
merged pair alpha|++> + beta|--> is already the head/tail entangled state.
A defect on a shuttled head is a coherent Z rotation.  Teleporting forward
measures the tail in Z; teleporting back measures the head, and the Z
rotation commutes with that measurement, which is the whole point of the
scheme: the tail recovers the input exactly no matter how hard the head was
scrambled.

All measurement branches can be forced, so tests enumerate every outcome
combination instead of sampling, and each run reports the probability of
the branch it took.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "MAX_QUBITS",
    "PureState",
    "ProtocolStep",
    "ProtocolTrace",
    "apply_cnot",
    "apply_pauli_x",
    "apply_pauli_z",
    "apply_rz",
    "fidelity",
    "hydra_state",
    "measure_out_z",
    "measure_xx",
    "run_interacting_protocol",
    "run_single_snake_protocol",
]

MAX_QUBITS = 12
_NORM_TOL = 1e-12


@dataclass(frozen=True)
class PureState:
    """Unit-norm amplitude vector over up to MAX_QUBITS qubits."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        n = amps.size.bit_length() - 1
        if amps.ndim != 1 or amps.size != 1 << n or amps.size < 2:
            raise ValueError("amplitudes must have length 2**n for n >= 1")
        if n > MAX_QUBITS:
            raise ValueError(f"at most {MAX_QUBITS} qubits supported")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @classmethod
    def from_plus_minus(cls, alpha: complex, beta: complex) -> "PureState":
        """Single qubit alpha|+> + beta|-> in the computational basis."""
        return cls(
            np.array([alpha + beta, alpha - beta], dtype=complex) / math.sqrt(2.0)
        )


@dataclass(frozen=True)
class ProtocolStep:
    """One recorded protocol action.

    ``outcome`` carries the measurement result for measurement steps and the
    applied Pauli exponent for correction steps, so the outcome-dependent
    correction rules are visible in the trace.
    """

    op: str
    targets: tuple[int, ...] = ()
    outcome: int | None = None


@dataclass(frozen=True)
class ProtocolTrace:
    steps: tuple[ProtocolStep, ...]
    defect_angle: float
    probability: float


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("states live on different registers")
    return abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2


def _single(amps: np.ndarray, n: int, qubit: int, mat: np.ndarray) -> np.ndarray:
    shaped = np.moveaxis(amps.reshape((2,) * n), qubit, 0)
    out = (mat @ shaped.reshape(2, -1)).reshape(shaped.shape)
    return np.moveaxis(out, 0, qubit).ravel()


_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _check_qubit(state: PureState, qubit: int) -> None:
    if not 0 <= qubit < state.n_qubits:
        raise ValueError(f"qubit {qubit} outside register of {state.n_qubits}")


def apply_pauli_x(state: PureState, qubit: int) -> PureState:
    _check_qubit(state, qubit)
    return PureState(_single(state.amplitudes, state.n_qubits, qubit, _X))


def apply_pauli_z(state: PureState, qubit: int) -> PureState:
    _check_qubit(state, qubit)
    return PureState(_single(state.amplitudes, state.n_qubits, qubit, _Z))


def apply_rz(state: PureState, qubit: int, angle: float) -> PureState:
    _check_qubit(state, qubit)
    mat = np.diag([cmath.exp(-0.5j * angle), cmath.exp(0.5j * angle)])
    return PureState(_single(state.amplitudes, state.n_qubits, qubit, mat))


def apply_cnot(state: PureState, control: int, target: int) -> PureState:
    _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise ValueError("control and target must differ")
    n = state.n_qubits
    shaped = state.amplitudes.reshape((2,) * n)
    flipped = np.flip(shaped, axis=target)
    out = shaped.copy()
    sel = [slice(None)] * n
    sel[control] = 1
    out[tuple(sel)] = flipped[tuple(sel)]
    return PureState(out.ravel())


def _kron(states: Iterable[PureState]) -> PureState:
    vec = np.array([1.0 + 0.0j])
    for s in states:
        vec = np.kron(vec, s.amplitudes)
    return PureState(vec)


def measure_xx(
    state: PureState,
    q1: int,
    q2: int,
    rng: np.random.Generator,
    forced: int | None = None,
) -> tuple[PureState, int, float]:
    """Projective X x X parity measurement.

    Returns (state, outcome, probability) with outcome 0 for the +1
    eigenvalue and 1 for -1.
    """
    _check_qubit(state, q1)
    _check_qubit(state, q2)
    amps = state.amplitudes
    swapped = _single(amps, state.n_qubits, q1, _X)
    swapped = _single(swapped, state.n_qubits, q2, _X)
    plus = (amps + swapped) / 2.0
    p_plus = float(np.vdot(plus, plus).real)
    if forced is None:
        outcome = 0 if rng.random() < p_plus else 1
    else:
        outcome = int(forced)
    branch = plus if outcome == 0 else (amps - swapped) / 2.0
    prob = p_plus if outcome == 0 else 1.0 - p_plus
    if prob <= 1e-300:
        raise ValueError("forced outcome has zero probability")
    return PureState(branch / math.sqrt(prob)), outcome, prob


def measure_out_z(
    state: PureState,
    qubit: int,
    rng: np.random.Generator,
    forced: int | None = None,
) -> tuple[PureState, int, float]:
    """Z-basis measurement that removes the measured qubit from the register."""
    _check_qubit(state, qubit)
    if state.n_qubits < 2:
        raise ValueError("cannot measure out the last qubit")
    shaped = np.moveaxis(state.amplitudes.reshape((2,) * state.n_qubits), qubit, 0)
    probs = [float(np.vdot(b, b).real) for b in (shaped[0], shaped[1])]
    if forced is None:
        outcome = 0 if rng.random() < probs[0] else 1
    else:
        outcome = int(forced)
    prob = probs[outcome]
    if prob <= 1e-300:
        raise ValueError("forced outcome has zero probability")
    return PureState(shaped[outcome].ravel() / math.sqrt(prob)), outcome, prob


def _grow(
    state: PureState, snake_qubit: int, rng: np.random.Generator
) -> tuple[PureState, int, list[ProtocolStep]]:
    """Append a |0> qubit and merge it onto ``snake_qubit`` by measuring XX.

    The -1 outcome is frame-fixed with a Z on the new qubit, restoring the
    +1 convention, so the post-merge state is outcome-independent.
    """
    zero = PureState(np.array([1.0, 0.0], dtype=complex))
    merged = _kron([state, zero])
    new_qubit = merged.n_qubits - 1
    merged, outcome, _ = measure_xx(merged, snake_qubit, new_qubit, rng)
    steps = [ProtocolStep("grow", (snake_qubit, new_qubit), outcome)]
    if outcome == 1:
        merged = apply_pauli_z(merged, new_qubit)
        steps.append(ProtocolStep("frame_z", (new_qubit,), 1))
    steps.append(ProtocolStep("split", (snake_qubit, new_qubit)))
    return merged, new_qubit, steps


def _as_logical_input(state: PureState) -> PureState:
    if state.n_qubits != 1:
        raise ValueError("protocol inputs must be single logical qubits")
    return state


def run_single_snake_protocol(
    psi_in: PureState,
    defect_flag: bool,
    phi_err: float,
    seed: int = 0,
    outcomes: Sequence[int] | None = None,
) -> tuple[PureState, ProtocolTrace]:
    """Grow, split, shuttle, then teleport forward or back.

    With ``defect_flag`` false the tail is measured out and an X^m correction
    leaves the head carrying the input (exactly so when phi_err = 0).  With
    ``defect_flag`` true the head is measured out instead; the defect
    rotation commutes with that measurement, so the tail recovers the input
    exactly for every phi_err.  ``outcomes`` forces the final measurement.
    """
    psi = _as_logical_input(psi_in)
    rng = np.random.default_rng(seed)
    forced = None if outcomes is None else int(outcomes[0])

    state, head, steps = _grow(psi, 0, rng)
    tail = 0
    steps.append(ProtocolStep("shuttle", (head,)))
    state = apply_rz(state, head, phi_err)
    steps.append(ProtocolStep("defect", (head,)))

    measured, survivor = (head, tail) if defect_flag else (tail, head)
    state, m, prob = measure_out_z(state, measured, rng, forced)
    steps.append(ProtocolStep("measure_z", (measured,), m))
    if m == 1:
        state = apply_pauli_x(state, 0)
    steps.append(ProtocolStep("correct_x", (survivor,), m))

    trace = ProtocolTrace(tuple(steps), phi_err, prob)
    return state, trace


def run_interacting_protocol(
    psi: PureState,
    psi_prime: PureState,
    success_flag: bool,
    phi_err: float,
    seed: int = 0,
    outcomes: Sequence[int] | None = None,
) -> tuple[PureState, ProtocolTrace]:
    """Entangle two snakes through their heads, then commit or roll back.

    Register order is (tail, head, tail', head').  After the transversal
    CNOT between the heads, success measures out both tails, failure
    measures out both heads (each carrying the defect rotation).  Both
    branches correct X1^m1 X2^(m1+m2): the tail measurement teleports an
    X^m1 byproduct onto the control of the CNOT, and conjugating it
    through the gate copies the exponent onto the target.  Success leaves
    CNOT(psi x psi') on the heads; failure restores psi x psi' on the
    tails for every phi_err.
    """
    a = _as_logical_input(psi)
    b = _as_logical_input(psi_prime)
    rng = np.random.default_rng(seed)
    if outcomes is not None and len(outcomes) != 2:
        raise ValueError("interacting protocol takes two forced outcomes")

    pair1, _, steps = _grow(a, 0, rng)
    pair2, _, steps2 = _grow(b, 0, rng)
    steps.extend(
        ProtocolStep(s.op, tuple(t + 2 for t in s.targets), s.outcome) for s in steps2
    )
    state = _kron([pair1, pair2])
    tail1, head1, tail2, head2 = 0, 1, 2, 3

    steps.append(ProtocolStep("shuttle", (head1, head2)))
    state = apply_cnot(state, head1, head2)
    steps.append(ProtocolStep("cnot", (head1, head2)))
    state = apply_rz(state, head1, phi_err)
    state = apply_rz(state, head2, phi_err)
    steps.append(ProtocolStep("defect", (head1, head2)))

    if success_flag:
        measured = (tail1, tail2)
    else:
        measured = (head1, head2)
    forced = (None, None) if outcomes is None else (int(outcomes[0]), int(outcomes[1]))

    # Measure the higher-indexed qubit first so the lower index stays put.
    lower, higher = sorted(measured)
    state, m2, p2 = measure_out_z(state, higher, rng, forced[1])
    state, m1, p1 = measure_out_z(state, lower, rng, forced[0])
    steps.append(ProtocolStep("measure_z", (lower,), m1))
    steps.append(ProtocolStep("measure_z", (higher,), m2))

    # X^m1 on the CNOT control commutes through as X x X, so both branches
    # share the same correction exponents.
    exponents = (m1, (m1 + m2) % 2)
    for qubit, power in enumerate(exponents):
        if power == 1:
            state = apply_pauli_x(state, qubit)
        steps.append(ProtocolStep("correct_x", (qubit,), power))

    trace = ProtocolTrace(tuple(steps), phi_err, p1 * p2)
    return state, trace


def hydra_state(psi_in: PureState, k_heads: int, seed: int = 0) -> PureState:
    """Tail plus ``k_heads`` heads: alpha|+>|+...+> + beta|->|-...->.

    Built by repeatedly growing from the current head; the frame fix makes
    the result independent of the sampled merge outcomes.  Adjacent pairs
    are stabilised by X x X.
    """
    psi = _as_logical_input(psi_in)
    if not 1 <= k_heads <= 10:
        raise ValueError("k_heads must be between 1 and 10")
    rng = np.random.default_rng(seed)
    state = psi
    latest = 0
    for _ in range(k_heads):
        state, latest, _ = _grow(state, latest, rng)
    return state
