"""Z-sector circuit-level noise for the shuttled surface code.

Only the Z components of every channel are tracked: defects are pure
dephasing and CSS decoding of the X-stabiliser syndrome never sees X
components.  Each mechanism lands on a round boundary: flips from idle
noise and from the defect channel act at the start of their round, flips
created by entangling gates mid-cycle become effective at the next round
boundary.  Z-ancilla initialisation and readout noise is dropped: its only
Z-sector action is a full-support flip, which is a stabiliser with zero
detector footprint and even overlap with the logical support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import CodeLayout

# Z component lookup for the 15 non-identity two-qubit Paulis; entry i maps
# to the pair (control, target) with code I=0, X=1, Y=2, Z=3.
_PAULI_PAIRS = tuple(
    (c, t) for c in range(4) for t in range(4) if (c, t) != (0, 0)
)
_CTRL_HAS_Z = np.array([c >= 2 for c, _ in _PAULI_PAIRS], dtype=bool)
_TARG_HAS_Z = np.array([t >= 2 for _, t in _PAULI_PAIRS], dtype=bool)


@dataclass(frozen=True)
class NoiseParams:
    """Circuit noise strength, defect angle and cycle count.

    ``q`` is the defect dephasing rate sin²(ω/2) implied by the angle.
    """

    p: float
    omega: float = 0.0
    rounds: int = 1

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be a probability, got {self.p}")
        if not -math.pi <= self.omega <= math.pi:
            raise ValueError(f"omega must lie in [-pi, pi], got {self.omega}")
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")

    @property
    def q(self) -> float:
        return math.sin(self.omega / 2.0) ** 2


@dataclass(frozen=True)
class ErrorPattern:
    """Sampled Z-sector error record.

    z_flips : frozenset[(data index, round)]
        Persistent data Z flips, effective from the start of the given
        round (the appended readout layer may appear as round ``rounds``).
    meas_flips : frozenset[(stabiliser index, round)]
        Classical flips of decoded (X-ancilla) measurement outcomes.
    outcome_flips : frozenset[(stabiliser index, round)]
        Outcome toggles of quantum origin (ancilla initialisation noise and
        ancilla-side gate noise); same detector footprint as meas_flips but
        kept apart so measurement flips stay i.i.d. at rate p.
    """

    z_flips: frozenset = field(default_factory=frozenset)
    meas_flips: frozenset = field(default_factory=frozenset)
    outcome_flips: frozenset = field(default_factory=frozenset)

    def compose(self, other: "ErrorPattern") -> "ErrorPattern":
        """Mod-2 composition; involutive, so x.compose(x) is empty."""
        return ErrorPattern(
            self.z_flips ^ other.z_flips,
            self.meas_flips ^ other.meas_flips,
            self.outcome_flips ^ other.outcome_flips,
        )


@dataclass(frozen=True)
class CnotSite:
    """One entangling gate of the extraction cycle.

    ``hook`` lists the data qubits a Z on the ancilla spreads to when the
    noise strikes right after this gate (support partners met at later
    phases); empty for X ancillas, whose control-side Z never spreads.
    """

    stab_index: int
    kind: str
    data: int
    phase: int
    hook: tuple[int, ...]


def cnot_table(layout: CodeLayout) -> tuple[CnotSite, ...]:
    """All entangling gates of one cycle, in stabiliser-then-phase order."""
    sites = []
    for stab in layout.stabilisers:
        for q, phase in zip(stab.support, stab.phases):
            if stab.kind == "Z":
                hook = tuple(
                    q2 for q2, ph2 in zip(stab.support, stab.phases) if ph2 > phase
                )
            else:
                hook = ()
            sites.append(CnotSite(stab.index, stab.kind, q, phase, hook))
    return tuple(sites)


def hook_pairs(layout: CodeLayout) -> tuple[tuple[int, tuple[int, int]], ...]:
    """Two-qubit hook flip sets, as (stabiliser index, data pair).

    One- and three-qubit hook sets reduce to single data flips modulo the
    stabiliser itself, so only the two-qubit case adds a mechanism of its
    own to the detection graph.
    """
    out = []
    for site in cnot_table(layout):
        if len(site.hook) == 2:
            out.append((site.stab_index, (site.hook[0], site.hook[1])))
    return tuple(out)


def sample_circuit_noise(
    layout: CodeLayout, params: NoiseParams, seed
) -> ErrorPattern:
    """Sample one shot of circuit-level Z-sector noise.

    Mechanisms and rates per round, all derived from the depolarising
    strength p:

    - data idle: Z flip with probability 2p/3 at the round start;
    - X-ancilla initialisation: outcome toggle with probability 2p/3;
    - X-ancilla measurement: classical flip with probability p;
    - each entangling gate: with probability p one of the 15 two-qubit
      Paulis, uniformly; Z components on data become flips at the next
      round boundary, Z components on an X ancilla toggle its outcome,
      Z components on a Z ancilla hook onto the data partners met later
      in the cycle.
    """
    rng = np.random.default_rng(seed)
    p = params.p
    rounds = params.rounds
    n = layout.n_data
    x_stabs = layout.x_stabilisers()
    sites = cnot_table(layout)

    z_flips: set[tuple[int, int]] = set()
    meas_flips: set[tuple[int, int]] = set()
    outcome_flips: set[tuple[int, int]] = set()

    def toggle(store, key):
        if key in store:
            store.discard(key)
        else:
            store.add(key)

    # independent single-location channels, vectorised over (round, site)
    idle = np.argwhere(rng.random((rounds, n)) < 2.0 * p / 3.0)
    for t, q in idle:
        toggle(z_flips, (int(q), int(t)))

    init = np.argwhere(rng.random((rounds, len(x_stabs))) < 2.0 * p / 3.0)
    for t, i in init:
        toggle(outcome_flips, (x_stabs[i].index, int(t)))

    meas = np.argwhere(rng.random((rounds, len(x_stabs))) < p)
    for t, i in meas:
        toggle(meas_flips, (x_stabs[i].index, int(t)))

    hits = np.argwhere(rng.random((rounds, len(sites))) < p)
    if len(hits):
        paulis = rng.integers(0, 15, size=len(hits))
        for (t, j), k in zip(hits, paulis):
            site = sites[j]
            t = int(t)
            if site.kind == "X":
                if _CTRL_HAS_Z[k]:
                    toggle(outcome_flips, (site.stab_index, t))
                if _TARG_HAS_Z[k]:
                    toggle(z_flips, (site.data, t + 1))
            else:
                if _CTRL_HAS_Z[k]:
                    toggle(z_flips, (site.data, t + 1))
                if _TARG_HAS_Z[k]:
                    for q2 in site.hook:
                        toggle(z_flips, (q2, t + 1))

    return ErrorPattern(
        frozenset(z_flips), frozenset(meas_flips), frozenset(outcome_flips)
    )


def apply_defect_round(
    pattern: ErrorPattern,
    layout: CodeLayout,
    omega: float,
    round_index: int,
    seed,
) -> ErrorPattern:
    """Compose one round of defect dephasing into an existing pattern.

    Every data qubit is flipped independently with probability sin²(ω/2)
    at the start of the given round, i.e. before that round's entangling
    gates.  Flips are composed mod 2 with whatever is already there.
    """
    if not -math.pi <= omega <= math.pi:
        raise ValueError(f"omega must lie in [-pi, pi], got {omega}")
    if round_index < 0:
        raise ValueError(f"round_index must be >= 0, got {round_index}")
    q = math.sin(omega / 2.0) ** 2
    rng = np.random.default_rng(seed)
    struck = np.flatnonzero(rng.random(layout.n_data) < q)
    extra = frozenset((int(i), round_index) for i in struck)
    return pattern.compose(ErrorPattern(z_flips=extra))
