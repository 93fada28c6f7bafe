"""Rotated surface code layout and its embedding on a two-rail shuttling device.

The code is laid out on a ``d x d`` grid of data qubits.  Stabiliser
ancillas sit on the corners of the grid cells; the checkerboard colouring
assigns X plaquettes to odd corner-coordinate sums and Z plaquettes to even
sums, with weight-2 arcs on the boundary (X arcs on the top and bottom rows,
Z arcs on the left and right columns).  The logical X operator runs along
the first column, parallel to the shuttle axis, and the logical Z operator
runs along the first row, perpendicular to it.

For shuttling, data qubits are serialised column by column onto a mobile
rail while ancillas occupy a static rail.  One stabiliser cycle consists of
four interaction phases; between phases the mobile rail is displaced so
that each ancilla meets the four diagonal neighbours of its plaquette.  The
four displacement segments have total magnitude ``2 d + 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

# Interaction phases, in schedule order.  The rail offset at phase k aligns
# every ancilla with the plaquette partner in the corresponding role.
PHASE_ROLES = ("NW", "SW", "NE", "SE")
N_PHASES = 4


@dataclass(frozen=True)
class Stabiliser:
    """A single stabiliser generator.

    Attributes
    ----------
    index : int
        Position in ``CodeLayout.stabilisers``.
    kind : str
        ``"X"`` or ``"Z"``.
    corner : tuple[int, int]
        Ancilla corner coordinate ``(row, col)`` with ``0 <= row, col <= d``.
    support : tuple[int, ...]
        Data-qubit indices, ordered by interaction phase.
    phases : tuple[int, ...]
        Interaction phase (0..3) of each support qubit, parallel to
        ``support``.
    """

    index: int
    kind: str
    corner: tuple[int, int]
    support: tuple[int, ...]
    phases: tuple[int, ...]

    @property
    def weight(self) -> int:
        return len(self.support)

    def phase_of(self, data_index: int) -> int:
        return self.phases[self.support.index(data_index)]


@dataclass(frozen=True)
class CodeLayout:
    """Rotated surface code of odd distance ``d``."""

    distance: int
    data_coords: tuple[tuple[int, int], ...]
    stabilisers: tuple[Stabiliser, ...]
    logical_x: tuple[int, ...]
    logical_z: tuple[int, ...]

    @property
    def n_data(self) -> int:
        return self.distance * self.distance

    def data_index(self, row: int, col: int) -> int:
        return row * self.distance + col

    def x_stabilisers(self) -> tuple[Stabiliser, ...]:
        return tuple(s for s in self.stabilisers if s.kind == "X")

    def z_stabilisers(self) -> tuple[Stabiliser, ...]:
        return tuple(s for s in self.stabilisers if s.kind == "Z")


def build_rotated_surface_code(distance: int) -> CodeLayout:
    """Construct the rotated surface code of the given odd distance.

    Parameters
    ----------
    distance : int
        Code distance; must be an odd integer >= 1.

    Returns
    -------
    CodeLayout
        ``d**2`` data qubits and ``d**2 - 1`` stabilisers, half of each
        kind, with weights between 2 and 4.

    Raises
    ------
    ValueError
        If ``distance`` is even or smaller than 1.
    """
    d = distance
    if d < 1 or d % 2 == 0:
        raise ValueError(f"distance must be odd and >= 1, got {d}")

    data_coords = tuple((r, c) for r in range(d) for c in range(d))

    def in_grid(r: int, c: int) -> bool:
        return 0 <= r < d and 0 <= c < d

    stabilisers: list[Stabiliser] = []
    for ar in range(d + 1):
        for ac in range(d + 1):
            kind = "X" if (ar + ac) % 2 == 1 else "Z"
            # Boundary arcs: X only on the top/bottom rows, Z only on the
            # left/right columns.  Corners host nothing.
            if (ar == 0 or ar == d) and kind != "X":
                continue
            if (ac == 0 or ac == d) and kind != "Z":
                continue
            # Plaquette partners by role: NW, SW, NE, SE of the corner.
            partners = (
                (ar - 1, ac - 1),
                (ar, ac - 1),
                (ar - 1, ac),
                (ar, ac),
            )
            support = []
            phases = []
            for phase, (r, c) in enumerate(partners):
                if in_grid(r, c):
                    support.append(r * d + c)
                    phases.append(phase)
            if len(support) < 2:
                continue
            stabilisers.append(
                Stabiliser(
                    index=len(stabilisers),
                    kind=kind,
                    corner=(ar, ac),
                    support=tuple(support),
                    phases=tuple(phases),
                )
            )

    logical_x = tuple(r * d + 0 for r in range(d))   # first column, shuttle axis
    logical_z = tuple(0 * d + c for c in range(d))   # first row

    return CodeLayout(
        distance=d,
        data_coords=data_coords,
        stabilisers=tuple(stabilisers),
        logical_x=logical_x,
        logical_z=logical_z,
    )


@dataclass(frozen=True)
class SnakeEmbedding:
    """Serialisation of a layout onto the mobile/static rail pair.

    Attributes
    ----------
    layout : CodeLayout
    data_slots : tuple[int, ...]
        Mobile-rail slot of each data qubit (column-major order).
    ancilla_slots : tuple[int, ...]
        Static-rail slot of each stabiliser ancilla.
    interaction_offsets : tuple[int, ...]
        Mobile-rail offset at each of the four interaction phases.
    shuttle_schedule : tuple[int, ...]
        Signed rail displacements applied after phases 0..2 and, as the
        last entry, the return to the home position.
    """

    layout: CodeLayout
    data_slots: tuple[int, ...]
    ancilla_slots: tuple[int, ...]
    interaction_offsets: tuple[int, ...]
    shuttle_schedule: tuple[int, ...]

    @property
    def total_displacement(self) -> int:
        return sum(abs(step) for step in self.shuttle_schedule)


def embed_snake(layout: CodeLayout) -> SnakeEmbedding:
    """Embed a layout as a snake: data on the mobile rail, ancillas static.

    Data qubit ``(r, c)`` occupies mobile slot ``c * d + r`` so that the
    shuttle axis runs along the columns.  The ancilla of the plaquette with
    corner ``(ar, ac)`` sits at static slot ``(ac - 1) d + ar - 1``, the
    home-position slot of its NW partner.  A cycle then needs only the four
    rail offsets ``0, -1, -d, -(d+1)``: SE and NW partners of any plaquette
    sit ``d + 1`` slots apart, so the segments traverse ``2 d + 2`` slots
    in total.
    """
    d = layout.distance
    data_slots = tuple(c * d + r for (r, c) in layout.data_coords)
    ancilla_slots = tuple(
        (ac - 1) * d + ar - 1 for s in layout.stabilisers for (ar, ac) in (s.corner,)
    )
    offsets = (0, -1, -d, -(d + 1))
    schedule = (-1, -(d - 1), -1, d + 1)
    return SnakeEmbedding(
        layout=layout,
        data_slots=data_slots,
        ancilla_slots=ancilla_slots,
        interaction_offsets=offsets,
        shuttle_schedule=schedule,
    )


@dataclass(frozen=True)
class BatchState:
    """Progress of a semi-transversal CNOT between two equal-distance snakes.

    ``applied_pairs`` holds the data indices (shared between control and
    target layouts) whose pairwise CNOT has already fired.
    """

    layout: CodeLayout
    applied_pairs: frozenset[int]
    batch_plan: tuple[tuple[int, ...], ...]

    def after_batches(self, n: int) -> "BatchState":
        if not 0 <= n <= len(self.batch_plan):
            raise ValueError(f"batch count {n} outside plan of length {len(self.batch_plan)}")
        applied: set[int] = set()
        for batch in self.batch_plan[:n]:
            applied.update(batch)
        return BatchState(self.layout, frozenset(applied), self.batch_plan)


def make_batch_plan(layout: CodeLayout, batch_size: int | None = None) -> BatchState:
    """Default batching: one row of ``d`` pairs at a time, top row first."""
    d = layout.distance
    if batch_size is None:
        batch_size = d
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    order = [r * d + c for r in range(d) for c in range(d)]
    plan = tuple(
        tuple(order[i : i + batch_size]) for i in range(0, len(order), batch_size)
    )
    return BatchState(layout, frozenset(), plan)


@dataclass(frozen=True)
class MeasurableSets:
    """Stabiliser indices measurable mid-way through a batched CNOT."""

    control_x: tuple[int, ...]
    control_z: tuple[int, ...]
    target_x: tuple[int, ...]
    target_z: tuple[int, ...]


def measurable_stabilisers(
    layout_control: CodeLayout,
    layout_target: CodeLayout,
    applied_pairs: Iterable[int],
) -> MeasurableSets:
    """Stabilisers measurable on each snake after a partial transversal CNOT.

    A CNOT pair maps control-X onto the target and target-Z onto the
    control, so an X stabiliser of the control (Z of the target) whose
    support overlaps the applied pairs only partially picks up a dangling
    factor on the partner snake and cannot be measured; full or empty
    overlap keeps it measurable.  Z stabilisers of the control and X
    stabilisers of the target commute with every CNOT and survive intact.

    The pairing is index-aligned between the two snakes, so both layouts
    must share the same distance.
    """
    if layout_control.distance != layout_target.distance:
        raise ValueError(
            "control and target layouts must have equal distance, got "
            f"{layout_control.distance} and {layout_target.distance}"
        )
    applied = frozenset(applied_pairs)
    n = layout_control.n_data
    for q in applied:
        if not 0 <= q < n:
            raise ValueError(f"applied pair index {q} outside data range 0..{n - 1}")

    def clean(stab: Stabiliser) -> bool:
        overlap = len(applied.intersection(stab.support))
        return overlap == 0 or overlap == stab.weight

    control_x = tuple(s.index for s in layout_control.stabilisers if s.kind == "X" and clean(s))
    control_z = tuple(s.index for s in layout_control.stabilisers if s.kind == "Z")
    target_x = tuple(s.index for s in layout_target.stabilisers if s.kind == "X")
    target_z = tuple(s.index for s in layout_target.stabilisers if s.kind == "Z" and clean(s))
    return MeasurableSets(
        control_x=control_x,
        control_z=control_z,
        target_x=target_x,
        target_z=target_z,
    )
