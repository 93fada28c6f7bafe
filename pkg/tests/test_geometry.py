"""Layout, embedding and batched-CNOT measurability tests."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snakeqec.geometry import (
    build_rotated_surface_code,
    embed_snake,
    make_batch_plan,
    measurable_stabilisers,
)

from oracles import (
    Gf2Span,
    conjugate_through_cnots,
    pauli_vec,
    replay_adjacency_events,
    symplectic_product,
)


def stab_vec(layout, stab, n_total, block, n_block):
    """Symplectic vector of a stabiliser embedded in a two-snake register."""
    qubits = [q + block * n_block for q in stab.support]
    if stab.kind == "X":
        return pauli_vec(n_total, xs=qubits)
    return pauli_vec(n_total, zs=qubits)


def joint_stabiliser_span(layout):
    """GF(2) span of both snakes' stabiliser generators."""
    n = layout.n_data
    span = Gf2Span(4 * n)
    for stab in layout.stabilisers:
        for block in (0, 1):
            span.add(stab_vec(layout, stab, 2 * n, block, n))
    return span


def oracle_measurable(layout, applied):
    """Pauli-propagation oracle: indices of measurable X/Z stabilisers per snake.

    A stabiliser survives iff its conjugation through the applied
    transversal CNOTs stays inside the joint stabiliser group.
    """
    n = layout.n_data
    span = joint_stabiliser_span(layout)
    out = {"control_x": [], "control_z": [], "target_x": [], "target_z": []}
    for stab in layout.stabilisers:
        for block, side in ((0, "control"), (1, "target")):
            vec = stab_vec(layout, stab, 2 * n, block, n)
            conj = conjugate_through_cnots(vec, sorted(applied), n)
            if span.contains(conj):
                out[f"{side}_{stab.kind.lower()}"].append(stab.index)
    return {k: tuple(v) for k, v in out.items()}


@pytest.mark.parametrize("d", [1, 3, 5, 7])
def test_counts_and_weights(d):
    layout = build_rotated_surface_code(d)
    assert layout.n_data == d * d
    xs = layout.x_stabilisers()
    zs = layout.z_stabilisers()
    assert len(xs) == (d * d - 1) // 2
    assert len(zs) == (d * d - 1) // 2
    for s in layout.stabilisers:
        assert s.weight in (2, 4)
        ar, ac = s.corner
        if s.weight == 2:
            # arcs only on the outer boundary, X on rows, Z on columns
            if s.kind == "X":
                assert ar in (0, d)
            else:
                assert ac in (0, d)
        else:
            assert 1 <= ar <= d - 1 and 1 <= ac <= d - 1
        assert s.phases == tuple(sorted(s.phases))
        assert len(set(s.phases)) == s.weight


def test_trivial_examples():
    d1 = build_rotated_surface_code(1)
    assert d1.n_data == 1
    assert len(d1.stabilisers) == 0
    d3 = build_rotated_surface_code(3)
    assert d3.n_data == 9
    assert len(d3.x_stabilisers()) == 4
    assert len(d3.z_stabilisers()) == 4


@pytest.mark.parametrize("d", [2, 0, -3, 4])
def test_rejects_bad_distance(d):
    with pytest.raises(ValueError):
        build_rotated_surface_code(d)


@pytest.mark.parametrize("d", [1, 3, 5, 7, 9])
def test_commutation_and_logicals(d):
    layout = build_rotated_surface_code(d)
    n = layout.n_data
    vecs = []
    for s in layout.stabilisers:
        xs = s.support if s.kind == "X" else ()
        zs = s.support if s.kind == "Z" else ()
        vecs.append(pauli_vec(n, xs=xs, zs=zs))
    for i, a in enumerate(vecs):
        for b in vecs[i + 1 :]:
            assert symplectic_product(a, b) == 0
    lx = pauli_vec(n, xs=layout.logical_x)
    lz = pauli_vec(n, zs=layout.logical_z)
    for v in vecs:
        assert symplectic_product(lx, v) == 0
        assert symplectic_product(lz, v) == 0
    assert symplectic_product(lx, lz) == 1
    assert len(layout.logical_x) == d
    assert len(layout.logical_z) == d


@pytest.mark.parametrize("d,total", [(3, 8), (5, 12), (7, 16)])
def test_shuttle_totals(d, total):
    emb = embed_snake(build_rotated_surface_code(d))
    assert len(emb.shuttle_schedule) == 4
    assert emb.total_displacement == total == 2 * d + 2
    assert sum(emb.shuttle_schedule) == 0  # cycle returns to home position
    assert sorted(emb.data_slots) == list(range(d * d))


@pytest.mark.parametrize("d", [1, 3, 5, 7])
def test_schedule_replay_meets_support_exactly_once(d):
    emb = embed_snake(build_rotated_surface_code(d))
    events = replay_adjacency_events(emb)
    expected = [
        (s.index, q) for s in emb.layout.stabilisers for q in s.support
    ]
    assert sorted(events) == sorted(expected)


def test_replay_matches_declared_phases():
    # the offset at which a support qubit is met must be the declared phase
    emb = embed_snake(build_rotated_surface_code(5))
    layout = emb.layout
    slot_of = emb.data_slots
    for s in layout.stabilisers:
        for q, phase in zip(s.support, s.phases):
            aligned = emb.ancilla_slots[s.index] - emb.interaction_offsets[phase]
            assert slot_of[q] == aligned


def test_batch_plan_prefixes():
    layout = build_rotated_surface_code(3)
    state = make_batch_plan(layout)
    assert len(state.batch_plan) == 3
    assert all(len(b) == 3 for b in state.batch_plan)
    assert state.applied_pairs == frozenset()
    prev = frozenset()
    for k in range(4):
        cur = state.after_batches(k).applied_pairs
        assert prev <= cur
        prev = cur
    assert prev == frozenset(range(9))
    with pytest.raises(ValueError):
        state.after_batches(4)
    with pytest.raises(ValueError):
        state.after_batches(-1)
    with pytest.raises(ValueError):
        make_batch_plan(layout, batch_size=0)


def test_measurable_trivial_cases():
    layout = build_rotated_surface_code(3)
    n_x = len(layout.x_stabilisers())
    n_z = len(layout.z_stabilisers())
    for applied in (frozenset(), frozenset(range(9))):
        sets = measurable_stabilisers(layout, layout, applied)
        assert len(sets.control_x) == n_x
        assert len(sets.control_z) == n_z
        assert len(sets.target_x) == n_x
        assert len(sets.target_z) == n_z


def test_measurable_errors():
    d3 = build_rotated_surface_code(3)
    d5 = build_rotated_surface_code(5)
    with pytest.raises(ValueError):
        measurable_stabilisers(d3, d5, frozenset())
    with pytest.raises(ValueError):
        measurable_stabilisers(d3, d3, frozenset({9}))


def test_measurable_matches_oracle_exhaustive_d3():
    layout = build_rotated_surface_code(3)
    for mask in range(512):
        applied = frozenset(q for q in range(9) if mask >> q & 1)
        sets = measurable_stabilisers(layout, layout, applied)
        want = oracle_measurable(layout, applied)
        assert sets.control_x == want["control_x"]
        assert sets.control_z == want["control_z"]
        assert sets.target_x == want["target_x"]
        assert sets.target_z == want["target_z"]


def test_measurable_matches_oracle_batch_prefixes_d5():
    layout = build_rotated_surface_code(5)
    state = make_batch_plan(layout)
    for k in range(len(state.batch_plan) + 1):
        applied = state.after_batches(k).applied_pairs
        sets = measurable_stabilisers(layout, layout, applied)
        want = oracle_measurable(layout, applied)
        assert sets.control_x == want["control_x"]
        assert sets.target_z == want["target_z"]


@settings(max_examples=60, deadline=None)
@given(st.frozensets(st.integers(min_value=0, max_value=24)))
def test_measurable_matches_oracle_random_d5(applied):
    layout = build_rotated_surface_code(5)
    sets = measurable_stabilisers(layout, layout, applied)
    want = oracle_measurable(layout, applied)
    assert sets.control_x == want["control_x"]
    assert sets.control_z == want["control_z"]
    assert sets.target_x == want["target_x"]
    assert sets.target_z == want["target_z"]
