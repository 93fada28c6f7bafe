"""Noise sampling tests: rates, determinism, composition, defect round."""

import math

import numpy as np
import pytest

from snakeqec.geometry import build_rotated_surface_code
from snakeqec.noise import (
    ErrorPattern,
    NoiseParams,
    apply_defect_round,
    cnot_table,
    hook_pairs,
    sample_circuit_noise,
)


def test_params_validation():
    with pytest.raises(ValueError):
        NoiseParams(p=-0.1)
    with pytest.raises(ValueError):
        NoiseParams(p=1.5)
    with pytest.raises(ValueError):
        NoiseParams(p=0.1, rounds=0)
    with pytest.raises(ValueError):
        NoiseParams(p=0.1, omega=4.0)
    assert NoiseParams(p=0.1, omega=0.62).q == pytest.approx(math.sin(0.31) ** 2)


def test_cnot_table_structure():
    layout = build_rotated_surface_code(3)
    sites = cnot_table(layout)
    assert len(sites) == sum(s.weight for s in layout.stabilisers)
    for site in sites:
        stab = layout.stabilisers[site.stab_index]
        assert site.data in stab.support
        if site.kind == "X":
            assert site.hook == ()
        else:
            later = [q for q, ph in zip(stab.support, stab.phases) if ph > site.phase]
            assert site.hook == tuple(later)
    # only two-qubit hook sets are standalone graph mechanisms
    for stab_index, pair in hook_pairs(layout):
        assert layout.stabilisers[stab_index].kind == "Z"
        assert len(pair) == 2


def test_p_zero_empty():
    layout = build_rotated_surface_code(3)
    pat = sample_circuit_noise(layout, NoiseParams(p=0.0, rounds=3), seed=7)
    assert pat == ErrorPattern()


def test_seed_determinism():
    layout = build_rotated_surface_code(3)
    params = NoiseParams(p=0.3, rounds=4)
    a = sample_circuit_noise(layout, params, seed=123)
    b = sample_circuit_noise(layout, params, seed=123)
    c = sample_circuit_noise(layout, params, seed=124)
    assert a == b
    assert a != c


def test_compose_involutive():
    layout = build_rotated_surface_code(3)
    pat = sample_circuit_noise(layout, NoiseParams(p=0.2, rounds=3), seed=5)
    assert pat.compose(pat) == ErrorPattern()
    assert pat.compose(ErrorPattern()) == pat


def test_measurement_flip_rate():
    # spec pins meas_flips as i.i.d. Bernoulli(p) per decoded outcome
    layout = build_rotated_surface_code(3)
    p = 1e-3
    rounds = 5
    shots = 50_000
    params = NoiseParams(p=p, rounds=rounds)
    n_x = len(layout.x_stabilisers())
    trials = shots * rounds * n_x
    count = 0
    for s in range(shots):
        count += len(sample_circuit_noise(layout, params, seed=(401, s)).meas_flips)
    mean = trials * p
    sigma = math.sqrt(trials * p * (1 - p))
    assert abs(count - mean) <= 3 * sigma


def test_total_z_flip_rate_matches_mechanism_budget():
    # expected flips/shot from the mechanism enumeration; XOR collisions are
    # O(p^2) and invisible at this precision
    layout = build_rotated_surface_code(3)
    p = 2e-3
    rounds = 4
    params = NoiseParams(p=p, rounds=rounds)
    sites = cnot_table(layout)
    e_idle = rounds * layout.n_data * 2 * p / 3
    e_cnot = rounds * len(sites) * p * (8 / 15)
    e_hook = rounds * sum(len(s.hook) for s in sites) * p * (8 / 15)
    expect = e_idle + e_cnot + e_hook
    shots = 40_000
    count = 0
    for s in range(shots):
        count += len(sample_circuit_noise(layout, params, seed=(402, s)).z_flips)
    sigma = math.sqrt(expect * shots)  # Poisson-ish bound
    assert abs(count - expect * shots) <= 4 * sigma


def test_defect_round_trivial_angles():
    layout = build_rotated_surface_code(3)
    base = sample_circuit_noise(layout, NoiseParams(p=1e-3, rounds=3), seed=9)
    assert apply_defect_round(base, layout, 0.0, 1, seed=1) == base
    hit = apply_defect_round(base, layout, math.pi, 1, seed=1)
    added = hit.z_flips ^ base.z_flips
    assert added == frozenset((q, 1) for q in range(9))
    with pytest.raises(ValueError):
        apply_defect_round(base, layout, 3.5, 1, seed=1)
    with pytest.raises(ValueError):
        apply_defect_round(base, layout, 0.3, -1, seed=1)


def test_defect_round_composition_cancels():
    layout = build_rotated_surface_code(3)
    base = ErrorPattern()
    once = apply_defect_round(base, layout, 0.62, 2, seed=77)
    twice = apply_defect_round(once, layout, 0.62, 2, seed=77)
    assert twice == base


def test_defect_rate_statistical():
    layout = build_rotated_surface_code(5)
    omega = 0.62
    q = math.sin(omega / 2) ** 2
    shots = 20_000
    count = 0
    for s in range(shots):
        pat = apply_defect_round(ErrorPattern(), layout, omega, 0, seed=(403, s))
        count += len(pat.z_flips)
    trials = shots * layout.n_data
    sigma = math.sqrt(trials * q * (1 - q))
    assert abs(count - trials * q) <= 3 * sigma
    assert q == pytest.approx(0.09306, abs=1e-4)
