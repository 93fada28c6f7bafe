"""End-to-end acceptance checks, one test per headline requirement.

Every test pins the tolerance it commits to and runs from fixed seeds, so
a rerun reproduces the same verdicts.  Four companion tests are marked
as strict expected failures: they assert targets the implemented model
demonstrably cannot reach (the analysis lives with the failing assert),
and they will start erroring if the behaviour ever changes.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from snakeqec.cli import main
from snakeqec.decoder import build_detection_graph, complementary_gap, decode_mwpm
from snakeqec.dephasing import (
    OUParams,
    ShuttleTrajectory,
    infidelity_curve,
    phase_variance,
    sample_ou_phase,
)
from snakeqec.distributions import AngleDistribution
from snakeqec.geometry import build_rotated_surface_code
from snakeqec.io import read_json
from snakeqec.latticework import (
    StabiliserCycle,
    TimingParams,
    percolation_threshold,
    shuttle_time_model,
)
from snakeqec.monitor import (
    MonitorConfig,
    false_negative_rate,
    false_positive_rate,
    postselected_angle_density,
    qfi_factor,
    task2_rms,
)
from snakeqec.montecarlo import (
    ExperimentConfig,
    estimate_logical_rate,
    gap_rejection_rate,
    gap_statistics,
    postselected_rate,
)
from snakeqec.resilience import (
    LogLinearRate,
    ResilienceInputs,
    extrapolate_loglinear,
    extrapolate_rate_models,
    rejection_series,
    resilience_report,
    total_logical_rate,
)

from oracles import EdgeGraph, min_weight_by_class

PHYS_P = 1e-3
SHOTS = 20_000


# --- 1: defect threshold ------------------------------------------------


def test_01_defect_threshold_band(tmp_path):
    """Crossing of the d=3/5/7 defect-rate curves sits at 0.62 +- 0.08 rad."""
    t0 = time.perf_counter()
    rc = main([
        "threshold", "--d", "3,5,7", "--p", "0.001",
        "--omega", "0.46,0.54,0.62,0.70", "--shots", str(SHOTS),
        "--seed", "7", "--out", str(tmp_path),
    ])
    elapsed = time.perf_counter() - t0
    assert rc == 0
    result = read_json(tmp_path / "threshold.json")
    assert result["found"]
    assert 0.62 - 0.08 <= result["omega_th"] <= 0.62 + 0.08
    # desk-scale promise: the full sweep finishes in minutes
    assert elapsed < 600.0


# --- 2: gap-based rejection rate ----------------------------------------


def test_02_gap_rejection_band():
    """g_min=(d+1)/2 rejects 2-7% of defect-free shots for d=3,5,7,9."""
    for d in (3, 5, 7, 9):
        cfg = ExperimentConfig(distances=(d,), p=PHYS_P, omega_grid=(0.0, 0.1),
                               shots=SHOTS, seed=0, g_min_rule="half")
        est = gap_rejection_rate(cfg, d)
        assert 0.02 <= est.rate <= 0.07, f"d={d}: {est.rate}"


@pytest.mark.xfail(
    strict=True,
    reason="measured 8.7% +- 0.4%: at d=3 the mass below gap 3 is "
    "P(gap=0)+P(gap=1)+P(gap=2) = 0.55%+4.96%+3.21%, and the pinned "
    "noise channel weights leave no headroom to push it past 10%",
)
def test_02_tighter_gap_cut_rejects_over_ten_percent():
    """g_min=(d+3)/2 is claimed to reject more than 10% at d=3."""
    cfg = ExperimentConfig(distances=(3,), p=PHYS_P, omega_grid=(0.0, 0.1),
                           shots=SHOTS, seed=0, g_min_rule="half-plus")
    est = gap_rejection_rate(cfg, 3)
    assert est.rate > 0.10


# --- 3: complementary gap exactness -------------------------------------


def _exhaustive_graph(graph):
    return EdgeGraph(
        n_detectors=graph.n_detectors,
        edges=[(e.u, e.v) for e in graph.edges],
        left=graph.boundary_left,
        right=graph.boundary_right,
    )


def test_03_complementary_gap_exact_values():
    """Empty syndrome at d=3 has gap exactly 3; single events have gap >= 1;
    every value matches exhaustive minimum-weight enumeration."""
    layout = build_rotated_surface_code(3)
    graph = build_detection_graph(layout, rounds=1, measurement_noise=False)
    oracle = _exhaustive_graph(graph)

    w0, w1 = min_weight_by_class(oracle, frozenset())
    empty = complementary_gap(graph, frozenset())
    assert (w0, w1) == (0, 3)
    assert empty.gap == abs(w0 - w1) == 3

    gaps = []
    for stab in layout.x_stabilisers():
        syndrome = frozenset({graph.detector_id(stab.index, 0)})
        got = complementary_gap(graph, syndrome)
        ow0, ow1 = min_weight_by_class(oracle, syndrome)
        assert got.weights == (ow0, ow1)
        assert got.gap == abs(ow0 - ow1)
        gaps.append(got.gap)
    assert min(gaps) == 1


@pytest.mark.xfail(
    strict=True,
    reason="a single event at column c has class weights (d-c, c), so its "
    "gap |d-2c| is odd whenever d is odd; gap 0 needs an even distance",
)
def test_03_single_central_event_zero_gap():
    """A central single event is claimed to produce a zero gap."""
    layout = build_rotated_surface_code(3)
    graph = build_detection_graph(layout, rounds=1, measurement_noise=False)
    gaps = [
        complementary_gap(graph, {graph.detector_id(s.index, 0)}).gap
        for s in layout.x_stabilisers()
    ]
    assert 0 in gaps


# --- 4: post-selection gain ---------------------------------------------


def test_04_postselection_gain_window():
    """At d=7 and omega in [0.15, 0.45] the gap-accepted logical rate is at
    most 1% of the unconditioned rate, and never above it."""
    window = (0.15, 0.25, 0.35, 0.45)
    cfg = ExperimentConfig(distances=(7,), p=PHYS_P, omega_grid=window,
                           shots=SHOTS, seed=11, g_min_rule="half")
    for omega in window:
        post = postselected_rate(cfg, 7, omega)
        raw = estimate_logical_rate(cfg, 7, omega)
        assert raw.rate > 0, f"omega={omega}: unconditioned rate unresolved"
        assert post.rate <= raw.rate
        assert post.rate <= 0.01 * raw.rate, (
            f"omega={omega}: {post.rate} vs 1% of {raw.rate}")


# --- 5: monitor ensemble detection rates --------------------------------


def test_05_monitor_detection_error_rates():
    """N=900, lambda=0.2%: P- equals 1.4e-8 within a factor 1.5 and P+ sits
    in [3%, 8%]; both analytic and sub-second."""
    cfg = MonitorConfig()  # N=900, lam=0.002, omega_max=0.3, omega_hat_max=0.075
    t0 = time.perf_counter()
    p_minus = false_negative_rate(cfg)
    p_plus = false_positive_rate(cfg)
    elapsed = time.perf_counter() - t0
    assert 1.4e-8 / 1.5 <= p_minus <= 1.4e-8 * 1.5
    assert 0.03 <= p_plus <= 0.08
    assert elapsed < 1.0


# --- 6: monitor angle estimation ----------------------------------------


def test_06_monitor_angle_estimation_accuracy():
    """N=800, lambda=0.2%: rms error <= 0.05 at the cardinal angles with the
    information bound saturated within 10%; <= 0.1 per batch of 200; worst
    case within sqrt(2) * 1.1 of the bound at the diagonal angles."""
    cfg = MonitorConfig(N=800)
    for omega in (0.0, math.pi / 2, -math.pi / 2, math.pi, -math.pi):
        stats = task2_rms(omega, cfg)
        assert stats.rms <= 0.05
        assert stats.rms <= 1.10 * stats.cr_bound

    batch = MonitorConfig(N=200)
    for omega in (0.0, math.pi / 2, -math.pi / 2, math.pi, -math.pi):
        assert task2_rms(omega, batch).rms <= 0.1

    for omega in (math.pi / 4, -math.pi / 4, 3 * math.pi / 4, -3 * math.pi / 4):
        stats = task2_rms(omega, cfg)
        assert stats.rms <= math.sqrt(2.0) * 1.1 * stats.cr_bound


# --- 7: noisy information bound -----------------------------------------


def test_07_noisy_information_bound_factor():
    """Readout noise keeps at least 1 - 2.5*lambda of the ideal information
    for lambda <= 0.7%; at lambda = 0.2% the bound shifts by about 0.25%."""
    for lam in np.linspace(0.0, 0.007, 71):
        assert qfi_factor(float(lam)) >= 1.0 - 2.5 * lam - 1e-12
    shift = 1.0 / math.sqrt(qfi_factor(0.002)) - 1.0
    assert shift == pytest.approx(0.0025, rel=0.05)
    assert shift < 0.01


# --- 8: shuttling dephasing model ---------------------------------------

_OU = OUParams()
_SPEEDS = (1.0, 2.0, 5.0, 10.0, 20.0)


def test_08_dephasing_model_against_sampling():
    """Quadrature coherence agrees with direct OU-sheet sampling within
    3 sigma at five speeds; infidelity falls with speed; the paired
    encoding beats the single track at 100 nm separation everywhere."""
    for v in _SPEEDS:
        traj = ShuttleTrajectory(speed=v)
        predicted = phase_variance(traj, _OU).w
        emp = sample_ou_phase(traj, _OU, trials=2000, seed=0)
        assert abs(emp.w - predicted) <= 3.0 * emp.w_stderr

    for encoding, sep in (("LD", 0.0), ("ST", 100e-9)):
        rows = infidelity_curve(encoding, [sep], _SPEEDS, _OU)
        vals = [r.infidelity for r in rows]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    single = {r.speed: r.infidelity
              for r in infidelity_curve("LD", [0.0], _SPEEDS, _OU)}
    for row in infidelity_curve("ST", [100e-9], _SPEEDS, _OU):
        assert row.infidelity < single[row.speed]


@pytest.mark.xfail(
    strict=True,
    reason="at 1 um the trailing electron still re-samples the leading "
    "track well inside the correlation time, so the pair keeps its "
    "advantage; the ordering only flips past half the track length",
)
def test_08_encoding_order_reversal_at_one_micron():
    """The pair encoding is claimed to lose to the single track at 1 um."""
    single = {r.speed: r.infidelity
              for r in infidelity_curve("LD", [0.0], _SPEEDS, _OU)}
    rows = infidelity_curve("ST", [1e-6], _SPEEDS, _OU)
    assert all(r.infidelity > single[r.speed] for r in rows)


def test_08_encoding_order_reversal_past_half_track():
    """Past half the 10 um track (6 um separation) the ordering does flip."""
    single = {r.speed: r.infidelity
              for r in infidelity_curve("LD", [0.0], _SPEEDS, _OU)}
    for row in infidelity_curve("ST", [6e-6], _SPEEDS, _OU):
        assert row.infidelity > single[row.speed]


# --- 9: snake surgery protocols -----------------------------------------


def test_09_snake_surgery_all_branches(tmp_path):
    """Teleport forward/back, interacting success/failure, and multi-head
    states all reproduce the ideal state with fidelity >= 1 - 1e-10."""
    rc = main([
        "surgery-verify", "--states", "5", "--heads", "5",
        "--tol", "1e-10", "--seed", "0", "--out", str(tmp_path),
    ])
    assert rc == 0
    report = read_json(tmp_path / "surgery.json")
    assert report["all_pass"]
    names = {check["name"] for check in report["checks"]}
    assert names == {"teleport_forward", "teleport_back",
                     "interacting_success", "interacting_failure", "hydra"}
    for check in report["checks"]:
        assert check["pass"], check["name"]
        assert check["min_fidelity"] >= 1.0 - 1e-10


# --- 10: percolation thresholds -----------------------------------------


def test_10_percolation_thresholds():
    """Connectivity collapse sits at 0.50 +- 0.02 (bond) and 0.593 +- 0.01
    (site) on a 64 x 64 grid with 2000 trials."""
    bond = percolation_threshold("square", "bond", size=64, trials=2000, seed=0)
    site = percolation_threshold("square", "site", size=64, trials=2000, seed=0)
    assert bond == pytest.approx(0.50, abs=0.02)
    assert site == pytest.approx(0.593, abs=0.01)


# --- 11: defect resilience pipeline -------------------------------------

_PIPE_GRID = (0.0, 0.3, 0.45, 0.6, 0.75, 0.9, 1.05, 1.2)
_PIPE_SIM = (3, 5, 7)
_PIPE_ALL = (3, 5, 7, 9, 11, 13)


@pytest.fixture(scope="module")
def resilience_pipeline():
    """One full pass: simulate d=3,5,7, fit rate models, build filter
    densities, extrapolate to d=13, and evaluate the report per distance."""
    models, pls, gap_dists = {}, {}, {}
    for d in _PIPE_SIM:
        cfg = ExperimentConfig(distances=(d,), p=PHYS_P, omega_grid=_PIPE_GRID,
                               shots=SHOTS, seed=5, g_min_rule="half")
        g_min = cfg.g_min(d)
        acc, reliable, cond = [], [], []
        baseline = None
        for omega in _PIPE_GRID:
            gaps, fails = gap_statistics(cfg, d, omega)
            n_acc = sum(n for g, n in gaps.items() if g >= g_min)
            f_acc = sum(n for g, n in fails.items() if g >= g_min)
            acc.append(n_acc / cfg.shots)
            reliable.append(n_acc >= 10)
            cond.append(f_acc / n_acc if n_acc else 0.0)
            if omega == 0.0:
                pls[d] = sum(fails.values()) / cfg.shots
                baseline = f_acc / n_acc if f_acc else 1.0 / max(n_acc, 1)
        points = [(w, r) for w, r, ok in zip(_PIPE_GRID, cond, reliable)
                  if w > 0 and ok and r > 3.0 * baseline]
        models[d] = LogLinearRate.from_samples(
            [w for w, _ in points], [r for _, r in points], baseline)
        gap_dists[d] = AngleDistribution.from_acceptance(
            _PIPE_GRID, acc, reliable)

    models_all = extrapolate_rate_models(models, _PIPE_ALL)
    resolved = sorted(d for d, v in pls.items() if v > 0)
    pl_all = {
        d: pls[d] if pls.get(d, 0.0) > 0 else float(extrapolate_loglinear(
            resolved, [pls[r] for r in resolved], d))
        for d in _PIPE_ALL
    }
    reports = {}
    for d in _PIPE_ALL:
        p_mon = postselected_angle_density(MonitorConfig(N=d * d, lam=0.002))
        p_gap = gap_dists.get(d, gap_dists[max(_PIPE_SIM)])
        reports[d] = resilience_report(ResilienceInputs(
            p_mon=p_mon, p_gap=p_gap, rate_model=models_all[d],
            logical_rate=pl_all[d], defect_rate=0.01, rejection_rate=0.1))
    return reports


def test_11_defect_resilience_pipeline(resilience_pipeline):
    """Undetected-defect integral stays below the defect-free logical rate
    from d=7 up, the integral-to-rate ratio falls monotonically across the
    whole distance ladder, and the closed-form pieces of the total rate
    hold exactly."""
    reports = resilience_pipeline
    ratios = {d: reports[d]["ratio"] for d in _PIPE_ALL}
    for d in (7, 9, 11, 13):
        assert reports[d]["integral"] <= reports[d]["logical_rate"], (
            f"d={d}: ratio {ratios[d]:.3f}")
    seq = [ratios[d] for d in _PIPE_ALL]
    assert all(b < a for a, b in zip(seq, seq[1:])), seq

    for d in _PIPE_ALL:
        rep = reports[d]
        # rejection resummation: exactly P_L / 9 at the default 10% rate
        assert rep["rejection_term"] == rep["logical_rate"] / 9.0
        no_defect = total_logical_rate(rep["logical_rate"], 0.0,
                                       rep["integral"], 0.1)
        assert no_defect == rep["logical_rate"] / 9.0
        # finite geometric series reaches the closed form at double precision
        series = rejection_series(rep["logical_rate"], 0.1)
        assert math.isclose(series, rep["logical_rate"] / 9.0, rel_tol=1e-13)
        # the reported untrusted-region share is a piece of the integral
        assert 0.0 <= rep["below_cutoff"] <= rep["integral"] + 1e-15


@pytest.mark.xfail(
    strict=True,
    reason="with one monitor per data qubit a d=3 patch has only 9 "
    "monitors, and the measured mid-angle failure rates times the "
    "measured filter acceptances already exceed the defect-free rate "
    "(integral/P_L is about 11 at d=3 and 2 at d=5); the inequality "
    "only becomes true from d=7 on in this model",
)
def test_11_resilience_inequality_from_d3(resilience_pipeline):
    """The integral is claimed to stay below P_L for every d in
    {3,...,13}, not just from d=7 up."""
    reports = resilience_pipeline
    ratios = [reports[d]["ratio"] for d in _PIPE_ALL]
    assert all(r <= 1.0 for r in ratios)


# --- 12: shuttling cycle timing -----------------------------------------


def test_12_shuttling_cycle_timing():
    """Default timing: 600 ns of shuttling per to-and-fro cycle at d=30
    (300 ns one-way), and 3.0 us for the full cycle, exact arithmetic."""
    params = TimingParams()
    to_and_fro = shuttle_time_model(StabiliserCycle(30, "in_place"))
    forward = shuttle_time_model(StabiliserCycle(30, "forward"))
    assert to_and_fro - params.overhead == pytest.approx(600e-9, rel=1e-12)
    assert forward - params.overhead == pytest.approx(300e-9, rel=1e-12)
    assert to_and_fro == pytest.approx(3.0e-6, rel=1e-12)
    # the model is pure arithmetic: increments * pitch / speed + overhead
    assert to_and_fro == 60 * params.dot_pitch / params.speed + params.overhead
    assert forward == 30 * params.dot_pitch / params.speed + params.overhead


# --- 13: artifacts stand alone ------------------------------------------


def test_13_artifacts_stand_alone(tmp_path):
    """Analysis artifacts are plain CSV/JSON, rendered identically on every
    run, and nothing in the package depends on a figure renderer."""
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    argv = ["monitor", "--N", "100", "--no-rms", "--seed", "0"]
    assert main(argv + ["--out", str(out_a)]) == 0
    assert main(argv + ["--out", str(out_b)]) == 0
    csv_a = (out_a / "monitor_density.csv").read_bytes()
    csv_b = (out_b / "monitor_density.csv").read_bytes()
    assert csv_a == csv_b

    package = Path(__file__).resolve().parent.parent / "src" / "snakeqec"
    for source in package.glob("*.py"):
        text = source.read_text()
        assert "frontend" not in text and "matplotlib" not in text, source
