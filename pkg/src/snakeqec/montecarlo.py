"""Monte Carlo experiments over the snake code.

Each shot samples one full syndrome-extraction history (circuit noise in
every round, a coherent defect round in the middle), decodes it exactly,
and compares the predicted logical flip with the truth.  Shots are keyed
by counter-derived seeds, so results are bit-identical for any worker
count or chunking of the shot range.
"""

from __future__ import annotations

import zlib
from collections import Counter
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np
from scipy.stats import norm as _norm

from .decoder import build_detection_graph, class_weights
from .distributions import AngleDistribution
from .geometry import build_rotated_surface_code
from .noise import NoiseParams, apply_defect_round, sample_circuit_noise

__all__ = [
    "ExperimentConfig",
    "RateEstimate",
    "ThresholdEstimate",
    "default_omega_grid",
    "wilson_interval",
    "estimate_logical_rate",
    "gap_statistics",
    "gap_rejection_rate",
    "postselected_rate",
    "gap_angle_distribution",
    "threshold_scan",
]

_G_MIN_RULES = ("zero", "half", "half-plus")
_MIN_FAILURES_FOR_FIT = 5   # rate points with fewer failures are not fit
_ACCEPTANCE_FLOOR = 1e-4
_ABORT_MIN_ATTEMPTS = 20_000
_BOOTSTRAP_REPS = 200


def default_omega_grid() -> tuple[float, ...]:
    """Thirteen angles on [0, pi], denser where gap selection bites."""
    return (0.0, 0.1, 0.2, 0.25, 0.3, 0.35, 0.45,
            0.6, 0.8, 1.2, 1.8, 2.4, float(np.pi))


@dataclass(frozen=True)
class ExperimentConfig:
    """Shared knobs for every sampling experiment."""

    distances: tuple[int, ...] = (3, 5, 7)
    p: float = 1e-3
    omega_grid: tuple[float, ...] = field(default_factory=default_omega_grid)
    shots: int = 20_000
    g_min_rule: str | int = "half"
    seed: int = 0
    confidence: float = 0.95
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "distances", tuple(int(d) for d in self.distances))
        object.__setattr__(self, "omega_grid",
                           tuple(float(w) for w in self.omega_grid))
        if not self.distances:
            raise ValueError("need at least one distance")
        for d in self.distances:
            if d < 1 or d % 2 == 0:
                raise ValueError(f"distance {d} must be odd and positive")
        if len(set(self.distances)) != len(self.distances):
            raise ValueError("duplicate distances")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        grid = self.omega_grid
        if not grid:
            raise ValueError("omega grid is empty")
        if any(not np.isfinite(w) or w < 0 or w > np.pi + 1e-12 for w in grid):
            raise ValueError("omega grid must lie in [0, pi]")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("omega grid must be strictly ascending")
        if not 10_000 <= self.shots <= 1_000_000:
            raise ValueError("shots must lie in [1e4, 1e6]")
        if isinstance(self.g_min_rule, str):
            if self.g_min_rule not in _G_MIN_RULES:
                raise ValueError(f"unknown g_min rule {self.g_min_rule!r}")
        elif int(self.g_min_rule) < 0:
            raise ValueError("numeric g_min must be non-negative")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie in (0, 1)")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be positive")

    def g_min(self, distance: int) -> int:
        """Gap acceptance cut for the given distance."""
        if self.g_min_rule == "zero":
            return 0
        if self.g_min_rule == "half":
            return (distance + 1) // 2
        if self.g_min_rule == "half-plus":
            return (distance + 3) // 2
        return int(self.g_min_rule)


@dataclass(frozen=True)
class RateEstimate:
    """Binomial rate with a Wilson confidence interval.

    ``shots`` counts every sampled history (attempts, for post-selected
    runs); ``accepted`` counts the ones the estimate is conditioned on.
    """

    rate: float
    ci_low: float
    ci_high: float
    shots: int
    accepted: int
    failures: int


@dataclass(frozen=True)
class ThresholdEstimate:
    found: bool
    omega_th: float | None
    ci_low: float | None
    ci_high: float | None
    crossings: tuple[float, ...]
    distances: tuple[int, ...]
    omegas: tuple[float, ...]
    rates: tuple[tuple[RateEstimate, ...], ...]


def wilson_interval(successes: int, trials: int, confidence: float = 0.95):
    """Wilson score interval for a binomial proportion."""
    if trials < 0 or not 0 <= successes <= max(trials, 0):
        raise ValueError("need 0 <= successes <= trials")
    if trials == 0:
        return 0.0, 1.0
    z = float(_norm.ppf(0.5 + confidence / 2.0))
    ph = successes / trials
    z2n = z * z / trials
    centre = (ph + z2n / 2.0) / (1.0 + z2n)
    half = z * np.sqrt(ph * (1.0 - ph) / trials + z2n / (4.0 * trials)) / (1.0 + z2n)
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


# ----------------------------------------------------------------------
# per-shot machinery


def _stream_tag(label: str, *parts) -> int:
    text = "|".join([label] + [repr(p) for p in parts])
    return zlib.crc32(text.encode())


def _shot_seed(seed: int, tag: int, shot: int, attempt: int = 0):
    return np.random.SeedSequence((seed, tag, shot, attempt))


class _Engine:
    """Layout, detection graph and decode caches for one (d, p) context."""

    def __init__(self, distance: int, p: float):
        self.layout = build_rotated_surface_code(distance)
        self.rounds = distance
        self.p = p
        self.graph = build_detection_graph(self.layout, self.rounds)

    def run_shot(self, omega: float, ss) -> tuple[bool, int]:
        """One sampled history: (decoder failed, complementary gap)."""
        circuit_ss, defect_ss = ss.spawn(2)
        params = NoiseParams(p=self.p, omega=omega, rounds=self.rounds)
        pattern = sample_circuit_noise(self.layout, params, circuit_ss)
        if omega != 0.0:
            pattern = apply_defect_round(
                pattern, self.layout, omega, self.rounds // 2, defect_ss
            )
        syndrome = self.graph.detector_events(pattern)
        w_keep, w_flip = class_weights(self.graph, syndrome)
        predicted = w_flip < w_keep
        actual = self.graph.logical_flip_of(pattern)
        return predicted != actual, abs(w_keep - w_flip)


_ENGINES: dict[tuple[int, float], _Engine] = {}


def _engine(distance: int, p: float) -> _Engine:
    key = (distance, p)
    eng = _ENGINES.get(key)
    if eng is None:
        eng = _Engine(distance, p)
        _ENGINES[key] = eng
    return eng


def _batch_plain(args):
    """Shot range -> (failures, gap histogram, gap histogram of failures)."""
    distance, p, omega, seed, tag, start, stop = args
    eng = _engine(distance, p)
    failures = 0
    gaps: Counter[int] = Counter()
    fail_gaps: Counter[int] = Counter()
    for shot in range(start, stop):
        failed, gap = eng.run_shot(omega, _shot_seed(seed, tag, shot))
        gaps[gap] += 1
        if failed:
            failures += 1
            fail_gaps[gap] += 1
    return failures, gaps, fail_gaps


def _batch_postselect(args):
    """Resample each shot until its gap clears g_min; count failures."""
    distance, p, omega, seed, tag, start, stop, g_min = args
    eng = _engine(distance, p)
    failures = 0
    attempts = 0
    accepted = 0
    for shot in range(start, stop):
        attempt = 0
        while True:
            failed, gap = eng.run_shot(omega, _shot_seed(seed, tag, shot, attempt))
            attempts += 1
            attempt += 1
            if gap >= g_min:
                accepted += 1
                if failed:
                    failures += 1
                break
            if attempts >= _ABORT_MIN_ATTEMPTS and \
                    accepted / attempts < _ACCEPTANCE_FLOOR:
                raise RuntimeError(
                    f"gap acceptance {accepted / attempts:.2e} below "
                    f"{_ACCEPTANCE_FLOOR:g} at d={distance}, omega={omega:g}, "
                    f"g_min={g_min}; post-selection aborted"
                )
    return failures, attempts, accepted


def _split(shots: int, pieces: int):
    pieces = max(1, min(pieces, shots))
    bounds = np.linspace(0, shots, pieces + 1, dtype=int)
    return [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]


def _run_batches(kernel, prefix: tuple, shots: int, suffix: tuple, workers):
    if workers is None or workers <= 1:
        return [kernel(prefix + (0, shots) + suffix)]
    jobs = [prefix + (a, b) + suffix for a, b in _split(shots, workers * 4)]
    with get_context("fork").Pool(workers) as pool:
        return pool.map(kernel, jobs)


# ----------------------------------------------------------------------
# public experiments


def estimate_logical_rate(config: ExperimentConfig, distance: int,
                          omega: float) -> RateEstimate:
    """Unconditioned logical failure rate at one (distance, omega) point."""
    tag = _stream_tag("rate", distance, config.p, omega)
    parts = _run_batches(
        _batch_plain, (distance, config.p, omega, config.seed, tag),
        config.shots, (), config.workers,
    )
    failures = sum(part[0] for part in parts)
    lo, hi = wilson_interval(failures, config.shots, config.confidence)
    return RateEstimate(
        rate=failures / config.shots, ci_low=lo, ci_high=hi,
        shots=config.shots, accepted=config.shots, failures=failures,
    )


def gap_statistics(config: ExperimentConfig, distance: int,
                   omega: float) -> tuple[Counter, Counter]:
    """Histogram of complementary gaps, overall and failures-only."""
    tag = _stream_tag("rate", distance, config.p, omega)
    parts = _run_batches(
        _batch_plain, (distance, config.p, omega, config.seed, tag),
        config.shots, (), config.workers,
    )
    gaps: Counter[int] = Counter()
    fail_gaps: Counter[int] = Counter()
    for _, g, fg in parts:
        gaps.update(g)
        fail_gaps.update(fg)
    return gaps, fail_gaps


def gap_rejection_rate(config: ExperimentConfig, distance: int,
                       g_min: int | None = None) -> RateEstimate:
    """Fraction of defect-free shots whose gap falls below the cut."""
    if g_min is None:
        g_min = config.g_min(distance)
    gaps, _ = gap_statistics(config, distance, 0.0)
    rejected = sum(n for gap, n in gaps.items() if gap < g_min)
    lo, hi = wilson_interval(rejected, config.shots, config.confidence)
    return RateEstimate(
        rate=rejected / config.shots, ci_low=lo, ci_high=hi,
        shots=config.shots, accepted=config.shots - rejected,
        failures=rejected,
    )


def postselected_rate(config: ExperimentConfig, distance: int, omega: float,
                      g_min: int | None = None) -> RateEstimate:
    """Logical failure rate conditioned on the gap clearing the cut.

    Every shot resamples until accepted, so the estimate is binomial
    over exactly ``shots`` accepted histories.  Aborts if the running
    acceptance probability drops below 1e-4.
    """
    if g_min is None:
        g_min = config.g_min(distance)
    tag = _stream_tag("postselect", distance, config.p, omega, g_min)
    parts = _run_batches(
        _batch_postselect, (distance, config.p, omega, config.seed, tag),
        config.shots, (g_min,), config.workers,
    )
    failures = sum(part[0] for part in parts)
    attempts = sum(part[1] for part in parts)
    accepted = sum(part[2] for part in parts)
    lo, hi = wilson_interval(failures, accepted, config.confidence)
    return RateEstimate(
        rate=failures / accepted if accepted else 0.0,
        ci_low=lo, ci_high=hi,
        shots=attempts, accepted=accepted, failures=failures,
    )


def gap_angle_distribution(config: ExperimentConfig, distance: int,
                           g_min: int | None = None,
                           reliable_min: int = 10) -> AngleDistribution:
    """Density of defect angles that survive gap post-selection.

    Acceptance is sampled on the config grid; points are trusted while
    at least ``reliable_min`` shots were accepted, and a Gaussian tail
    fitted to the last trusted points replaces everything beyond (the
    stabiliser filter is blind to near-pi rotations, so raw acceptance
    turns back up there; the tail models the filtered density instead).
    """
    if g_min is None:
        g_min = config.g_min(distance)
    if config.omega_grid[0] != 0.0:
        raise ValueError("angle distribution needs a grid starting at 0")
    acc = []
    reliable = []
    for omega in config.omega_grid:
        gaps, _ = gap_statistics(config, distance, omega)
        n_acc = sum(n for gap, n in gaps.items() if gap >= g_min)
        acc.append(n_acc / config.shots)
        reliable.append(n_acc >= reliable_min)
    return AngleDistribution.from_acceptance(
        config.omega_grid, acc, reliable,
    )


# ----------------------------------------------------------------------
# threshold location


def _pair_crossing(omegas, counts_a, counts_b, shots):
    """First log-rate sign change between two distances, interpolated."""
    pts = []
    for w, ka, kb in zip(omegas, counts_a, counts_b):
        if ka >= _MIN_FAILURES_FOR_FIT and kb >= _MIN_FAILURES_FOR_FIT:
            pts.append((w, np.log(ka / shots) - np.log(kb / shots)))
    for (w0, d0), (w1, d1) in zip(pts, pts[1:]):
        if d0 == 0.0:
            return w0
        if d0 * d1 < 0:
            return w0 + d0 * (w1 - w0) / (d0 - d1)
    if pts and pts[-1][1] == 0.0:
        return pts[-1][0]
    return None


def _crossings_from_counts(distances, omegas, counts, shots):
    found = []
    for i in range(len(distances)):
        for j in range(i + 1, len(distances)):
            w = _pair_crossing(omegas, counts[i], counts[j], shots)
            if w is not None:
                found.append(float(w))
    return found


def threshold_scan(config: ExperimentConfig) -> ThresholdEstimate:
    """Locate the defect-angle threshold from rate curves.

    Logical rates are sampled for every (distance, omega) grid point;
    each distance pair contributes the crossing of its log-rate curves,
    and the estimate is the median crossing with a parametric-bootstrap
    confidence interval.  Returns found=False when no pair crosses.
    """
    if len(config.distances) < 2:
        raise ValueError("threshold scan needs at least two distances")
    rates = tuple(
        tuple(estimate_logical_rate(config, d, w) for w in config.omega_grid)
        for d in config.distances
    )
    counts = [[est.failures for est in row] for row in rates]
    crossings = _crossings_from_counts(
        config.distances, config.omega_grid, counts, config.shots
    )
    if not crossings:
        return ThresholdEstimate(
            found=False, omega_th=None, ci_low=None, ci_high=None,
            crossings=(), distances=config.distances,
            omegas=config.omega_grid, rates=rates,
        )
    omega_th = float(np.median(crossings))

    rng = np.random.default_rng(
        np.random.SeedSequence((config.seed, _stream_tag("bootstrap", config.p)))
    )
    medians = []
    probs = np.asarray(counts, dtype=float) / config.shots
    for _ in range(_BOOTSTRAP_REPS):
        resampled = rng.binomial(config.shots, probs)
        reps = _crossings_from_counts(
            config.distances, config.omega_grid, resampled, config.shots
        )
        if reps:
            medians.append(np.median(reps))
    if len(medians) >= 10:
        alpha = 1.0 - config.confidence
        lo, hi = np.percentile(medians, [100 * alpha / 2, 100 * (1 - alpha / 2)])
    else:
        lo = hi = omega_th
    return ThresholdEstimate(
        found=True, omega_th=omega_th, ci_low=float(lo), ci_high=float(hi),
        crossings=tuple(sorted(crossings)), distances=config.distances,
        omegas=config.omega_grid, rates=rates,
    )
