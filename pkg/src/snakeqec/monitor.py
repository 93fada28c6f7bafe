"""Monitor-qubit analytics: defect detection, angle estimation, purity.

Monitor qubits ride along a shuttling link and pick up the same rotation
omega as the data. Everything here is a closed-form function of the
monitor count N and the noise budget lambda, split equally between
dephasing and readout; only the readout half flips recorded outcomes.

Task (i) detects whether a link is defective at all: measure all N
monitors, accept the link when the zero-outcome count clears a threshold
calibrated to the tolerance angle.  Task (ii) estimates the angle itself
from an X/Y split measurement.  The SWAP-test variance formula supports
purity monitoring of idle snakes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom as _binom

from .distributions import AngleDistribution

__all__ = [
    "MonitorConfig",
    "EstimatorStats",
    "outcome_prob",
    "estimator_task1",
    "task1_distribution",
    "detection_threshold",
    "false_positive_rate",
    "postselected_angle_density",
    "false_negative_rate",
    "estimator_task2",
    "task2_rms",
    "qfi_factor",
    "purity_variance",
    "sample_purity_estimate",
]

_GRID_N = 16385  # quadrature nodes on [0, pi]; P- ~ 1e-8 needs a fine mesh


@dataclass(frozen=True)
class MonitorConfig:
    """Monitor ensemble size, noise budget and detection window."""

    N: int = 900
    lam: float = 0.002
    omega_max: float = 0.3
    omega_hat_max: float = 0.075
    nu: int = 1
    n: int | None = None  # batch size for split estimation; None = one batch

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if not 0.0 <= self.lam < 0.5:
            raise ValueError("lambda must lie in [0, 1/2)")
        if not 0.0 < self.omega_hat_max < self.omega_max < math.pi:
            raise ValueError("need 0 < omega_hat_max < omega_max < pi")
        if self.nu < 1:
            raise ValueError("nu must be at least 1")
        if self.n is not None:
            if self.n < 1 or self.N % self.n:
                raise ValueError("batch size must divide N")

    @property
    def batches(self) -> int:
        return 1 if self.n is None else self.N // self.n

    @property
    def flip_rate(self) -> float:
        # readout share of the equally split noise budget
        return self.lam / 2.0


@dataclass(frozen=True)
class EstimatorStats:
    """Exact RMS of a discrete angle estimator against its CR bounds."""

    omega: float
    rms: float
    cr_bound: float
    noisy_cr_bound: float
    support: tuple[float, ...]
    probabilities: tuple[float, ...]


def outcome_prob(omega: float, lam: float) -> float:
    """Probability of the zero outcome under noise strength lambda."""
    if not 0.0 <= lam < 0.5:
        raise ValueError("lambda must lie in [0, 1/2)")
    return (1.0 - 2.0 * lam) * math.cos(omega / 2.0) ** 2 + lam


def estimator_task1(m0: int, N: int) -> float:
    """Maximum-likelihood angle magnitude from the zero-outcome count."""
    if not 0 <= m0 <= N:
        raise ValueError("need 0 <= m0 <= N")
    return float(np.arccos(np.clip(2.0 * m0 / N - 1.0, -1.0, 1.0)))


def task1_distribution(omega: float, cfg: MonitorConfig):
    """Discrete support {omega_k} and probabilities of the ML estimator."""
    ks = np.arange(cfg.N + 1)
    probs = _binom.pmf(ks, cfg.N, outcome_prob(omega, cfg.flip_rate))
    support = np.arccos(np.clip(2.0 * ks / cfg.N - 1.0, -1.0, 1.0))
    return support, probs


def detection_threshold(cfg: MonitorConfig) -> int:
    """Smallest accepted zero-outcome count.

    Accept the link when the noise-corrected ML estimate stays within
    omega_hat_max, i.e. m0 >= ceil(N p'(omega_hat_max)) at the readout
    flip rate.
    """
    return math.ceil(cfg.N * outcome_prob(cfg.omega_hat_max, cfg.flip_rate))


def false_positive_rate(cfg: MonitorConfig) -> float:
    """Probability of rejecting a defect-free link."""
    k_cut = detection_threshold(cfg)
    p0 = outcome_prob(0.0, cfg.flip_rate)
    return float(_binom.cdf(k_cut - 1, cfg.N, p0))


def _acceptance_curve(cfg: MonitorConfig, omegas: np.ndarray) -> np.ndarray:
    k_cut = detection_threshold(cfg)
    p = (1.0 - cfg.lam) * np.cos(omegas / 2.0) ** 2 + cfg.flip_rate
    return _binom.sf(k_cut - 1, cfg.N, p)


def postselected_angle_density(cfg: MonitorConfig) -> AngleDistribution:
    """Density of angles that slip through detection, uniform prior."""
    half = np.linspace(0.0, math.pi, _GRID_N)
    acc = _acceptance_curve(cfg, half)
    grid = np.concatenate([-half[:0:-1], half])
    vals = np.concatenate([acc[:0:-1], acc])
    try:
        return AngleDistribution.from_values(grid, vals)
    except ValueError as exc:
        raise ValueError("detection accepts zero probability mass") from exc


def false_negative_rate(cfg: MonitorConfig) -> float:
    """Probability mass of accepted angles beyond the tolerance window."""
    half = np.linspace(0.0, math.pi, _GRID_N)
    acc = _acceptance_curve(cfg, half)
    total = np.trapezoid(acc, half)
    if total <= 0:
        raise ValueError("detection accepts zero probability mass")
    outside = np.trapezoid(np.where(half > cfg.omega_max, acc, 0.0), half)
    return float(outside / total)


# ----------------------------------------------------------------------
# task (ii): angle estimation from an X/Y split


def _wrap(angle):
    """Wrap to (-pi, pi]."""
    out = np.mod(-np.asarray(angle) + np.pi, 2.0 * np.pi)
    return np.pi - out


def estimator_task2(x_counts: int, y_counts: int, N: int):
    """Signed angle estimate from zero-outcome counts of the X/Y halves."""
    if N < 2 or N % 2:
        raise ValueError("N must be even and at least 2")
    if not 0 <= x_counts <= N // 2 or not 0 <= y_counts <= N // 2:
        raise ValueError("counts must lie in [0, N/2]")
    x_hat = 4.0 * x_counts / N - 1.0
    y_hat = 4.0 * y_counts / N - 1.0
    return float(_wrap(np.arctan2(y_hat, x_hat) + np.pi / 4.0))


def _task2_probs(omega: float, lam: float):
    # the two halves see the rotation offset by -pi/4 and -3pi/4
    px = (1.0 - 2.0 * lam) * math.cos((omega - math.pi / 4.0) / 2.0) ** 2 + lam
    py = (1.0 - 2.0 * lam) * math.cos((omega - 3.0 * math.pi / 4.0) / 2.0) ** 2 + lam
    return px, py


def qfi_factor(lam: float) -> float:
    """Information retained under noise, relative to the clean probe."""
    if not 0.0 <= lam < 0.5:
        raise ValueError("lambda must lie in [0, 1/2)")
    return (1.0 - 4.0 * lam + 4.0 * lam**2) / (1.0 - 1.5 * lam)


def task2_rms(omega: float, cfg: MonitorConfig) -> EstimatorStats:
    """Exact RMS error of the split estimator at a true angle.

    The estimator takes one of (N/2+1)^2 discrete values; the RMS is the
    exact expectation of the squared circular distance to the true angle
    under the product of the two binomials.  Repetitions nu > 1 only
    rescale the reported Cramer-Rao bounds.
    """
    if cfg.N % 2:
        raise ValueError("the X/Y split estimator needs an even N")
    half = cfg.N // 2
    px, py = _task2_probs(omega, cfg.flip_rate)
    counts = np.arange(half + 1)
    wx = _binom.pmf(counts, half, px)
    wy = _binom.pmf(counts, half, py)
    stat = 2.0 * counts / half - 1.0  # x_hat over axis 0, y_hat over axis 1
    estimates = _wrap(
        np.arctan2(stat[None, :], stat[:, None]) + np.pi / 4.0
    )
    err = _wrap(estimates - omega)
    rms = float(np.sqrt(np.einsum("i,j,ij->", wx, wy, err**2)))

    cr = 1.0 / math.sqrt(cfg.nu * cfg.N)
    noisy_cr = cr / math.sqrt(qfi_factor(cfg.lam))
    return EstimatorStats(
        omega=float(omega),
        rms=rms,
        cr_bound=cr,
        noisy_cr_bound=noisy_cr,
        support=tuple(np.unique(estimates).tolist()),
        probabilities=tuple((wx[:, None] * wy[None, :]).ravel().tolist()),
    )


# ----------------------------------------------------------------------
# SWAP-test purity


def purity_variance(f: float, M: int) -> float:
    """Variance of the SWAP-test fidelity estimator over M trials."""
    if not -1.0 <= f <= 1.0:
        raise ValueError("fidelity must lie in [-1, 1]")
    if M < 1:
        raise ValueError("need at least one trial")
    return (1.0 - f * f) / M


def sample_purity_estimate(f: float, M: int, seed) -> float:
    """One simulated SWAP-test estimate of f from M binary outcomes."""
    if not -1.0 <= f <= 1.0:
        raise ValueError("fidelity must lie in [-1, 1]")
    rng = np.random.default_rng(seed)
    m0 = rng.binomial(M, (1.0 + f) / 2.0)
    return 2.0 * m0 / M - 1.0
