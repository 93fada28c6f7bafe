"""End-to-end defect resilience of shuttled logical qubits.

Combines the two detection filters (monitor qubits and complementary-gap
rejection) into the post-selected angle density p_both, integrates it
against the post-selected logical rate model P(omega), and folds in the
path-rejection series to obtain the total logical rate per d cycles

    total = P_L * r / (1 - r) + rho * integral(P * p_both)

with r the link rejection rate (default 10%, giving the familiar P_L/9
term) and rho the defect rate.  P(omega) is log-linear in omega above a
documented small-angle cutoff; below it the circuit-noise floor
dominates and the model uses a constant bound instead of trusting the
extrapolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import AngleDistribution

__all__ = [
    "LogLinearRate",
    "ResilienceInputs",
    "ResilienceSummary",
    "combine_distributions",
    "defect_integral",
    "distance_sweep",
    "extrapolate_loglinear",
    "extrapolate_rate_models",
    "rejection_series",
    "resilience_report",
    "total_logical_rate",
    "undetected_density",
]

_MASS_TOL = 1e-6
# circuit noise dominates once the fitted rate drops below this multiple
# of the no-defect baseline
_FLOOR_FACTOR = 3.0


@dataclass(frozen=True)
class LogLinearRate:
    """Post-selected logical rate P(omega) = exp(intercept + slope*omega).

    The value is a conditional probability, so the extrapolated
    exponential is clipped to 1 where the fit saturates.  ``baseline``
    is the no-defect rate of the accepted path; ``cutoff_angle`` marks
    where the fit sinks under 3x that floor and stops being trustworthy.
    The raw extrapolation is still what enters integrals there: it is
    orders of magnitude below the curve's maximum, so the untrusted
    region cannot move the result.
    """

    slope: float
    intercept: float
    baseline: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.slope) and math.isfinite(self.intercept)):
            raise ValueError("fit parameters must be finite")
        if self.slope <= 0:
            raise ValueError("rate must grow with the defect angle")
        if not 0 < self.baseline <= 1:
            raise ValueError("baseline must lie in (0, 1]")

    @property
    def floor(self) -> float:
        return _FLOOR_FACTOR * self.baseline

    @property
    def cutoff_angle(self) -> float:
        """Angle below which the extrapolated fit is not trusted."""
        cut = (math.log(self.floor) - self.intercept) / self.slope
        return float(min(max(cut, 0.0), math.pi))

    def rate(self, omega):
        om = np.abs(np.asarray(omega, dtype=float))
        fitted = np.exp(self.intercept + self.slope * om)
        out = np.minimum(fitted, 1.0)
        return float(out) if np.isscalar(omega) else out

    @classmethod
    def from_samples(cls, omegas, rates, baseline: float) -> "LogLinearRate":
        """Least-squares fit of log rate against omega."""
        om = np.asarray(omegas, dtype=float)
        val = np.asarray(rates, dtype=float)
        if om.ndim != 1 or om.shape != val.shape or om.size < 2:
            raise ValueError("need at least two matching sample points")
        if np.any(val <= 0):
            raise ValueError("rates must be positive for a log fit")
        slope, intercept = np.polyfit(om, np.log(val), 1)
        return cls(slope=float(slope), intercept=float(intercept),
                   baseline=baseline)


@dataclass(frozen=True)
class ResilienceInputs:
    """Everything needed for one distance's end-to-end rate."""

    p_mon: AngleDistribution
    p_gap: AngleDistribution
    rate_model: LogLinearRate
    logical_rate: float
    defect_rate: float
    rejection_rate: float = 0.1

    def __post_init__(self) -> None:
        if not 0.0 <= self.logical_rate <= 1.0:
            raise ValueError("logical_rate must lie in [0, 1]")
        if not 0.0 <= self.defect_rate <= 1.0:
            raise ValueError("defect_rate must lie in [0, 1]")
        if not 0.0 < self.rejection_rate < 1.0:
            raise ValueError("rejection_rate must lie in (0, 1)")
        # the single-defect-per-shuttle analysis needs rho << r
        if self.defect_rate * 10.0 > self.rejection_rate:
            raise ValueError(
                "defect_rate must be much smaller than the rejection rate"
            )
        for name, dist in (("p_mon", self.p_mon), ("p_gap", self.p_gap)):
            if abs(dist.total_mass() - 1.0) > _MASS_TOL:
                raise ValueError(f"{name} is not normalised")


def combine_distributions(
    p_mon: AngleDistribution, p_gap: AngleDistribution
) -> AngleDistribution:
    """Post-selected density given both filters passed.

    The filters are conditionally independent given the angle, so the
    combined density is the normalised pointwise product (resampled on a
    common dense grid).
    """
    try:
        return p_mon.product(p_gap)
    except ValueError as exc:
        raise ValueError("the filter densities share no probability mass") from exc


def undetected_density(
    rate_model: LogLinearRate, p_both: AngleDistribution, omegas
) -> np.ndarray:
    """P(omega) * p_both(omega): undetected defect triggering a failure."""
    om = np.asarray(omegas, dtype=float)
    return rate_model.rate(om) * p_both.pdf(om)


def defect_integral(
    rate_model: LogLinearRate,
    p_both: AngleDistribution,
    max_angle: float = math.pi,
) -> float:
    """Integral of P(omega) * p_both(omega) over |omega| <= max_angle."""
    if not 0.0 < max_angle <= math.pi + 1e-12:
        raise ValueError("max_angle must lie in (0, pi]")
    grid = p_both.grid
    inside = np.abs(grid) <= max_angle
    xs = grid[inside]
    if xs.size == 0 or xs[0] > -max_angle:
        xs = np.concatenate([[-max_angle], xs])
    if xs[-1] < max_angle:
        xs = np.concatenate([xs, [max_angle]])
    weight = p_both.pdf(xs) * rate_model.rate(xs)
    return float(np.trapezoid(weight, xs))


def rejection_series(
    logical_rate: float, rejection_rate: float = 0.1, terms: int = 600
) -> float:
    """Finite sum over path attempts of the per-rejection failure term.

    Attempt i contributes (i-1) * P_L * r**(i-1) * (1-r); the closed form
    of the full series is P_L * r / (1 - r).
    """
    if terms < 1:
        raise ValueError("need at least one term")
    i = np.arange(1, terms + 1, dtype=float)
    weights = (i - 1.0) * rejection_rate ** (i - 1.0) * (1.0 - rejection_rate)
    return float(logical_rate * weights.sum())


def total_logical_rate(
    logical_rate: float,
    defect_rate: float,
    integral: float,
    rejection_rate: float = 0.1,
) -> float:
    """Total rate per d cycles: rejection resummation plus defect term."""
    if not 0.0 <= logical_rate <= 1.0 or not 0.0 <= defect_rate <= 1.0:
        raise ValueError("rates must lie in [0, 1]")
    if not 0.0 < rejection_rate < 1.0:
        raise ValueError("rejection_rate must lie in (0, 1)")
    if integral < 0.0:
        raise ValueError("integral must be non-negative")
    # dividing by (1-r)/r keeps the default factor exactly 9
    rejection_term = logical_rate / ((1.0 - rejection_rate) / rejection_rate)
    return rejection_term + defect_rate * integral


def resilience_report(inputs: ResilienceInputs) -> dict:
    """All intermediate quantities of the end-to-end estimate, JSON-ready.

    ``subdominant_bound`` is the accepted-path no-defect term
    (1-r)(1-rho) * baseline, reported to document that it stays well
    below the logical rate rather than entering the total.
    ``below_cutoff`` is the share of the integral coming from angles
    where the rate fit is extrapolated past its trusted range; it is
    reported so the reader can confirm it never moves the result.
    """
    p_both = combine_distributions(inputs.p_mon, inputs.p_gap)
    integral = defect_integral(inputs.rate_model, p_both)
    cutoff = inputs.rate_model.cutoff_angle
    below = defect_integral(inputs.rate_model, p_both, cutoff) if cutoff else 0.0
    r = inputs.rejection_rate
    total = total_logical_rate(
        inputs.logical_rate, inputs.defect_rate, integral, r
    )
    return {
        "logical_rate": inputs.logical_rate,
        "defect_rate": inputs.defect_rate,
        "rejection_rate": r,
        "cutoff_angle": cutoff,
        "integral": integral,
        "below_cutoff": below,
        "ratio": integral / inputs.logical_rate if inputs.logical_rate else math.inf,
        "rejection_term": inputs.logical_rate / ((1.0 - r) / r),
        "defect_term": inputs.defect_rate * integral,
        "subdominant_bound": (1.0 - r)
        * (1.0 - inputs.defect_rate)
        * inputs.rate_model.baseline,
        "total": total,
    }


def extrapolate_loglinear(x_known, y_known, x_new):
    """Fit log y linear in x on known points, predict at new points."""
    xk = np.asarray(x_known, dtype=float)
    yk = np.asarray(y_known, dtype=float)
    if xk.ndim != 1 or xk.shape != yk.shape or xk.size < 2:
        raise ValueError("need at least two matching known points")
    if np.any(yk <= 0):
        raise ValueError("log extrapolation needs positive values")
    slope, intercept = np.polyfit(xk, np.log(yk), 1)
    out = np.exp(intercept + slope * np.asarray(x_new, dtype=float))
    return float(out) if np.isscalar(x_new) else out


def extrapolate_rate_models(
    models: dict[int, LogLinearRate], distances
) -> dict[int, LogLinearRate]:
    """Extend per-distance fit parameters linearly in d.

    Slope and intercept are extended by linear regression in d, the
    baseline log-linearly (error rates fall exponentially with d).
    Distances already present are returned unchanged.
    """
    if len(models) < 2:
        raise ValueError("need fits for at least two distances")
    known = sorted(models)
    slopes = [models[d].slope for d in known]
    intercepts = [models[d].intercept for d in known]
    baselines = [models[d].baseline for d in known]
    slope_fit = np.polyfit(known, slopes, 1)
    intercept_fit = np.polyfit(known, intercepts, 1)
    out: dict[int, LogLinearRate] = {}
    for d in distances:
        if d in models:
            out[d] = models[d]
            continue
        out[d] = LogLinearRate(
            slope=float(np.polyval(slope_fit, d)),
            intercept=float(np.polyval(intercept_fit, d)),
            baseline=float(extrapolate_loglinear(known, baselines, d)),
        )
    return out


@dataclass(frozen=True)
class ResilienceSummary:
    distance: int
    logical_rate: float
    integral: float
    ratio: float
    total: float


def distance_sweep(
    inputs_by_distance: dict[int, ResilienceInputs]
) -> tuple[ResilienceSummary, ...]:
    """Per-distance end-to-end summaries, ascending in distance."""
    out = []
    for d in sorted(inputs_by_distance):
        report = resilience_report(inputs_by_distance[d])
        out.append(
            ResilienceSummary(
                distance=d,
                logical_rate=report["logical_rate"],
                integral=report["integral"],
                ratio=report["ratio"],
                total=report["total"],
            )
        )
    return tuple(out)
