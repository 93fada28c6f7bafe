"""Symmetric angle distributions on [-pi, pi].

Densities over rotation angles are built from sampled acceptance
probabilities on a non-negative grid, mirrored to negative angles, and
extended past the last reliably-sampled point with a Gaussian tail
fitted in log space.  All normalisation is numeric (trapezoid rule on a
dense grid), so products of distributions stay closed under the same
representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["AngleDistribution", "gaussian_tail_fit"]

_DENSE_N = 8193


def gaussian_tail_fit(omegas, values):
    """Fit log y = a - b*omega**2 through the given points.

    Least squares in the variable omega**2; with two or three points and
    distinct abscissae this is exact or near-exact.  Returns (a, b).
    """
    om = np.asarray(omegas, dtype=float)
    val = np.asarray(values, dtype=float)
    if om.size < 2:
        raise ValueError("tail fit needs at least two points")
    if np.any(val <= 0):
        raise ValueError("tail fit needs positive values")
    x = om**2
    y = np.log(val)
    coeffs = np.polyfit(x, y, 1)
    a = float(coeffs[1])
    b = float(-coeffs[0])
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError("tail fit did not converge to finite parameters")
    return a, b


@dataclass(frozen=True)
class AngleDistribution:
    """Even probability density on [-pi, pi], sampled on a dense grid."""

    grid: np.ndarray      # ascending, spans [-pi, pi]
    density: np.ndarray   # normalised values, same length as grid

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        dens = np.asarray(self.density, dtype=float)
        if grid.ndim != 1 or grid.shape != dens.shape:
            raise ValueError("grid and density must be matching 1-d arrays")
        if grid.size < 3 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly ascending")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "density", dens)

    # -- construction ------------------------------------------------

    @classmethod
    def from_values(cls, grid, values):
        """Normalise raw non-negative values into a density."""
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("density values must be finite and non-negative")
        norm = np.trapezoid(values, grid)
        if not np.isfinite(norm) or norm <= 0:
            raise ValueError("distribution is not normalisable")
        return cls(grid=grid, density=values / norm)

    @classmethod
    def from_acceptance(cls, omegas, acceptance, reliable=None, tail_points=3,
                        n_dense=_DENSE_N):
        """Build a density proportional to an acceptance curve.

        ``omegas`` is an ascending non-negative grid starting at 0;
        ``acceptance`` the estimated pass probability at each point.  Only
        the contiguous reliable prefix from omega=0 is trusted; beyond its
        last point the density follows a Gaussian tail exp(a - b*omega^2)
        fitted to the last ``tail_points`` reliable values.  The curve is
        mirrored to negative angles and normalised on [-pi, pi].
        """
        om = np.asarray(omegas, dtype=float)
        acc = np.asarray(acceptance, dtype=float)
        if om.ndim != 1 or om.shape != acc.shape or om.size < 2:
            raise ValueError("need matching 1-d omega and acceptance arrays")
        if om[0] != 0.0 or np.any(np.diff(om) <= 0):
            raise ValueError("omega grid must ascend from 0")
        if om[-1] > np.pi + 1e-12:
            raise ValueError("omega grid must stay within [0, pi]")
        if reliable is None:
            rel = acc > 0
        else:
            rel = np.asarray(reliable, dtype=bool)
            if rel.shape != om.shape:
                raise ValueError("reliability mask must match the grid")
        # contiguous trusted prefix from omega=0
        n_prefix = 0
        for flag in rel:
            if not flag:
                break
            n_prefix += 1
        if n_prefix < 2:
            raise ValueError("need at least two reliable points from omega=0")
        if np.any(acc[:n_prefix] <= 0):
            raise ValueError("reliable acceptance values must be positive")

        cut = float(om[n_prefix - 1])
        k = min(tail_points, n_prefix)
        a, b = gaussian_tail_fit(om[n_prefix - k:n_prefix],
                                 acc[n_prefix - k:n_prefix])

        half = np.linspace(0.0, np.pi, (n_dense + 1) // 2)
        vals = np.empty_like(half)
        inside = half <= cut
        log_acc = np.log(acc[:n_prefix])
        vals[inside] = np.exp(np.interp(half[inside], om[:n_prefix], log_acc))
        vals[~inside] = np.exp(a - b * half[~inside] ** 2)

        grid = np.concatenate([-half[:0:-1], half])
        density = np.concatenate([vals[:0:-1], vals])
        return cls.from_values(grid, density)

    # -- queries -----------------------------------------------------

    def pdf(self, omega):
        """Density at the given angle(s), linearly interpolated."""
        return np.interp(omega, self.grid, self.density)

    def integrate(self, fn=None):
        """Integral of fn(omega) * pdf(omega) over [-pi, pi]."""
        if fn is None:
            weight = self.density
        else:
            weight = self.density * np.asarray(fn(self.grid), dtype=float)
        return float(np.trapezoid(weight, self.grid))

    def product(self, other, n_dense=_DENSE_N):
        """Normalised pointwise product of two angle densities."""
        grid = np.linspace(-np.pi, np.pi, n_dense)
        vals = self.pdf(grid) * other.pdf(grid)
        return AngleDistribution.from_values(grid, vals)

    def total_mass(self):
        return float(np.trapezoid(self.density, self.grid))
