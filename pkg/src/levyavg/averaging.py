"""Averaged coefficients, decay functionals, and theoretical rate exponents.

The strong-convergence exponent implemented by `theoretical_rate` is

    exponent = p (1 ^ alpha) / ((1 ^ alpha) + delta1),
    delta1   = [ ((1 - alpha/2) v (alpha/2) - gamma) v (2 - 3 alpha/2 - beta)
                 + iota ] v 0,

for any small iota > 0 (configurable, surfaced in every report).  delta1 = 0
characterises the optimal regime: there the exponent equals p exactly.

Parameter regions (open/closed endpoints taken literally):

    A1 = (0,2) x (1 - a/2, 1)
    A2 = (0,1] x (1 - a, 1 - a/2]  u  (1,2) x ((1-a)/2, 1 - a/2]
    A0 = (2/3,1] x (2 - 3a/2, 1)   u  (1,2) x (a/2, 1)        (A0 inside A1)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .besov import PeriodicGrid, besov_norm, holder_norm, littlewood_paley
from .errors import NoKbmError, ParameterError, RegionError


class RegionLabel(enum.Enum):
    A0 = "A0"
    A1_ONLY = "A1_only"
    A2 = "A2"
    OUTSIDE = "outside"


def _in_a1(alpha: float, beta: float) -> bool:
    return 0.0 < alpha < 2.0 and 1.0 - alpha / 2.0 < beta < 1.0


def _in_a0(alpha: float, beta: float) -> bool:
    if 2.0 / 3.0 < alpha <= 1.0:
        return 2.0 - 1.5 * alpha < beta < 1.0
    if 1.0 < alpha < 2.0:
        return alpha / 2.0 < beta < 1.0
    return False


def _in_a2(alpha: float, beta: float) -> bool:
    if 0.0 < alpha <= 1.0:
        return 1.0 - alpha < beta <= 1.0 - alpha / 2.0
    if 1.0 < alpha < 2.0:
        return (1.0 - alpha) / 2.0 < beta <= 1.0 - alpha / 2.0
    return False


def region_classify(alpha: float, beta: float) -> RegionLabel:
    """Classify (alpha, beta) into the strong/weak convergence regions."""
    if not 0.0 < alpha < 2.0:
        raise ParameterError(f"alpha must lie in (0, 2), got {alpha}")
    if _in_a0(alpha, beta):
        return RegionLabel.A0
    if _in_a1(alpha, beta):
        return RegionLabel.A1_ONLY
    if _in_a2(alpha, beta):
        return RegionLabel.A2
    return RegionLabel.OUTSIDE


@dataclass(frozen=True)
class RateSpec:
    """Inputs of the strong-rate exponent."""

    alpha: float
    beta: float
    gamma: float
    iota: float = 0.01
    p: float = 1.0

    def __post_init__(self):
        if self.gamma > self.beta:
            raise ParameterError(f"gamma = {self.gamma} must be <= beta = {self.beta}")
        if not self.iota > 0:
            raise ParameterError("iota must be positive")
        if self.p < 1:
            raise ParameterError("p must be >= 1")


class TheoreticalRate(NamedTuple):
    exponent: float
    delta1: float


def theoretical_rate(spec: RateSpec) -> TheoreticalRate:
    """Strong-rate exponent for (alpha, beta) in the strong-convergence region."""
    a, b, g = spec.alpha, spec.beta, spec.gamma
    if region_classify(a, b) not in (RegionLabel.A0, RegionLabel.A1_ONLY):
        raise RegionError(
            f"(alpha, beta) = ({a}, {b}) is outside the strong-convergence region"
        )
    kappa_floor = max(1.0 - a / 2.0, a / 2.0)
    delta1 = max(max(kappa_floor - g, 2.0 - 1.5 * a - b) + spec.iota, 0.0)
    one_wedge = min(1.0, a)
    # quotient first: delta1 == 0 must yield exactly p
    return TheoreticalRate(spec.p * (one_wedge / (one_wedge + delta1)), delta1)


@dataclass(frozen=True)
class RateEstimate:
    """A theoretical exponent next to its fitted empirical counterpart."""

    theoretical_exponent: float
    empirical_slope: float
    stderr: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 4:
            raise ParameterError("a reported slope needs at least 4 ladder points")


class SlowFastRate(NamedTuple):
    exponent: float
    delta1: float
    lower_bound: float


def slow_fast_rate(alpha: float, beta1: float, kappa: float, iota: float) -> SlowFastRate:
    """Rate exponent for the slow-fast system with an ergodic diffusion fast part.

        R = (1/2 - kappa) (1 ^ alpha) / ((1 ^ alpha) + delta1),
        delta1 = [ (alpha/2 - beta1) v (2 - 3 alpha/2 - beta1) + iota ] v 0,

    together with the regularity-independent floor R > (1/2 - kappa)(alpha ^ 1/alpha).
    """
    if not 0.0 < alpha < 2.0:
        raise ParameterError(f"alpha must lie in (0, 2), got {alpha}")
    if not 1.0 - alpha / 2.0 < beta1 < 1.0:
        raise ParameterError(f"beta1 must lie in (1 - alpha/2, 1), got {beta1}")
    if not 0.0 < kappa < 0.5:
        raise ParameterError(f"kappa must lie in (0, 1/2), got {kappa}")
    if not 0.0 < iota < beta1 - 1.0 + alpha / 2.0:
        raise ParameterError(
            f"iota must lie in (0, beta1 - 1 + alpha/2) = (0, {beta1 - 1 + alpha / 2:.4g})"
        )
    delta1 = max(max(alpha / 2.0 - beta1, 2.0 - 1.5 * alpha - beta1) + iota, 0.0)
    one_wedge = min(1.0, alpha)
    exponent = (0.5 - kappa) * one_wedge / (one_wedge + delta1)
    bound = (0.5 - kappa) * min(alpha, 1.0 / alpha)
    # strict for alpha != 1; at alpha = 1 the clamp delta1 >= 0 makes the
    # floor an equality, so only >= can hold there
    if not exponent >= bound:
        raise AssertionError(
            f"rate {exponent} fails its own lower bound {bound}; formula inputs inconsistent"
        )
    return SlowFastRate(exponent, delta1, bound)


# ---------------------------------------------------------------------------
# finite-horizon averages and the decay functionals
# ---------------------------------------------------------------------------

_GL_NODES = 32


def time_average(fn: Callable, T: float, x: np.ndarray, tol: float = 1e-10, max_panels: int = 256) -> np.ndarray:
    """(1/T) integral_0^T fn(s, x) ds by composite Gauss-Legendre with doubling."""
    if not T > 0:
        raise ParameterError("averaging horizon T must be positive")
    nodes, weights = np.polynomial.legendre.leggauss(_GL_NODES)
    panels = 1
    prev = None
    while panels <= max_panels:
        edges = np.linspace(0.0, T, panels + 1)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            for s, w in zip(mid + half * nodes, half * weights):
                total = total + w * np.asarray(fn(s, x), dtype=float)
        avg = total / T
        if prev is not None and np.max(np.abs(avg - prev)) < tol * max(1.0, float(np.max(np.abs(avg)))):
            return avg
        prev = avg
        panels *= 2
    return prev


@dataclass
class AveragedDrift:
    """Samples of the long-time drift average plus its convergence evidence."""

    x: np.ndarray
    values: np.ndarray
    horizon: float
    remainder: float | None  # sup gap to a declared closed-form mean, if any
    exact_period_mean: bool


def average_drift(
    drift: Callable,
    T_avg: float,
    x: np.ndarray,
    time_structure=None,
    declared_mean: Callable | None = None,
) -> AveragedDrift:
    """Approximate b_bar(x) = lim (1/T) int_0^T b(s, x) ds on the given points.

    `drift` is a callable (t, x) -> values or a coefficient bundle carrying
    `.drift` and `.time_structure`.  With declared periodic structure the
    one-period mean is computed by exact quadrature (it *is* the limit);
    otherwise finite horizons on a doubling ladder must show a shrinking
    increment, and a non-decreasing increment raises NoKbmError since the
    field then fails the averaging prerequisite.
    """
    if hasattr(drift, "drift") and hasattr(drift, "time_structure"):
        if time_structure is None:
            time_structure = drift.time_structure
        drift = drift.drift
    x = np.asarray(x, dtype=float)
    kind = getattr(time_structure, "kind", "general")
    if kind == "autonomous":
        values = np.asarray(drift(0.0, x), dtype=float)
        exact = True
    elif kind == "periodic":
        values = time_average(drift, time_structure.period, x)
        exact = True
    else:
        ladder = [T_avg / 8.0, T_avg / 4.0, T_avg / 2.0, T_avg]
        means = [time_average(drift, T, x) for T in ladder]
        gaps = [float(np.max(np.abs(b - a))) for a, b in zip(means[:-1], means[1:])]
        if gaps[0] > 1e-13 and gaps[-1] > 0.9 * gaps[0]:
            raise NoKbmError(
                f"average increments {gaps} do not decay over doubling horizons"
            )
        values = means[-1]
        exact = False
    remainder = None
    if declared_mean is not None:
        finite = time_average(drift, T_avg, x) if exact else values
        remainder = float(np.max(np.abs(finite - np.asarray(declared_mean(x), dtype=float))))
    return AveragedDrift(
        x=x, values=values, horizon=T_avg, remainder=remainder, exact_period_mean=exact
    )


def _c_gamma_norm(values: np.ndarray, grid: PeriodicGrid, gamma: float) -> float:
    if gamma > 0:
        return holder_norm(values, grid, gamma)
    if gamma == 0:
        return float(np.max(np.abs(values)))
    return besov_norm(littlewood_paley(values, grid), gamma).value


def ell1(
    drift: Callable,
    drift_bar: Callable,
    T: float,
    gamma: float,
    grid: PeriodicGrid,
) -> float:
    """|| (1/T) int_0^T b(s, .) ds  -  b_bar ||_{C^gamma} at one horizon T.

    gamma > 0 uses the Hoelder norm, gamma = 0 the sup norm, gamma < 0 the
    Besov sup-norm of the same order.  Scalar fields on the periodic grid.
    """
    x = grid.points() if grid.dim == 2 else grid.axis()
    m = time_average(drift, T, x)
    diff = np.asarray(m, dtype=float) - np.asarray(drift_bar(x), dtype=float)
    return _c_gamma_norm(diff, grid, gamma)


def _sup_gradient(values: np.ndarray, grid: PeriodicGrid) -> float:
    out = 0.0
    for axis in range(grid.dim):
        sym = (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2.0 * grid.dx)
        out = max(out, float(np.max(np.abs(sym))))
    return out


def ell2(
    sigma: Callable,
    sigma_bar: Callable,
    T: float,
    grid: PeriodicGrid,
) -> float:
    """|| (1/T) int_0^T |sigma(s, .) - sigma_bar|^2 ds ||_{C^1} at horizon T.

    The C^1 norm is the sup plus the sup of the symmetric-difference gradient
    on the grid; |.| is the Frobenius norm of the matrix gap.
    """
    x = grid.points() if grid.dim == 2 else grid.axis()

    def gap_sq(s, xx):
        d = np.asarray(sigma(s, xx), dtype=float) - np.asarray(sigma_bar(xx), dtype=float)
        if d.ndim > np.ndim(xx):
            return (d**2).sum(axis=tuple(range(np.ndim(xx), d.ndim)))
        return np.broadcast_to(d**2, np.shape(xx)).copy()

    m = time_average(gap_sq, T, x)
    return float(np.max(np.abs(m))) + _sup_gradient(m, grid)
