"""Littlewood-Paley analysis of periodic grid functions.

Everything here works on a uniform periodic grid so the dyadic frequency
annuli are finite sets and the discrete Fourier analysis is exact: no domain
truncation enters the norms.  The fixed radial cut-off is

    chi(xi) = psi(2 (|xi| - 1)),   psi(t) = 1 for t <= 0, 0 for t >= 1,
    psi(t) = e^(-1/(1-t)) / (e^(-1/(1-t)) + e^(-1/t)) in between,

so chi = 1 on |xi| <= 1 and chi = 0 on |xi| >= 3/2, and the annulus bump is
phi(xi) = chi(xi) - chi(2 xi).  Dyadic blocks of a grid function f are

    block[-1] = F^-1( chi(2 xi) F f ),
    block[j]  = F^-1( phi(2^-j xi) F f ),   j >= 0,

which gives the telescoping partition of unity sum_j block[j] = f on every
resolved frequency.  The sup-weighted block sequence 2^(j s) ||block[j]||_inf
realises the (infinity, infinity) Besov norm for any real s, negative s
included.  With the default period 2 pi all wave numbers are integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ParameterError, ResolutionError

_PAIR_BUDGET = 200_000  # Hoelder-quotient pairs when the all-pairs set is too big
_PAIR_SEED = 0x4C50


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform periodic grid, n_points samples per axis (power of two)."""

    n_points: int
    period: float = 2.0 * np.pi
    dim: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ParameterError(f"dim must be 1 or 2, got {self.dim}")
        n = self.n_points
        if n < 16 or (n & (n - 1)) != 0:
            raise ParameterError(f"n_points must be a power of two >= 16, got {n}")
        if not self.period > 0:
            raise ParameterError("period must be positive")

    @property
    def dx(self) -> float:
        return self.period / self.n_points

    def axis(self) -> np.ndarray:
        return self.dx * np.arange(self.n_points)

    def points(self):
        """Sample points: (n,) for dim 1, a meshgrid tuple for dim 2."""
        if self.dim == 1:
            return self.axis()
        x = self.axis()
        return np.meshgrid(x, x, indexing="ij")

    def shape(self) -> tuple:
        return (self.n_points,) * self.dim

    def freq_radius(self) -> np.ndarray:
        """|xi| on the FFT layout, with xi = 2 pi k / period per axis."""
        k = np.fft.fftfreq(self.n_points, d=1.0 / self.n_points)
        xi = 2.0 * np.pi / self.period * k
        if self.dim == 1:
            return np.abs(xi)
        return np.sqrt(xi[:, None] ** 2 + xi[None, :] ** 2)

    def j_max(self) -> int:
        # One extra block in 2-d: corner modes reach |k| = n/sqrt(2) > n/2.
        return int(math.log2(self.n_points)) - 1 + (1 if self.dim == 2 else 0)


def smooth_step(t):
    """psi: 1 on (-inf, 0], 0 on [1, inf), C^inf monotone in between."""
    t = np.asarray(t, dtype=float)
    mid = np.clip(t, 1e-9, 1.0 - 1e-9)
    a = np.exp(-1.0 / (1.0 - mid))
    b = np.exp(-1.0 / mid)
    return np.where(t <= 0.0, 1.0, np.where(t >= 1.0, 0.0, a / (a + b)))


def chi(r):
    """Radial cut-off: 1 on |xi| <= 1, 0 on |xi| >= 3/2."""
    return smooth_step(2.0 * (np.asarray(r, dtype=float) - 1.0))


def phi(r):
    """Dyadic annulus bump chi(xi) - chi(2 xi), supported on 1/2 <= |xi| <= 3/2."""
    r = np.asarray(r, dtype=float)
    return chi(r) - chi(2.0 * r)


def block_multiplier(grid: PeriodicGrid, j: int) -> np.ndarray:
    r = grid.freq_radius()
    if j == -1:
        return chi(2.0 * r)
    return phi(r / 2.0**j)


@dataclass
class DyadicDecomposition:
    """Frequency-localised pieces block[j], j = -1 .. j_max, of one grid function."""

    grid: PeriodicGrid
    blocks: list  # blocks[i] is block index j = i - 1

    @property
    def j_max(self) -> int:
        return len(self.blocks) - 2

    def block(self, j: int) -> np.ndarray:
        return self.blocks[j + 1]

    def js(self) -> range:
        return range(-1, self.j_max + 1)

    def reconstruct(self) -> np.ndarray:
        return np.sum(self.blocks, axis=0)


def littlewood_paley(f: np.ndarray, grid: PeriodicGrid, j_max: int | None = None) -> DyadicDecomposition:
    """Decompose f into dyadic blocks by Fourier multiplication.

    Raises ResolutionError when a j range beyond what the grid resolves is
    requested.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != grid.shape():
        raise ParameterError(f"f has shape {f.shape}, grid expects {grid.shape()}")
    jm = grid.j_max() if j_max is None else j_max
    if jm > grid.j_max():
        raise ResolutionError(
            f"grid with {grid.n_points} points resolves blocks up to j = {grid.j_max()}, "
            f"requested {jm}"
        )
    F = np.fft.fftn(f)
    blocks = [
        np.fft.ifftn(block_multiplier(grid, j) * F).real for j in range(-1, jm + 1)
    ]
    return DyadicDecomposition(grid=grid, blocks=blocks)


@dataclass
class BesovNormResult:
    s: float
    p: float
    q: float
    value: float
    per_block: np.ndarray  # 2^(j s) ||block_j||_inf, j = -1 .. j_max


def besov_norm(decomp: DyadicDecomposition, s: float) -> BesovNormResult:
    """sup_j 2^(j s) ||block_j||_inf; negative s is allowed."""
    per_block = np.array(
        [2.0 ** (j * s) * np.max(np.abs(decomp.block(j))) for j in decomp.js()]
    )
    return BesovNormResult(s=s, p=np.inf, q=np.inf, value=float(per_block.max()), per_block=per_block)


def _torus_dist(points_a, points_b, period):
    d = np.abs(points_a - points_b)
    d = np.minimum(d, period - d)
    if d.ndim == 1:
        return d
    return np.sqrt((d**2).sum(axis=-1))


def _pair_indices(n_total: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic pair set: all pairs when small, stratified sample otherwise.

    The stratified set keeps every short index lag plus a geometric ladder of
    longer lags (decimated to budget), topped up with Philox-seeded random
    pairs, so both local difference quotients and far-pair quotients are seen.
    """
    if n_total <= 512:
        return np.triu_indices(n_total, k=1)
    geometric = {int(round(48 * 1.5**m)) for m in range(40)}
    lags = sorted(
        lag
        for lag in set(range(1, 33)) | geometric
        if 1 <= lag <= n_total // 2
    )
    per_lag = max(1, (_PAIR_BUDGET // 2) // max(1, len(lags)))
    ii, jj = [], []
    for lag in lags:
        stride = max(1, n_total // per_lag)
        base = np.arange(0, n_total, stride)
        ii.append(base)
        jj.append((base + lag) % n_total)
    rng = np.random.Generator(np.random.Philox(key=np.uint64(_PAIR_SEED)))
    n_random = _PAIR_BUDGET - sum(len(a) for a in ii)
    if n_random > 0:
        ri = rng.integers(0, n_total, n_random)
        rj = rng.integers(0, n_total, n_random)
        keep = ri != rj
        ii.append(ri[keep])
        jj.append(rj[keep])
    return np.concatenate(ii), np.concatenate(jj)


def holder_norm(f: np.ndarray, grid: PeriodicGrid, beta: float) -> float:
    """sup norm plus the beta-Hoelder difference quotient over the torus metric."""
    if not 0.0 < beta <= 1.0:
        raise ParameterError(f"beta must lie in (0, 1], got {beta}")
    f = np.asarray(f, dtype=float)
    if grid.dim == 1:
        pts = grid.axis()
        vals = f.ravel()
    else:
        X, Y = grid.points()
        pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
        vals = f.ravel()
    ii, jj = _pair_indices(len(vals))
    dist = _torus_dist(pts[ii], pts[jj], grid.period)
    quot = np.abs(vals[ii] - vals[jj]) / dist**beta
    return float(np.max(np.abs(vals)) + np.max(quot))


@dataclass
class Mollifier:
    """Smooth probability kernel rho_n on the grid, rho_n(x) = n^d rho(n x) periodised."""

    grid: PeriodicGrid
    n: int
    kernel: np.ndarray

    def __post_init__(self):
        cell = self.grid.dx**self.grid.dim
        mass = float(self.kernel.sum() * cell)
        if abs(mass - 1.0) > 1e-10:
            raise ParameterError(f"mollifier mass is {mass}, expected 1")
        if np.min(self.kernel) < 0.0:
            raise ParameterError("mollifier kernel must be nonnegative")

    def multiplier(self) -> np.ndarray:
        """Fourier multiplier rho_n-hat on the grid's FFT layout."""
        return np.fft.fftn(self.kernel) * self.grid.dx**self.grid.dim


def gaussian_mollifier(grid: PeriodicGrid, n: int, images: int = 4) -> Mollifier:
    """Periodised Gaussian rho(x) = (2 pi)^(-d/2) e^(-|x|^2 / 2) at scale n."""
    if n < 1:
        raise ParameterError(f"scaling index n must be >= 1, got {n}")
    x = grid.axis()
    shifts = np.arange(-images, images + 1) * grid.period
    prof = np.zeros_like(x)
    for s in shifts:
        u = n * (x + s)
        prof += n * np.exp(-0.5 * u**2) / np.sqrt(2.0 * np.pi)
    if grid.dim == 2:
        kern = prof[:, None] * prof[None, :]
    else:
        kern = prof
    kern = kern / (kern.sum() * grid.dx**grid.dim)  # exact discrete unit mass
    return Mollifier(grid=grid, n=n, kernel=kern)


def mollify(f: np.ndarray, mol: Mollifier) -> np.ndarray:
    """Circular convolution f * rho_n via Fourier multiplication; exact for constants."""
    f = np.asarray(f, dtype=float)
    if f.shape != mol.grid.shape():
        raise ParameterError("f does not live on the mollifier's grid")
    return np.fft.ifftn(np.fft.fftn(f) * mol.multiplier()).real


@dataclass
class MollifierSlopeReport:
    n_list: np.ndarray
    growth_norms: np.ndarray  # ||f_n||_{B^(kappa+delta)}
    decay_norms: np.ndarray  # ||f_n - f||_{B^kappa}
    growth_slope: float
    decay_slope: float


def mollifier_rate_check(
    f: np.ndarray, grid: PeriodicGrid, kappa: float, delta: float, n_list
) -> MollifierSlopeReport:
    """Least-squares log-log slopes of the mollifier growth/decay norms in n.

    Growth measures ||f_n|| in the smoother space B^(kappa+delta) (bounded by
    n^delta times ||f||_{B^kappa}); decay measures ||f_n - f|| in B^kappa
    (bounded by n^-delta times ||f||_{B^(kappa+delta)}).
    """
    n_list = np.asarray(list(n_list), dtype=float)
    if len(n_list) < 5:
        raise ParameterError("n_list must have length >= 5")
    ratios = n_list[1:] / n_list[:-1]
    if np.max(np.abs(ratios - ratios[0])) > 1e-9:
        raise ParameterError("n_list must be geometric")
    if delta < 0:
        raise ParameterError("delta must be >= 0")
    f = np.asarray(f, dtype=float)
    base = littlewood_paley(f, grid)
    if besov_norm(base, max(kappa + delta, kappa)).value < 1e-12:
        raise DegenerateInputError("test function is numerically zero")
    growth, decay = [], []
    for n in n_list:
        mol = gaussian_mollifier(grid, int(n))
        fn = mollify(f, mol)
        growth.append(besov_norm(littlewood_paley(fn, grid), kappa + delta).value)
        decay.append(besov_norm(littlewood_paley(fn - f, grid), kappa).value)
    growth = np.maximum(np.array(growth), 1e-300)
    decay = np.maximum(np.array(decay), 1e-300)
    logn = np.log(n_list)
    growth_slope = float(np.polyfit(logn, np.log(growth), 1)[0])
    decay_slope = float(np.polyfit(logn, np.log(decay), 1)[0])
    return MollifierSlopeReport(
        n_list=n_list,
        growth_norms=growth,
        decay_norms=decay,
        growth_slope=growth_slope,
        decay_slope=decay_slope,
    )


def frac_laplacian(f: np.ndarray, grid: PeriodicGrid, alpha: float) -> np.ndarray:
    """Spectral fractional Laplacian: multiply Fourier coefficient k by |xi_k|^alpha."""
    if not 0.0 < alpha < 2.0:
        raise ParameterError(f"alpha must lie in (0, 2), got {alpha}")
    f = np.asarray(f, dtype=float)
    return np.fft.ifftn(grid.freq_radius() ** alpha * np.fft.fftn(f)).real
