"""Euler path simulation for the multiscale, averaged and slow-fast systems.

The multiscale equation advances as

    X_{k+1} = X_k + b(t_k / eps, X_k) dt + sigma(t_k / eps, X_k) dL_k,

with dL_k an exact-in-law stable increment from `levyavg.noise`; the averaged
system is the same scheme without the 1/eps time rescaling.  Strong-error
measurements couple the two through one shared increment array.

All state updates broadcast over a leading batch axis, so an (M, n_steps, d)
increment block simulates M paths in lockstep with identical semantics to M
separate single-path calls.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import expr
from .errors import IndependenceError, ParameterError, ResolutionError, ShapeError
from .noise import StablePathIncrements, TimeGrid, generator

EPS_RESOLUTION_FACTOR = 10  # require dt <= epsilon / 10 for multiscale runs


@dataclass
class TimeStructure:
    """Declared time dependence of a coefficient; drives exact averaging."""

    kind: str = "autonomous"  # autonomous | periodic | almost_periodic | tabulated
    period: float | None = None
    frequencies: tuple = ()

    def __post_init__(self):
        kinds = ("autonomous", "periodic", "almost_periodic", "tabulated")
        if self.kind not in kinds:
            raise ParameterError(f"time structure must be one of {kinds}")
        if self.kind == "periodic" and not (self.period and self.period > 0):
            raise ParameterError("periodic time structure needs a positive period")


@dataclass
class Drift:
    """Vector field (t, x) -> R^d; `sources` kept for config round-trips."""

    fn: callable
    dim: int
    sources: tuple = ()

    def __call__(self, t, x):
        return self.fn(t, x)


@dataclass
class Diffusion:
    """Matrix field (t, x) -> R^(d x d), scalar shorthand meaning sigma * I."""

    fn: callable
    dim: int
    sources: tuple = ()
    is_constant: bool = False
    constant_value: float | None = None

    def __call__(self, t, x):
        return self.fn(t, x)


def _expr_env(t, x):
    env = {"t": t}
    d = x.shape[-1]
    env["x"] = x[..., 0]
    for i in range(d):
        env[f"x{i + 1}"] = x[..., i]
    return env


def drift_from_expressions(sources) -> Drift:
    """Build a drift from one expression string per component."""
    if isinstance(sources, str):
        sources = (sources,)
    sources = tuple(sources)
    fns = [expr.compile_expression(s) for s in sources]
    d = len(sources)

    def fn(t, x):
        env = _expr_env(t, x)
        out = [np.broadcast_to(np.asarray(f(**env), dtype=float), x[..., 0].shape) for f in fns]
        return np.stack(out, axis=-1)

    return Drift(fn=fn, dim=d, sources=sources)


def drift_zero(dim: int) -> Drift:
    return Drift(fn=lambda t, x: np.zeros_like(x), dim=dim, sources=("0",) * dim)


def drift_tabulated_periodic(times, values, spatial: str = "1") -> Drift:
    """Separable drift b(t, x) = h(t) g(x) with h a periodically repeated table.

    `times` must start at 0; its last entry is the period and must carry the
    same value as t = 0 so the periodic interpolant is continuous.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times[0] != 0.0 or len(times) != len(values) or len(times) < 2:
        raise ParameterError("need a table over [0, P] with matching lengths")
    if abs(values[0] - values[-1]) > 1e-12:
        raise ParameterError("periodic table must close up: h(0) == h(P)")
    period = float(times[-1])
    g = expr.compile_expression(spatial)

    def fn(t, x):
        h = np.interp(np.mod(t, period), times, values)
        return np.broadcast_to(
            np.asarray(h * g(**_expr_env(t, x)), dtype=float), x[..., 0].shape
        )[..., None]

    return Drift(fn=fn, dim=1, sources=("<tabulated>", spatial))


def diffusion_from_expression(source: str, dim: int = 1) -> Diffusion:
    """Isotropic diffusion sigma(t, x) * I from a scalar expression."""
    f = expr.compile_expression(source)

    def fn(t, x):
        return np.asarray(f(**_expr_env(t, x)), dtype=float)

    return Diffusion(fn=fn, dim=dim, sources=(source,))


def diffusion_constant(value: float, dim: int = 1) -> Diffusion:
    """Additive noise sigma = value * I."""
    if not value > 0:
        raise ParameterError("constant diffusion must be positive")

    def fn(t, x):
        return np.asarray(value, dtype=float)

    return Diffusion(fn=fn, dim=dim, sources=(str(value),), is_constant=True, constant_value=value)


def _apply_diffusion(sig, dl):
    """sigma(t, x) applied to an increment; sigma may be scalar, diagonal or full."""
    sig = np.asarray(sig)
    if sig.ndim >= 2 and sig.shape[-2:] == (dl.shape[-1], dl.shape[-1]):
        return np.einsum("...ij,...j->...i", sig, dl)
    if sig.ndim == dl.ndim:
        return sig * dl
    return sig[..., None] * dl


def check_sigma_bounds(diffusion: Diffusion, lambda1: float | None = None) -> float:
    """Spot-check the two-sided ellipticity bound of sigma on a (t, x, xi) lattice.

    Verifies 1/L |xi|^2 <= |sigma xi|^2 <= L |xi|^2 over roughly 10^3 lattice
    points and returns the smallest admissible L found; raises if sigma
    degenerates or a declared bound is violated.
    """
    d = diffusion.dim
    ts = np.linspace(0.0, 4.0 * np.pi, 10)
    xs = np.linspace(-4.0, 4.0, 11)  # odd count: the lattice contains x = 0
    angles = np.linspace(0.0, np.pi, 10, endpoint=False)
    if d == 1:
        dirs = np.array([[1.0]])
    elif d == 2:
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    else:
        dirs = np.stack([np.cos(angles), np.sin(angles) / np.sqrt(2), np.sin(angles) / np.sqrt(2)], axis=-1)
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    lo, hi = np.inf, 0.0
    for t in ts:
        x = np.stack([xs] * d, axis=-1)
        sig = np.asarray(diffusion(t, x), dtype=float)
        for xi in dirs:
            if sig.ndim >= 2 and sig.shape[-2:] == (d, d):
                sx = np.einsum("...ij,j->...i", sig, xi)
                ratio = (sx**2).sum(axis=-1)
            else:
                ratio = np.broadcast_to(sig**2, (len(xs),)) * (xi**2).sum()
            lo = min(lo, float(np.min(ratio)))
            hi = max(hi, float(np.max(ratio)))
    if not np.isfinite(hi) or lo <= 0.0:
        raise ParameterError("sigma violates nondegeneracy: |sigma xi|^2 must stay positive")
    needed = max(hi, 1.0 / lo) * (1.0 + 1e-12)
    if lambda1 is not None and needed > lambda1:
        raise ParameterError(
            f"declared ellipticity bound {lambda1} violated (needs >= {needed:.6g})"
        )
    return needed if lambda1 is None else lambda1


@dataclass
class CoefficientSpec:
    """Time-dependent coefficient bundle (b, sigma) with declared drift regularity."""

    drift: Drift
    diffusion: Diffusion
    holder_beta: float
    time_structure: TimeStructure = field(default_factory=TimeStructure)
    lambda1: float | None = None

    def __post_init__(self):
        if self.drift.dim != self.diffusion.dim:
            raise ShapeError("drift and diffusion dimensions differ")
        self.lambda1 = check_sigma_bounds(self.diffusion, self.lambda1)

    @property
    def dim(self) -> int:
        return self.drift.dim


@dataclass
class MultiscaleSdeSpec:
    coeffs: CoefficientSpec
    alpha: float
    epsilon: float
    x0: np.ndarray

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ParameterError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        self.x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        if self.x0.shape != (self.coeffs.dim,):
            raise ShapeError("x0 does not match the coefficient dimension")


@dataclass
class AveragedSdeSpec:
    """Autonomous averaged system (b_bar, sigma_bar)."""

    drift_bar: Drift
    diffusion_bar: Diffusion
    alpha: float
    x0: np.ndarray
    lambda1: float | None = None

    def __post_init__(self):
        self.x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        self.lambda1 = check_sigma_bounds(self.diffusion_bar, self.lambda1)


@dataclass
class SlowFastSpec:
    """Slow equation in R^n driven by stable noise, fast diffusion in R^m."""

    f_coupling: callable  # (x, y) -> R^n
    fast_drift: callable  # y -> R^m
    epsilon: float
    x0: np.ndarray
    y0: np.ndarray
    sigma_slow: Diffusion
    fast_is_linear: bool = False  # True when B(y) = -y: exact OU updates

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ParameterError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        self.x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        self.y0 = np.atleast_1d(np.asarray(self.y0, dtype=float))
        self._check_dissipative()

    def _check_dissipative(self):
        # proxy for <B(y), y> -> -inf: outward drift must dominate on large spheres
        m = len(self.y0)
        angles = np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False)
        if m == 1:
            dirs = np.array([[1.0], [-1.0]])
        else:
            dirs = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
            if m > 2:
                dirs = np.pad(dirs, [(0, 0), (0, m - 2)])
        for radius in (10.0, 20.0, 40.0):
            for u in dirs:
                y = radius * u
                inner = float(np.dot(np.asarray(self.fast_drift(y), dtype=float), y))
                if inner > -0.01 * radius**2:
                    raise ParameterError(
                        f"fast drift fails the dissipativity spot-check at |y| = {radius}"
                    )


@dataclass
class PathEnsemble:
    paths: np.ndarray  # (M, n_steps + 1, d)
    grid: TimeGrid
    metadata: dict = field(default_factory=dict)


def _resolve_fields(spec, grid: TimeGrid, strict: bool):
    if isinstance(spec, MultiscaleSdeSpec):
        eps = spec.epsilon
        if grid.dt > eps / EPS_RESOLUTION_FACTOR:
            msg = (
                f"dt = {grid.dt:.3g} under-resolves the fast scale: "
                f"need dt <= epsilon/{EPS_RESOLUTION_FACTOR} = {eps / EPS_RESOLUTION_FACTOR:.3g}"
            )
            if strict:
                raise ResolutionError(msg)
            warnings.warn(msg, stacklevel=3)
        b, s = spec.coeffs.drift, spec.coeffs.diffusion
        return (lambda t, x: b(t / eps, x)), (lambda t, x: s(t / eps, x)), spec.x0
    if isinstance(spec, AveragedSdeSpec):
        b, s = spec.drift_bar, spec.diffusion_bar
        return (lambda t, x: b(t, x)), (lambda t, x: s(t, x)), spec.x0
    raise ParameterError(f"unsupported spec type {type(spec).__name__}")


def euler_maruyama(spec, grid: TimeGrid, noise: StablePathIncrements, strict: bool = False) -> np.ndarray:
    """One Euler path (or a batch) driven by the given increments.

    Returns an array of shape (..., n_steps + 1, d) matching the batch layout
    of ``noise.increments``; the result is a pure function of its arguments.
    """
    incr = np.asarray(noise.increments, dtype=float)
    if noise.grid != grid:
        raise ShapeError("noise grid does not match the simulation grid")
    b_fn, s_fn, x0 = _resolve_fields(spec, grid, strict)
    d = x0.shape[0]
    if incr.shape[-1] != d or incr.shape[-2] != grid.n_steps:
        raise ShapeError(
            f"increments of shape {incr.shape} do not match n_steps = {grid.n_steps}, d = {d}"
        )
    batch = incr.shape[:-2]
    path = np.empty(batch + (grid.n_steps + 1, d))
    x = np.broadcast_to(x0, batch + (d,)).copy()
    path[..., 0, :] = x
    dt = grid.dt
    times = grid.times()
    for k in range(grid.n_steps):
        x = x + b_fn(times[k], x) * dt + _apply_diffusion(s_fn(times[k], x), incr[..., k, :])
        path[..., k + 1, :] = x
    return path


def simulate_coupled(
    ms: MultiscaleSdeSpec,
    avg: AveragedSdeSpec,
    grid: TimeGrid,
    noise: StablePathIncrements,
    strict: bool = False,
):
    """Drive the multiscale and averaged systems with the same increments."""
    if ms.alpha != avg.alpha:
        raise ParameterError("coupled systems must share the stability index alpha")
    if not np.array_equal(ms.x0, avg.x0):
        raise ParameterError("coupled systems must share the initial state")
    path_eps = euler_maruyama(ms, grid, noise, strict=strict)
    path_bar = euler_maruyama(avg, grid, noise, strict=strict)
    return path_eps, path_bar


def _ou_step_factors(dt: float, epsilon: float):
    decay = np.exp(-dt / epsilon)
    noise_std = np.sqrt((1.0 - np.exp(-2.0 * dt / epsilon)) / 2.0)
    return decay, noise_std


def simulate_slow_fast(
    spec: SlowFastSpec,
    grid: TimeGrid,
    noise_L: StablePathIncrements,
    seed_W: int,
):
    """Simulate the coupled slow-fast pair; W and L streams must be independent.

    The fast component uses the exact Ornstein-Uhlenbeck transition when the
    fast drift is declared linear (B(y) = -y): over one step,

        Y <- Y e^(-dt/eps) + xi,   xi ~ N(0, (1 - e^(-2 dt/eps)) / 2),

    otherwise an Euler step of dY = B(Y) dt/eps + sqrt(dt/eps) dW.
    """
    if seed_W == noise_L.seed:
        raise IndependenceError("W seed equals the L seed: streams would be dependent")
    incr = np.asarray(noise_L.increments, dtype=float)
    if noise_L.grid != grid:
        raise ShapeError("noise grid does not match the simulation grid")
    batch = incr.shape[:-2]
    m = len(spec.y0)
    rngs = (
        [generator(seed_W, noise_L.path_index)]
        if not batch
        else [generator(seed_W, i) for i in range(batch[0])]
    )
    normals = np.stack(
        [r.standard_normal((grid.n_steps, m)) for r in rngs], axis=0
    ).reshape(batch + (grid.n_steps, m))
    return _slow_fast_core(spec, grid, incr, normals)


def _slow_fast_core(spec: SlowFastSpec, grid: TimeGrid, incr: np.ndarray, normals: np.ndarray):
    batch = incr.shape[:-2]
    n_dim = len(spec.x0)
    m_dim = len(spec.y0)
    dt = grid.dt
    x = np.broadcast_to(spec.x0, batch + (n_dim,)).copy()
    y = np.broadcast_to(spec.y0, batch + (m_dim,)).copy()
    slow = np.empty(batch + (grid.n_steps + 1, n_dim))
    fast = np.empty(batch + (grid.n_steps + 1, m_dim))
    slow[..., 0, :] = x
    fast[..., 0, :] = y
    times = grid.times()
    decay, noise_std = _ou_step_factors(dt, spec.epsilon)
    euler_std = np.sqrt(dt / spec.epsilon)
    for k in range(grid.n_steps):
        x = x + spec.f_coupling(x, y) * dt + _apply_diffusion(
            spec.sigma_slow(times[k], x), incr[..., k, :]
        )
        if spec.fast_is_linear:
            y = y * decay + noise_std * normals[..., k, :]
        else:
            y = y + np.asarray(spec.fast_drift(y), dtype=float) * (dt / spec.epsilon) \
                + euler_std * normals[..., k, :]
        slow[..., k + 1, :] = x
        fast[..., k + 1, :] = y
    return slow, fast


def sup_error(path_a: np.ndarray, path_b: np.ndarray, p: float = 1.0):
    """(sup_t |a_t - b_t|)^p per path pair; batch axes pass through."""
    a = np.asarray(path_a, dtype=float)
    b = np.asarray(path_b, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f"path shapes differ: {a.shape} vs {b.shape}")
    gap = np.sqrt(((a - b) ** 2).sum(axis=-1))
    return gap.max(axis=-1) ** p
