"""Declarative experiment harness: sweeps, tables, and empirical rates.

Every experiment is reproducible from (config, master_seed): path-level
randomness is keyed by (master_seed, stream_tag, path_index) through the
counter-based generator in `levyavg.noise`, work is split into fixed-size
chunks regardless of worker count, and reductions happen in path order, so
the emitted CSV bodies are byte-identical for any --threads value.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import NamedTuple

import numpy as np

from . import averaging, besov, pde, storage
from .errors import ConfigError, ParameterError, RegionError
from .noise import StableParams, StablePathIncrements, TimeGrid, generator
from .sde import (
    AveragedSdeSpec,
    CoefficientSpec,
    MultiscaleSdeSpec,
    SlowFastSpec,
    TimeStructure,
    _slow_fast_core,
    diffusion_constant,
    diffusion_from_expression,
    drift_from_expressions,
    euler_maruyama,
    simulate_coupled,
    sup_error,
)

CHUNK = 256  # paths per work unit; fixed so results are thread-count independent
_TAG_L = 0  # stable driving noise
_TAG_W = 1  # Brownian fast noise
_TAG_L_B = 2  # stable noise of an independent comparison ensemble

KINDS = ("strong_rate", "weak_w1", "slow_fast", "schauder_sweep", "mollifier_check", "ex1_exact")


# ---------------------------------------------------------------------------
# system declarations (serialisable: coefficients are expression strings)
# ---------------------------------------------------------------------------


def _is_constant_expr(source: str) -> bool:
    try:
        float(source)
        return True
    except ValueError:
        return False


@dataclass
class SdeSystemDecl:
    """Declarative multiscale system: everything needed to rebuild it per epsilon."""

    alpha: float
    drift: tuple  # expression strings over (t, x), one per component
    sigma: str = "1"
    holder_beta: float = 0.99
    gamma: float | None = None  # None: separable drift, gamma defaults to beta
    drift_bar: tuple = ("0",)
    sigma_bar: str | None = None
    x0: tuple = (0.0,)
    time_period: float = 2.0 * math.pi
    separable: bool = True
    mollify_n: int | None = None  # metadata: drift already holds the mollified form

    def __post_init__(self):
        if isinstance(self.drift, str):
            self.drift = (self.drift,)
        if isinstance(self.drift_bar, str):
            self.drift_bar = (self.drift_bar,)
        self.drift = tuple(self.drift)
        self.drift_bar = tuple(self.drift_bar)
        if self.gamma is None:
            if not self.separable:
                raise ConfigError("gamma must be declared for non-separable drifts")
            self.gamma = self.holder_beta
        if self.gamma > self.holder_beta:
            raise ConfigError("gamma must be <= the declared Hoelder exponent")

    @property
    def dim(self) -> int:
        return len(self.drift)

    def sigma_is_constant(self) -> bool:
        return _is_constant_expr(self.sigma)

    def _diffusion(self, source):
        if _is_constant_expr(source):
            return diffusion_constant(float(source), self.dim)
        return diffusion_from_expression(source, self.dim)

    def build_multiscale(self, epsilon: float) -> MultiscaleSdeSpec:
        coeffs = CoefficientSpec(
            drift=drift_from_expressions(self.drift),
            diffusion=self._diffusion(self.sigma),
            holder_beta=self.holder_beta,
            time_structure=TimeStructure(kind="periodic", period=self.time_period),
        )
        return MultiscaleSdeSpec(coeffs=coeffs, alpha=self.alpha, epsilon=epsilon, x0=np.array(self.x0))

    def build_averaged(self) -> AveragedSdeSpec:
        from .expr import variables_of

        src = self.sigma_bar if self.sigma_bar is not None else self.sigma
        if not _is_constant_expr(src) and "t" in variables_of(src):
            raise ConfigError("sigma_bar must be time-independent")
        return AveragedSdeSpec(
            drift_bar=drift_from_expressions(self.drift_bar),
            diffusion_bar=self._diffusion(src),
            alpha=self.alpha,
            x0=np.array(self.x0),
        )


@dataclass
class SlowFastDecl:
    """Declarative slow-fast system with a linear (exact OU) fast part by default."""

    alpha: float
    f: str  # expression over (x, y)
    f_bar: str  # expression over x: the invariant-measure average of f
    beta1: float
    sigma: str = "1"
    x0: tuple = (0.0,)
    y0: tuple = (0.0,)
    kappa: float = 0.05
    iota: float = 0.01

    def build(self, epsilon: float) -> SlowFastSpec:
        from .expr import compile_expression

        f_fn = compile_expression(self.f)

        def coupling(x, y):
            return np.stack(
                [np.broadcast_to(f_fn(x=x[..., 0], y=y[..., 0]), x[..., 0].shape)], axis=-1
            )

        return SlowFastSpec(
            f_coupling=coupling,
            fast_drift=lambda y: -y,
            epsilon=epsilon,
            x0=np.array(self.x0),
            y0=np.array(self.y0),
            sigma_slow=diffusion_constant(float(self.sigma), len(self.x0)),
            fast_is_linear=True,
        )

    def build_averaged(self) -> AveragedSdeSpec:
        return AveragedSdeSpec(
            drift_bar=drift_from_expressions((self.f_bar,)),
            diffusion_bar=diffusion_constant(float(self.sigma), len(self.x0)),
            alpha=self.alpha,
            x0=np.array(self.x0),
        )


def rough_drift_expression(beta: float, n_modes: int, mollify_n: int | None = None, amplitude: float = 1.0) -> str:
    """Lacunary cosine sum with block amplitudes 2^(-beta j): a C^beta representative.

    With a mollification level n, each mode k = 2^j carries the exact Gaussian
    kernel symbol e^(-k^2 / (2 n^2)), realising the mollified drift in closed
    form (no grid interpolation enters the simulation).
    """
    phases = [0.7548776662466927 * (j + 1) * 2.0 * math.pi for j in range(n_modes)]  # golden-ratio spaced
    terms = []
    for j in range(n_modes):
        k = 2**j
        a = amplitude * 2.0 ** (-beta * j)
        if mollify_n is not None:
            a *= math.exp(-(k / mollify_n) ** 2 / 2.0)
        terms.append(f"{a!r}*cos({k}*x+{phases[j] % (2.0 * math.pi)!r})")
    return "+".join(terms)


# ---------------------------------------------------------------------------
# experiment configuration and result containers
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    kind: str
    system: object = None  # SdeSystemDecl | SlowFastDecl | dict of kind-specific options
    epsilon_list: tuple = ()
    n_paths: int = 0
    T: float = 1.0
    dt_factor: int = 20  # dt = epsilon / dt_factor for multiscale runs
    p: float = 1.0
    master_seed: int = 0
    strict_mode: bool = False
    n_threads: int = 1
    checkpoint_times: tuple = ()
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; pick one of {KINDS}")
        self.epsilon_list = tuple(float(e) for e in self.epsilon_list)
        if self.kind in ("strong_rate", "slow_fast", "ex1_exact", "weak_w1"):
            need = 4 if self.kind != "weak_w1" else 2
            if len(self.epsilon_list) < need:
                raise ConfigError(
                    f"{self.kind} needs an epsilon ladder of length >= {need} "
                    f"(got {len(self.epsilon_list)})"
                )
            if not all(a > b for a, b in zip(self.epsilon_list, self.epsilon_list[1:])):
                raise ConfigError("epsilon_list must be strictly decreasing")
            if self.dt_factor < 1:
                raise ConfigError("dt_factor must be a positive integer")
        if self.kind in ("strong_rate", "slow_fast", "weak_w1"):
            if self.n_paths < 100:
                raise ConfigError("statistical runs need n_paths >= 100")
        if self.kind in ("strong_rate", "weak_w1") and isinstance(self.system, SdeSystemDecl):
            if not self.system.sigma_is_constant() and not self.p < self.system.alpha:
                raise ConfigError(
                    f"p = {self.p} must be < alpha = {self.system.alpha} when sigma varies"
                )
        if self.kind == "weak_w1" and not self.checkpoint_times:
            raise ConfigError("weak_w1 needs checkpoint_times")

    def echo(self) -> dict:
        d = asdict(self)
        return d


@dataclass
class ResultTable:
    columns: list
    rows: list  # list of dicts
    schema: str
    metadata: dict = field(default_factory=dict)

    def column(self, name) -> np.ndarray:
        return np.array([row[name] for row in self.rows], dtype=float)

    def body(self) -> str:
        return storage.format_csv(self.columns, self.rows, self.schema)

    def write(self, path) -> str:
        return storage.write_csv(path, self.columns, self.rows, self.schema)


@dataclass
class W1Estimate:
    t: float
    epsilon: float
    value: float
    stderr: float
    n_samples: int


def w1_sorted(a: np.ndarray, b: np.ndarray) -> float:
    """W1 between two equal-size empirical measures on the line.

    Sorting both samples realises the optimal monotone coupling, so the mean
    absolute gap of order statistics is exactly the transport cost.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ParameterError("w1_sorted needs equal sample sizes")
    return float(np.mean(np.abs(a - b)))


def batch_stderr(values: np.ndarray, n_batches: int = 10) -> float:
    """Standard error of the mean via contiguous path batches (>= 10)."""
    values = np.asarray(values, dtype=float)
    n_batches = max(10, n_batches)
    if len(values) < n_batches:
        return float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    batches = np.array_split(values, n_batches)
    means = np.array([b.mean() for b in batches])
    return float(np.std(means, ddof=1) / math.sqrt(n_batches))


class LogLogFit(NamedTuple):
    slope: float
    stderr: float
    resid_rms: float


def fit_loglog(x: np.ndarray, y: np.ndarray) -> LogLogFit:
    """OLS slope of log y against log x with standard error and residual rms."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    n = len(lx)
    A = np.stack([lx, np.ones(n)], axis=-1)
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    slope = float(coef[0])
    rss = float(res[0]) if len(res) else float(((A @ coef - ly) ** 2).sum())
    if n > 2:
        se = math.sqrt(rss / (n - 2) / float(((lx - lx.mean()) ** 2).sum()))
    else:
        se = float("nan")
    return LogLogFit(slope, se, math.sqrt(rss / n))


# ---------------------------------------------------------------------------
# path-ensemble machinery
# ---------------------------------------------------------------------------


def _stream_index(tag: int, m: int) -> int:
    return (tag << 48) | m


def _increment_block(alpha, grid, seed, tag, lo, hi, dim=1, scale=1.0) -> np.ndarray:
    from .noise import isotropic_stable

    out = np.empty((hi - lo, grid.n_steps, dim))
    step_scale = grid.dt ** (1.0 / alpha) * scale
    for i, m in enumerate(range(lo, hi)):
        rng = generator(seed, _stream_index(tag, m))
        out[i] = step_scale * isotropic_stable(alpha, rng, grid.n_steps, dim)
    return out


def _normal_block(grid, seed, tag, lo, hi, dim=1) -> np.ndarray:
    out = np.empty((hi - lo, grid.n_steps, dim))
    for i, m in enumerate(range(lo, hi)):
        out[i] = generator(seed, _stream_index(tag, m)).standard_normal((grid.n_steps, dim))
    return out


def _map_chunks(worker, n_items: int, n_threads: int) -> np.ndarray:
    spans = [(lo, min(lo + CHUNK, n_items)) for lo in range(0, n_items, CHUNK)]
    if n_threads <= 1:
        parts = [worker(lo, hi) for lo, hi in spans]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as ex:
            parts = list(ex.map(lambda span: worker(*span), spans))
    return np.concatenate(parts)


def _wrap_noise(incr, params, grid, dim, seed, lo) -> StablePathIncrements:
    return StablePathIncrements(
        params=params, grid=grid, dim=dim, increments=incr, seed=seed, path_index=lo
    )


def _grid_for(T: float, epsilon: float, dt_factor: int) -> TimeGrid:
    n_steps = int(math.ceil(T * dt_factor / epsilon))
    return TimeGrid(0.0, T, n_steps)


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------


def run_strong_rate(config: ExperimentConfig):
    """Coupled strong-error sweep over the epsilon ladder.

    Returns (table, rate): per-epsilon ensemble means of sup-error^p with
    batch standard errors, and the fitted log-log slope against epsilon (the
    periodic case: ell1(T/eps) is proportional to eps) next to the
    theoretical exponent.
    """
    decl: SdeSystemDecl = config.system
    label = averaging.region_classify(decl.alpha, decl.holder_beta)
    if label not in (averaging.RegionLabel.A0, averaging.RegionLabel.A1_ONLY):
        raise RegionError(
            f"(alpha, beta) = ({decl.alpha}, {decl.holder_beta}) lies outside the "
            "strong-convergence region"
        )
    params = StableParams(alpha=decl.alpha)
    rows = []
    keep = config.options.get("keep_paths", False)
    kept = {}
    for eps in config.epsilon_list:
        grid = _grid_for(config.T, eps, config.dt_factor)
        ms = decl.build_multiscale(eps)
        avg = decl.build_averaged()

        def worker(lo, hi):
            incr = _increment_block(decl.alpha, grid, config.master_seed, _TAG_L, lo, hi, dim=decl.dim)
            noise = _wrap_noise(incr, params, grid, decl.dim, config.master_seed, lo)
            pe, pb = simulate_coupled(ms, avg, grid, noise, strict=config.strict_mode)
            if keep and lo == 0:
                kept[eps] = (pe.copy(), pb.copy())
            return sup_error(pe, pb, config.p)

        errs = _map_chunks(worker, config.n_paths, config.n_threads)
        rows.append(
            {
                "epsilon": eps,
                "dt": grid.dt,
                "mean_sup_error_p": float(errs.mean()),
                "stderr": batch_stderr(errs),
                "M": config.n_paths,
            }
        )
    table = ResultTable(
        columns=["epsilon", "dt", "mean_sup_error_p", "stderr", "M"],
        rows=rows,
        schema="strong-rate/1",
        metadata={
            "config": config.echo(),
            "region": label.value,
            # periodic drifts have ell1(T/eps) proportional to eps, so the
            # rate is fitted against log eps directly
            "fit_abscissa": "epsilon",
        },
    )
    if keep:
        table.metadata["paths"] = kept
    fit = fit_loglog(table.column("epsilon"), table.column("mean_sup_error_p"))
    table.metadata["fit"] = fit._asdict()
    theo = averaging.theoretical_rate(
        averaging.RateSpec(
            alpha=decl.alpha,
            beta=decl.holder_beta,
            gamma=decl.gamma,
            iota=config.options.get("iota", 0.01),
            p=config.p,
        )
    )
    rate = averaging.RateEstimate(
        theoretical_exponent=theo.exponent,
        empirical_slope=fit.slope,
        stderr=fit.stderr,
        n_points=len(rows),
    )
    return table, rate


def run_ex1(config: ExperimentConfig):
    """Oscillating-drift system with additive noise: the exactly solvable probe.

    The coupled difference is the Riemann sum of cos(s/eps), so each row's
    mean error must sit within eps +- 2 dt and the ladder slope is 1.
    """
    decl = SdeSystemDecl(
        alpha=config.options.get("alpha", 1.0),
        drift=("cos(t)",),
        sigma="1",
        holder_beta=0.99,
        drift_bar=("0",),
        x0=(float(config.options.get("x0", 0.0)),),
    )
    n_paths = config.n_paths if config.n_paths else 4
    params = StableParams(alpha=decl.alpha)
    rows = []
    for eps in config.epsilon_list:
        grid = _grid_for(config.T, eps, config.dt_factor)
        ms = decl.build_multiscale(eps)
        avg = decl.build_averaged()
        incr = _increment_block(decl.alpha, grid, config.master_seed, _TAG_L, 0, n_paths)
        noise = _wrap_noise(incr, params, grid, 1, config.master_seed, 0)
        pe, pb = simulate_coupled(ms, avg, grid, noise, strict=config.strict_mode)
        errs = sup_error(pe, pb, 1.0)
        rows.append(
            {
                "epsilon": eps,
                "dt": grid.dt,
                "mean_sup_error_p": float(errs.mean()),
                "spread": float(errs.max() - errs.min()),
                "M": n_paths,
            }
        )
    table = ResultTable(
        columns=["epsilon", "dt", "mean_sup_error_p", "spread", "M"],
        rows=rows,
        schema="ex1-exact/1",
        metadata={"config": config.echo()},
    )
    fit = fit_loglog(table.column("epsilon"), table.column("mean_sup_error_p"))
    table.metadata["fit"] = fit._asdict()
    rate = averaging.RateEstimate(
        theoretical_exponent=1.0, empirical_slope=fit.slope, stderr=fit.stderr, n_points=len(rows)
    )
    return table, rate


def run_weak_w1(config: ExperimentConfig):
    """Marginal W1 distances between independent multiscale/averaged ensembles."""
    decl: SdeSystemDecl = config.system
    if decl.dim != 1:
        raise ConfigError("weak_w1 supports one-dimensional systems only")
    params = StableParams(alpha=decl.alpha)
    estimates = []
    rows = []
    for eps in config.epsilon_list:
        grid = _grid_for(config.T, eps, config.dt_factor)
        ms = decl.build_multiscale(eps)
        avg = decl.build_averaged()
        idx = [min(int(round(t / grid.dt)), grid.n_steps) for t in config.checkpoint_times]

        def worker_eps(lo, hi):
            incr = _increment_block(decl.alpha, grid, config.master_seed, _TAG_L, lo, hi)
            noise = _wrap_noise(incr, params, grid, 1, config.master_seed, lo)
            path = euler_maruyama(ms, grid, noise, strict=config.strict_mode)
            return path[:, idx, 0]

        def worker_bar(lo, hi):
            incr = _increment_block(decl.alpha, grid, config.master_seed, _TAG_L_B, lo, hi)
            noise = _wrap_noise(incr, params, grid, 1, config.master_seed, lo)
            path = euler_maruyama(avg, grid, noise, strict=config.strict_mode)
            return path[:, idx, 0]

        marg_eps = _map_chunks(worker_eps, config.n_paths, config.n_threads)
        marg_bar = _map_chunks(worker_bar, config.n_paths, config.n_threads)
        for j, t in enumerate(config.checkpoint_times):
            value = w1_sorted(marg_eps[:, j], marg_bar[:, j])
            parts_a = np.array_split(marg_eps[:, j], 10)
            parts_b = np.array_split(marg_bar[:, j], 10)
            per_batch = np.array([w1_sorted(a, b) for a, b in zip(parts_a, parts_b)])
            se = float(np.std(per_batch, ddof=1) / math.sqrt(len(per_batch)))
            estimates.append(
                W1Estimate(t=t, epsilon=eps, value=value, stderr=se, n_samples=config.n_paths)
            )
            rows.append(
                {"epsilon": eps, "t": t, "w1": value, "stderr": se, "M": config.n_paths}
            )
    table = ResultTable(
        columns=["epsilon", "t", "w1", "stderr", "M"],
        rows=rows,
        schema="weak-w1/1",
        metadata={"config": config.echo()},
    )
    return table, estimates


def run_slow_fast(config: ExperimentConfig):
    """Strong error of the slow component against its averaged system."""
    decl: SlowFastDecl = config.system
    params = StableParams(alpha=decl.alpha)
    seed_w = config.master_seed + 1  # distinct stream family for the fast noise
    rows = []
    for eps in config.epsilon_list:
        grid = _grid_for(config.T, eps, config.dt_factor)
        sf = decl.build(eps)
        avg = decl.build_averaged()

        def worker(lo, hi):
            incr = _increment_block(decl.alpha, grid, config.master_seed, _TAG_L, lo, hi)
            normals = _normal_block(grid, seed_w, _TAG_W, lo, hi, dim=len(decl.y0))
            slow, _ = _slow_fast_core(sf, grid, incr, normals)
            noise = _wrap_noise(incr, params, grid, 1, config.master_seed, lo)
            bar = euler_maruyama(avg, grid, noise)
            return sup_error(slow, bar, config.p)

        errs = _map_chunks(worker, config.n_paths, config.n_threads)
        rows.append(
            {
                "epsilon": eps,
                "dt": grid.dt,
                "mean_sup_error_p": float(errs.mean()),
                "stderr": batch_stderr(errs),
                "M": config.n_paths,
            }
        )
    table = ResultTable(
        columns=["epsilon", "dt", "mean_sup_error_p", "stderr", "M"],
        rows=rows,
        schema="slow-fast/1",
        metadata={"config": config.echo()},
    )
    fit = fit_loglog(table.column("epsilon"), table.column("mean_sup_error_p"))
    table.metadata["fit"] = fit._asdict()
    theo = averaging.slow_fast_rate(decl.alpha, decl.beta1, decl.kappa, decl.iota)
    rate = averaging.RateEstimate(
        theoretical_exponent=theo.exponent,
        empirical_slope=fit.slope,
        stderr=fit.stderr,
        n_points=len(rows),
    )
    return table, rate


def run_schauder_sweep(config: ExperimentConfig):
    """Damping sweep of the regularity-gain ratio for the nonlocal equation."""
    opt = config.options
    lambdas = list(opt.get("lambda_list", ()))
    if not lambdas:
        raise ConfigError("schauder sweep needs a nonempty lambda_list")
    alpha = float(opt["alpha"])
    theta = float(opt.get("theta", 0.0))
    etas = list(opt.get("eta_list", (0.0,)))
    grid = besov.PeriodicGrid(n_points=int(opt.get("n_points", 1024)))
    n_modes = int(opt.get("n_modes", 9))
    x = grid.axis()
    f = sum(np.cos(2**j * x) for j in range(n_modes))
    T = float(opt.get("T", 1.0))
    dt = float(opt.get("dt", 1.0 / 32.0))
    rows = []
    for lam in lambdas:
        spec = pde.NonlocalPdeSpec(alpha=alpha, grid=grid, T=T, dt=dt, lam=float(lam), f=f)
        sol = pde.solve_forward(spec)
        for eta in etas:
            ratio = pde.schauder_ratio(sol, theta, float(eta))
            damping = (1.0 + lam) ** ((alpha - eta) / alpha)
            rows.append(
                {
                    "lam": float(lam),
                    "eta": float(eta),
                    "theta": theta,
                    "ratio": ratio,
                    "raw_norm": ratio / damping,
                }
            )
    table = ResultTable(
        columns=["lam", "eta", "theta", "ratio", "raw_norm"],
        rows=rows,
        schema="schauder-sweep/1",
        metadata={"config": config.echo()},
    )
    return table


def sawtooth(grid: besov.PeriodicGrid, center: float | None = None) -> np.ndarray:
    """Triangle wave |x - pi| - pi/2: Lipschitz, spectrum ~ k^-2, genuinely non-smooth."""
    c = grid.period / 2.0 if center is None else center
    x = grid.axis()
    return np.abs(x - c) - grid.period / 4.0


def run_mollifier_check(config: ExperimentConfig):
    """Mollifier growth/decay slope checks on the Lipschitz test function."""
    opt = config.options
    n_list = list(opt.get("n_list", ()))
    if not n_list:
        raise ConfigError("mollifier check needs a nonempty n_list")
    pairs = opt.get("pairs", ((0.3, 0.5),))  # (kappa, delta)
    grid = besov.PeriodicGrid(n_points=int(opt.get("n_points", 2048)))
    f = sawtooth(grid)
    rows = []
    for kappa, delta in pairs:
        rep = besov.mollifier_rate_check(f, grid, float(kappa), float(delta), n_list)
        rows.append(
            {
                "kappa": float(kappa),
                "delta": float(delta),
                "growth_slope": rep.growth_slope,
                "decay_slope": rep.decay_slope,
            }
        )
    table = ResultTable(
        columns=["kappa", "delta", "growth_slope", "decay_slope"],
        rows=rows,
        schema="mollifier-check/1",
        metadata={"config": config.echo()},
    )
    return table
