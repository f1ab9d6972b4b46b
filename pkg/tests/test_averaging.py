import numpy as np
import pytest

from levyavg.averaging import (
    RateEstimate,
    RateSpec,
    RegionLabel,
    average_drift,
    ell1,
    ell2,
    region_classify,
    slow_fast_rate,
    theoretical_rate,
)
from levyavg.besov import PeriodicGrid
from levyavg.errors import NoKbmError, ParameterError, RegionError
from levyavg.sde import TimeStructure


# --- average_drift -----------------------------------------------------------


def test_periodic_zero_mean_is_exact():
    b = lambda s, x: np.cos(s) * (1.0 + 0.5 * np.sin(x))
    x = np.linspace(0, 2 * np.pi, 33)
    out = average_drift(b, 10.0, x, time_structure=TimeStructure("periodic", period=2 * np.pi))
    assert np.max(np.abs(out.values)) < 1e-12
    assert out.exact_period_mean


def test_autonomous_average_is_identity():
    b = lambda s, x: np.sin(x)
    x = np.linspace(0, 2 * np.pi, 17)
    out = average_drift(b, 5.0, x, time_structure=TimeStructure("autonomous"))
    assert np.array_equal(out.values, np.sin(x))


def test_periodic_offset_mean_matches_symbolic():
    # b(t,x) = (1 + sin t) g(x):   mean over one period is exactly g
    g = lambda x: 1.0 + 0.3 * np.cos(x)
    b = lambda s, x: (1.0 + np.sin(s)) * g(x)
    x = np.linspace(0, 2 * np.pi, 33)
    out = average_drift(
        b, 8.0, x,
        time_structure=TimeStructure("periodic", period=2 * np.pi),
        declared_mean=g,
    )
    assert np.max(np.abs(out.values - g(x))) < 1e-10
    # the finite-horizon quadrature remainder against the declared mean
    assert out.remainder is not None and out.remainder < 0.2


def test_non_kbm_field_raises():
    b = lambda s, x: np.cos(np.log1p(s)) * np.ones_like(x)
    with pytest.raises(NoKbmError):
        average_drift(b, 256.0, np.linspace(0, 1, 5))


def test_average_drift_accepts_coefficient_bundle():
    from levyavg.sde import CoefficientSpec, diffusion_constant, drift_from_expressions

    coeffs = CoefficientSpec(
        drift=drift_from_expressions(("cos(t)*(1+0.5*sin(x))",)),
        diffusion=diffusion_constant(1.0),
        holder_beta=0.99,
        time_structure=TimeStructure("periodic", period=2 * np.pi),
    )
    x = np.linspace(0, 2 * np.pi, 9)[:, None]
    out = average_drift(coeffs, 10.0, x)
    assert out.exact_period_mean
    assert np.max(np.abs(out.values)) < 1e-12


def test_general_convergent_average():
    # decaying perturbation of a constant field: averages settle at 1
    b = lambda s, x: (1.0 + np.exp(-0.5 * s)) * np.ones_like(x)
    out = average_drift(b, 200.0, np.linspace(0, 1, 5))
    assert np.max(np.abs(out.values - 1.0)) < 0.05
    assert not out.exact_period_mean


# --- ell1 / ell2 -------------------------------------------------------------


@pytest.fixture
def grid():
    return PeriodicGrid(64)


def test_ell1_vanishes_at_full_period(grid):
    drift = lambda s, x: np.cos(s) * np.ones_like(x)
    zero = lambda x: np.zeros_like(x)
    assert ell1(drift, zero, np.pi, 0.0, grid) < 1e-12


def test_ell1_half_period_value(grid):
    drift = lambda s, x: np.cos(s) * np.ones_like(x)
    zero = lambda x: np.zeros_like(x)
    assert ell1(drift, zero, np.pi / 2, 0.0, grid) == pytest.approx(2.0 / np.pi, abs=1e-8)


def test_ell1_autonomous_is_zero_for_every_horizon(grid):
    drift = lambda s, x: np.sin(x)
    bar = lambda x: np.sin(x)
    for T in (0.3, 1.0, 7.0):
        assert ell1(drift, bar, T, 0.5, grid) < 1e-12


def test_ell1_negative_order_branch(grid):
    drift = lambda s, x: np.cos(s) * np.cos(4.0 * x)
    zero = lambda x: np.zeros_like(x)
    v = ell1(drift, zero, np.pi / 2, -0.5, grid)
    # Besov weight 2^(-0.5 * 2) on the block of mode 4 times the sup 2/pi
    assert v == pytest.approx(2.0 / np.pi * 2.0**-1, abs=1e-8)


def test_ell1_periodic_decay_on_dyadic_horizons(grid):
    drift = lambda s, x: np.cos(s) * np.ones_like(x)
    zero = lambda x: np.zeros_like(x)
    P = 2.0 * np.pi
    horizons = [P, 2 * P, 4 * P, 8 * P]
    vals = [ell1(drift, zero, T + P / 4, 0.0, grid) for T in horizons]
    assert all(b <= a + 1e-12 for a, b in zip(vals[:-1], vals[1:]))


def test_ell2_time_independent_sigma_is_zero(grid):
    sig = lambda s, x: 1.0 + 0.1 * np.sin(x)
    bar = lambda x: 1.0 + 0.1 * np.sin(x)
    assert ell2(sig, bar, 3.0, grid) < 1e-12


def test_ell2_oscillating_sigma_value(grid):
    sig = lambda s, x: (1.0 + 0.2 * np.cos(s)) * np.ones_like(x)
    bar = lambda x: np.ones_like(x)
    assert ell2(sig, bar, 2.0 * np.pi, grid) == pytest.approx(0.02, abs=1e-10)


def test_ell2_with_x_dependent_base(grid):
    # sigma = sigma_bar(x) + a cos(t): the gap is x-independent, C1 norm = a^2/2
    bar = lambda x: 1.0 + 0.25 * np.sin(x)
    sig = lambda s, x: bar(x) + 0.2 * np.cos(s)
    assert ell2(sig, bar, 2.0 * np.pi, grid) == pytest.approx(0.02, abs=1e-10)


# --- regions ------------------------------------------------------------------


@pytest.mark.parametrize(
    "alpha,beta,label",
    [
        (1.5, 0.9, RegionLabel.A0),
        (0.5, 0.6, RegionLabel.A2),
        (1.9, -0.4, RegionLabel.A2),
        (1.5, 0.5, RegionLabel.A1_ONLY),  # above 1 - a/2 = 0.25, below a/2 = 0.75
        (0.5, 0.8, RegionLabel.A1_ONLY),
        (0.9, 0.95, RegionLabel.A0),
        (0.3, 0.2, RegionLabel.OUTSIDE),
        (1.5, 1.0, RegionLabel.OUTSIDE),  # beta = 1 excluded: open bracket
        (1.5, 0.25, RegionLabel.A2),  # beta = 1 - a/2 boundary belongs to A2
    ],
)
def test_region_examples(alpha, beta, label):
    assert region_classify(alpha, beta) is label


def test_region_alpha_validation():
    for alpha in (0.0, 2.0, -1.0):
        with pytest.raises(ParameterError):
            region_classify(alpha, 0.5)


def test_region_partition_scan():
    alphas = np.arange(0.05, 1.951, 0.01)
    betas = np.arange(-0.9, 0.991, 0.01)
    from levyavg.averaging import _in_a0, _in_a1, _in_a2

    for a in alphas:
        for b in betas:
            label = region_classify(float(a), float(b))
            if label is RegionLabel.A0:
                assert _in_a1(a, b)  # A0 points satisfy the A1 membership predicate
            if _in_a1(a, b):
                assert not _in_a2(a, b)  # A1 and A2 are disjoint
            if label is RegionLabel.OUTSIDE:
                assert not (_in_a0(a, b) or _in_a1(a, b) or _in_a2(a, b))


# --- theoretical rates ---------------------------------------------------------


def test_rate_optimal_example():
    rate = theoretical_rate(RateSpec(alpha=1.5, beta=0.9, gamma=0.9, iota=0.01, p=1.0))
    assert rate.delta1 == 0.0
    assert rate.exponent == 1.0


@pytest.mark.parametrize(
    "alpha,expected",
    [(0.5, 2 * 0.5 / 2.5), (1.0, 2.0 / 3.0), (1.5, 2.0 / 3.5)],
)
def test_rate_gamma_zero_checkpoints(alpha, expected):
    beta = (1.0 - alpha / 2.0 + 1.0) / 2.0  # safely inside the strong region
    rate = theoretical_rate(RateSpec(alpha=alpha, beta=beta, gamma=0.0, iota=1e-6, p=1.0))
    assert rate.exponent == pytest.approx(expected, abs=1e-5)


def test_rate_region_error():
    with pytest.raises(RegionError):
        theoretical_rate(RateSpec(alpha=0.5, beta=0.6, gamma=0.0))  # A2, not A1


def test_rate_spec_validation():
    with pytest.raises(ParameterError):
        RateSpec(alpha=1.5, beta=0.9, gamma=0.95)  # gamma > beta
    with pytest.raises(ParameterError):
        RateSpec(alpha=1.5, beta=0.9, gamma=0.9, iota=0.0)
    with pytest.raises(ParameterError):
        RateSpec(alpha=1.5, beta=0.9, gamma=0.9, p=0.5)


def test_rate_monotonicity_grid():
    # nondecreasing in gamma, capped at p with equality exactly when delta1 = 0
    rng = np.random.Generator(np.random.Philox(key=np.uint64(41)))
    for _ in range(1000):
        alpha = float(rng.uniform(0.1, 1.9))
        lo = 1.0 - alpha / 2.0
        beta = float(rng.uniform(lo + 1e-3, 1.0 - 1e-3))
        gammas = np.sort(rng.uniform(-1.0, beta, size=3))
        exps = [
            theoretical_rate(RateSpec(alpha=alpha, beta=beta, gamma=float(g), iota=0.01)).exponent
            for g in gammas
        ]
        assert exps[0] <= exps[1] <= exps[2] + 1e-15
        for g, e in zip(gammas, exps):
            rate = theoretical_rate(RateSpec(alpha=alpha, beta=beta, gamma=float(g), iota=0.01))
            assert e <= 1.0 + 1e-15
            assert (e == 1.0) == (rate.delta1 == 0.0)


def test_slow_fast_rate_examples():
    r = slow_fast_rate(1.5, 0.9, kappa=0.01, iota=0.01)
    assert r.delta1 == 0.0
    assert r.exponent == pytest.approx(0.49)
    r2 = slow_fast_rate(1.0, 0.6, kappa=0.1, iota=0.05)
    assert r2.delta1 == 0.0
    assert r2.exponent == pytest.approx(0.4)


def test_slow_fast_rate_lower_bound_grid():
    # strict inequality everywhere except alpha = 1, where the delta1 >= 0
    # clamp turns the floor into an equality
    kappa = 0.05
    for alpha in np.arange(0.3, 1.95, 0.05):
        lo = 1.0 - alpha / 2.0
        for beta1 in np.arange(lo + 0.02, 0.99, 0.04):
            iota = min(0.01, (beta1 - lo) / 2.0)
            r = slow_fast_rate(float(alpha), float(beta1), kappa=kappa, iota=float(iota))
            floor = (0.5 - kappa) * min(alpha, 1.0 / alpha)
            if abs(alpha - 1.0) < 1e-12:
                assert r.exponent >= floor
            else:
                assert r.exponent > floor


def test_slow_fast_rate_validation():
    with pytest.raises(ParameterError):
        slow_fast_rate(1.5, 0.2, kappa=0.05, iota=0.01)  # beta1 below window
    with pytest.raises(ParameterError):
        slow_fast_rate(1.5, 0.9, kappa=0.6, iota=0.01)
    with pytest.raises(ParameterError):
        slow_fast_rate(1.5, 0.9, kappa=0.05, iota=0.9)  # iota outside its window


def test_rate_estimate_requires_four_points():
    with pytest.raises(ParameterError):
        RateEstimate(theoretical_exponent=1.0, empirical_slope=1.0, stderr=0.0, n_points=3)
