import numpy as np
import pytest
from scipy.integrate import quad

from levyavg.besov import PeriodicGrid, besov_norm, littlewood_paley
from levyavg.errors import (
    DegenerateInputError,
    LambdaTooSmallError,
    ParameterError,
    ResolutionError,
)
from levyavg.pde import NonlocalPdeSpec, elliptic_solve, schauder_ratio, solve_backward, solve_forward


@pytest.fixture
def grid():
    return PeriodicGrid(64)


# --- forward solves ----------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.6, 1.0, 1.5, 1.9])
def test_single_mode_exact(alpha, grid):
    x = grid.axis()
    spec = NonlocalPdeSpec(alpha=alpha, grid=grid, T=1.0, dt=0.125, f=np.cos(x))
    u = solve_forward(spec).snapshots[-1]
    assert np.max(np.abs(u - (1.0 - np.exp(-1.0)) * np.cos(x))) < 1e-10


def test_single_mode_with_damping(grid):
    # |k|^alpha + lambda = 1 + 3 = 4 regardless of alpha at |k| = 1
    x = grid.axis()
    spec = NonlocalPdeSpec(alpha=1.4, grid=grid, T=1.0, dt=0.25, lam=3.0, f=np.cos(x))
    u = solve_forward(spec).snapshots[-1]
    assert np.max(np.abs(u - (1.0 - np.exp(-4.0)) / 4.0 * np.cos(x))) < 1e-10


def test_advection_matches_self_refinement(grid):
    x = grid.axis()
    kwargs = dict(alpha=1.5, grid=grid, T=0.5, g=np.full(64, 0.3), f=np.cos(2 * x))
    coarse = solve_forward(NonlocalPdeSpec(dt=1.0 / 512, **kwargs)).snapshots[-1]
    fine = solve_forward(NonlocalPdeSpec(dt=1.0 / 8192, **kwargs)).snapshots[-1]
    assert np.max(np.abs(coarse - fine)) < 1e-6


def test_advection_step_bound_enforced(grid):
    with pytest.raises(ResolutionError):
        NonlocalPdeSpec(alpha=1.5, grid=grid, T=1.0, dt=0.5, g=np.full(64, 2.0), f=np.cos(grid.axis()))


def test_mean_preservation(grid):
    x = grid.axis()
    f = np.cos(x) + 0.5 * np.sin(3 * x)  # mean-zero
    spec = NonlocalPdeSpec(alpha=1.2, grid=grid, T=1.0, dt=0.05, f=f)
    sol = solve_forward(spec)
    means = np.abs(sol.snapshots.mean(axis=1))
    assert np.max(means) < 1e-12


def test_semigroup_composition(grid):
    x = grid.axis()
    f = np.cos(x) + 0.2 * np.cos(5 * x)
    one_shot = solve_forward(
        NonlocalPdeSpec(alpha=1.3, grid=grid, T=1.0, dt=0.05, lam=0.5, f=f)
    ).snapshots[-1]
    half = NonlocalPdeSpec(alpha=1.3, grid=grid, T=0.5, dt=0.05, lam=0.5, f=f)
    u_half = solve_forward(half).snapshots[-1]
    continued = solve_forward(half, initial_state=u_half).snapshots[-1]
    assert np.max(np.abs(continued - one_shot)) < 1e-8


def test_lambda_decay_slope(grid):
    x = grid.axis()
    f = np.cos(x)
    lams = np.array([1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0])
    norms = []
    for lam in lams:
        sol = solve_forward(NonlocalPdeSpec(alpha=1.5, grid=grid, T=1.0, dt=0.125, lam=lam, f=f))
        norms.append(
            max(besov_norm(littlewood_paley(s, grid), 0.0).value for s in sol.snapshots)
        )
    norms = np.array(norms)
    assert np.all(np.diff(norms) < 0)  # nonincreasing in lambda
    slope = np.polyfit(np.log(1.0 + lams), np.log(norms), 1)[0]
    assert abs(slope - (-1.0)) < 0.15


# --- backward solves ---------------------------------------------------------


def test_backward_equals_forward_for_autonomous(grid):
    x = grid.axis()
    spec = NonlocalPdeSpec(alpha=1.1, grid=grid, T=1.0, dt=0.05, lam=0.3, f=np.cos(2 * x))
    fwd = solve_forward(spec).snapshots[-1]
    bwd = solve_backward(spec).snapshots[0]
    assert np.max(np.abs(bwd - fwd)) < 1e-12


def test_backward_zero_forcing(grid):
    spec = NonlocalPdeSpec(alpha=1.1, grid=grid, T=1.0, dt=0.05, f=None)
    assert np.max(np.abs(solve_backward(spec).snapshots)) == 0.0


def test_backward_tabulated_matches_duhamel_quadrature(grid):
    # backward solution: u(r) = int_r^T e^(-mu (s - r)) f_hat(s) ds per mode
    x = grid.axis()
    lam, alpha, T, dt = 0.7, 1.3, 1.0, 1.0 / 64
    n = int(T / dt)
    times = dt * np.arange(n + 1)
    ftab = np.cos(times)[:, None] * np.cos(x)[None, :]
    spec = NonlocalPdeSpec(alpha=alpha, grid=grid, T=T, dt=dt, lam=lam, f=ftab)
    sol = solve_backward(spec)
    mu = 1.0 + lam
    interp = lambda s: np.interp(s, times, np.cos(times))
    for idx in (0, n // 2, n - 4):
        r = times[idx]
        # integrate piece by piece: the interpolant has kinks at the grid times
        oracle = sum(
            quad(lambda s: np.exp(-mu * (s - r)) * interp(s), a, b, epsabs=1e-13)[0]
            for a, b in zip(times[idx:-1], times[idx + 1 :])
        )
        assert np.max(np.abs(sol.snapshots[idx] - oracle * np.cos(x))) < 1e-8


def test_forward_backward_reversal_identity(grid):
    # solve_backward = reverse o solve_forward o reverse, exactly by construction
    x = grid.axis()
    n = 32
    times = np.arange(n + 1) / n
    ftab = np.sin(2 * np.pi * times)[:, None] * np.cos(x)[None, :]
    spec = NonlocalPdeSpec(alpha=1.6, grid=grid, T=1.0, dt=1.0 / n, lam=0.2, f=ftab)
    rev_spec = NonlocalPdeSpec(alpha=1.6, grid=grid, T=1.0, dt=1.0 / n, lam=0.2, f=ftab[::-1].copy())
    assert np.array_equal(
        solve_backward(spec).snapshots, solve_forward(rev_spec).snapshots[::-1]
    )


# --- Schauder ratio ----------------------------------------------------------


def test_schauder_ratio_contraction_case(grid):
    spec = NonlocalPdeSpec(alpha=1.5, grid=grid, T=1.0, dt=0.125, f=np.cos(grid.axis()))
    sol = solve_forward(spec)
    assert schauder_ratio(sol, theta=0.0, eta=0.0) <= 1.0


def test_schauder_ratio_bounded_over_lambda_sweep(grid):
    x = grid.axis()
    f = np.cos(x) + np.cos(4 * x) + np.cos(16 * x)
    alpha = 1.5
    ratios = []
    for lam in (0.0, 1.0, 4.0, 16.0, 64.0):
        sol = solve_forward(NonlocalPdeSpec(alpha=alpha, grid=grid, T=1.0, dt=0.125, lam=lam, f=f))
        ratios.append(schauder_ratio(sol, theta=0.0, eta=alpha / 2.0))
    assert max(ratios) / min(ratios) <= 10.0


def test_schauder_ratio_degenerate_and_window(grid):
    spec = NonlocalPdeSpec(alpha=1.5, grid=grid, T=1.0, dt=0.125, f=None)
    sol = solve_forward(spec)
    with pytest.raises(DegenerateInputError):
        schauder_ratio(sol, theta=0.0, eta=0.0)
    spec2 = NonlocalPdeSpec(alpha=1.5, grid=grid, T=1.0, dt=0.125, f=np.cos(grid.axis()))
    sol2 = solve_forward(spec2)
    with pytest.raises(ParameterError):
        schauder_ratio(sol2, theta=0.0, eta=2.0)  # eta > alpha
    with pytest.raises(ParameterError):
        schauder_ratio(sol2, theta=1.5, eta=0.0)  # theta above the window


# --- elliptic solves ---------------------------------------------------------


def test_elliptic_single_mode(grid):
    x = grid.axis()
    for alpha in (0.7, 1.3, 1.8):
        v = elliptic_solve(alpha, 1.0, 1.0, None, np.cos(x), grid)
        assert np.max(np.abs(v + np.cos(x) / 2.0)) < 1e-12


def test_elliptic_mode_two_alpha_one(grid):
    x = grid.axis()
    v = elliptic_solve(1.0, 1.0, 3.0, None, np.cos(2 * x), grid)
    assert np.max(np.abs(v + np.cos(2 * x) / 5.0)) < 1e-12


def test_elliptic_with_advection_residual_and_lambda_monotone(grid):
    x = grid.axis()
    g = 0.2 * np.sin(x)
    f = np.cos(x)
    sups = []
    for lam in (5.0, 10.0, 20.0):
        v = elliptic_solve(1.5, 1.0, lam, g, f, grid)
        gradv = np.fft.ifft(1j * np.fft.fftfreq(64, d=1 / 64) * np.fft.fft(v)).real
        lv = -np.fft.ifft(grid.freq_radius() ** 1.5 * np.fft.fft(v)).real
        res = np.max(np.abs(lv - lam * v + g * gradv - f))
        assert res < 1e-8 * np.max(np.abs(f))
        sups.append(np.max(np.abs(v)))
    assert sups[0] > sups[1] > sups[2]


def test_elliptic_lambda_too_small(grid):
    x = grid.axis()
    with pytest.raises(LambdaTooSmallError):
        elliptic_solve(0.8, 1.0, 0.01, 5.0 * np.sin(x), np.cos(x), grid)
    with pytest.raises(LambdaTooSmallError):
        elliptic_solve(1.5, 1.0, 0.0, None, 1.0 + np.cos(x), grid)  # mean forcing at lam=0


def test_spec_validation(grid):
    with pytest.raises(ParameterError):
        NonlocalPdeSpec(alpha=2.0, grid=grid, T=1.0, dt=0.1)
    with pytest.raises(ParameterError):
        NonlocalPdeSpec(alpha=1.0, grid=grid, T=1.0, dt=0.1, c=0.0)
    with pytest.raises(ParameterError):
        NonlocalPdeSpec(alpha=1.0, grid=grid, T=1.0, dt=0.1, lam=-1.0)
    with pytest.raises(ParameterError):
        solve_forward(
            NonlocalPdeSpec(alpha=1.0, grid=grid, T=1.0, dt=0.1, f=np.ones(32))
        )
