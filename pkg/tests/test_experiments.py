import json

import numpy as np
import pytest

from levyavg.errors import ConfigError
from levyavg.experiments import (
    ExperimentConfig,
    SdeSystemDecl,
    batch_stderr,
    fit_loglog,
    rough_drift_expression,
    run_ex1,
    run_mollifier_check,
    run_schauder_sweep,
    run_strong_rate,
    run_weak_w1,
    w1_sorted,
)
from levyavg.expr import compile_expression
from levyavg.storage import write_manifest


# --- W1 on the line -----------------------------------------------------------


def test_w1_identical_samples_is_zero():
    a = np.array([0.3, -1.0, 2.0, 5.5])
    assert w1_sorted(a, a.copy()) == 0.0


def test_w1_translation_is_the_shift():
    rng = np.random.Generator(np.random.Philox(key=np.uint64(51)))
    a = rng.standard_normal(1000)
    c = 0.73
    assert w1_sorted(a, a + c) == pytest.approx(c, abs=1e-12)


def test_w1_two_point_example():
    # brute force over the two pairings: min(|0-1|+|2-1|, |0-1|+|2-1|)/2 = 1
    assert w1_sorted(np.array([0.0, 2.0]), np.array([1.0, 1.0])) == 1.0


def test_w1_requires_equal_sizes():
    with pytest.raises(Exception):
        w1_sorted(np.zeros(3), np.zeros(4))


# --- helpers ------------------------------------------------------------------


def test_fit_loglog_recovers_exponent():
    x = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    fit = fit_loglog(x, 3.0 * x**-0.7)
    assert fit.slope == pytest.approx(-0.7, abs=1e-12)
    assert fit.stderr == pytest.approx(0.0, abs=1e-10)
    assert fit.resid_rms == pytest.approx(0.0, abs=1e-10)


def test_batch_stderr_scales_like_root_n():
    rng = np.random.Generator(np.random.Philox(key=np.uint64(52)))
    vals = rng.standard_normal(10_000)
    se = batch_stderr(vals)
    assert se == pytest.approx(1.0 / 100.0, rel=0.5)


def test_rough_drift_expression_compiles_and_scales():
    src = rough_drift_expression(0.2, n_modes=5, mollify_n=32, amplitude=2.0)
    f = compile_expression(src)
    x = np.linspace(0, 2 * np.pi, 65)
    vals = f(x=x)
    assert np.all(np.isfinite(vals))
    half = compile_expression(rough_drift_expression(0.2, n_modes=5, mollify_n=32, amplitude=1.0))
    assert np.allclose(vals, 2.0 * half(x=x))


# --- config validation ----------------------------------------------------------


def small_decl(**kw):
    args = dict(alpha=1.5, drift=("cos(t)",), sigma="1", holder_beta=0.99, drift_bar=("0",))
    args.update(kw)
    return SdeSystemDecl(**args)


def test_config_rejects_short_ladder():
    with pytest.raises(ConfigError):
        ExperimentConfig(
            kind="strong_rate",
            system=small_decl(),
            epsilon_list=(0.25, 0.125, 0.0625),
            n_paths=200,
        )


def test_config_rejects_nonmonotone_ladder():
    with pytest.raises(ConfigError):
        ExperimentConfig(
            kind="strong_rate",
            system=small_decl(),
            epsilon_list=(0.25, 0.5, 0.125, 0.0625),
            n_paths=200,
        )


def test_config_rejects_small_ensembles():
    with pytest.raises(ConfigError):
        ExperimentConfig(
            kind="strong_rate",
            system=small_decl(),
            epsilon_list=(0.25, 0.125, 0.0625, 0.03125),
            n_paths=50,
        )


def test_config_enforces_moment_bound_for_varying_sigma():
    decl = small_decl(sigma="1+0.1*cos(t)", holder_beta=0.9, gamma=0.9)
    with pytest.raises(ConfigError):
        ExperimentConfig(
            kind="strong_rate",
            system=decl,
            epsilon_list=(0.25, 0.125, 0.0625, 0.03125),
            n_paths=200,
            p=1.6,  # >= alpha is out for multiplicative noise
        )
    ExperimentConfig(
        kind="strong_rate",
        system=decl,
        epsilon_list=(0.25, 0.125, 0.0625, 0.03125),
        n_paths=200,
        p=1.2,
    )


def test_config_unknown_kind():
    with pytest.raises(ConfigError):
        ExperimentConfig(kind="nope")


def test_weak_config_needs_checkpoints():
    with pytest.raises(ConfigError):
        ExperimentConfig(
            kind="weak_w1",
            system=small_decl(),
            epsilon_list=(0.25, 0.125),
            n_paths=200,
        )


def test_empty_ladders_rejected_by_sweeps():
    with pytest.raises(ConfigError):
        run_schauder_sweep(ExperimentConfig(kind="schauder_sweep", options={"alpha": 1.5}))
    with pytest.raises(ConfigError):
        run_mollifier_check(ExperimentConfig(kind="mollifier_check", options={}))


def test_gamma_required_for_nonseparable():
    with pytest.raises(ConfigError):
        SdeSystemDecl(alpha=1.5, drift=("cos(t+x)",), separable=False)


# --- runners: determinism and consistency ----------------------------------------


def tiny_strong_config(threads=1, seed=3):
    return ExperimentConfig(
        kind="strong_rate",
        system=small_decl(),
        epsilon_list=(2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6),
        n_paths=600,  # > 2 chunks so the thread pool actually splits work
        T=1.0,
        dt_factor=20,
        master_seed=seed,
        n_threads=threads,
    )


def test_csv_bytes_independent_of_thread_count():
    t1, _ = run_strong_rate(tiny_strong_config(threads=1))
    t3, _ = run_strong_rate(tiny_strong_config(threads=3))
    assert t1.body() == t3.body()
    assert t1.body().startswith("#schema=strong-rate/1\n")


def test_strong_rate_reproducible_and_seed_sensitive():
    a, _ = run_strong_rate(tiny_strong_config(seed=3))
    b, _ = run_strong_rate(tiny_strong_config(seed=3))
    c, _ = run_strong_rate(tiny_strong_config(seed=4))
    assert a.body() == b.body()
    assert a.body() != c.body()


def test_ex1_rows_within_two_dt():
    config = ExperimentConfig(
        kind="ex1_exact",
        epsilon_list=tuple(2.0 ** -k for k in range(4, 8)),
        n_paths=3,
        T=1.0,
        dt_factor=20,
        options={"alpha": 0.8},
    )
    table, rate = run_ex1(config)
    for row in table.rows:
        assert abs(row["mean_sup_error_p"] - row["epsilon"]) <= 2.0 * row["dt"]
    assert rate.empirical_slope == pytest.approx(1.0, abs=0.02)


def test_coupled_marginal_w1_bounded_by_mean_gap():
    # the synchronous coupling witnesses W1 <= E|X^eps_t - Xbar_t|
    config = tiny_strong_config()
    config.options["keep_paths"] = True
    table, _ = run_strong_rate(config)
    for eps, (pe, pb) in table.metadata["paths"].items():
        for idx in (pe.shape[1] // 2, pe.shape[1] - 1):
            w1 = w1_sorted(pe[:, idx, 0], pb[:, idx, 0])
            mean_gap = float(np.mean(np.abs(pe[:, idx, 0] - pb[:, idx, 0])))
            assert w1 <= mean_gap + 1e-12


def test_weak_w1_identical_ensembles_vanish():
    # same seed, same spec, same stream tag: W1 must be exactly 0
    from levyavg.experiments import _TAG_L, _increment_block, _wrap_noise
    from levyavg.noise import StableParams, TimeGrid
    from levyavg.sde import euler_maruyama

    decl = small_decl()
    grid = TimeGrid(0.0, 1.0, 64)
    incr = _increment_block(decl.alpha, grid, 7, _TAG_L, 0, 128)
    noise = _wrap_noise(incr, StableParams(decl.alpha), grid, 1, 7, 0)
    avg = decl.build_averaged()
    a = euler_maruyama(avg, grid, noise)
    b = euler_maruyama(avg, grid, noise)
    assert w1_sorted(a[:, -1, 0], b[:, -1, 0]) == 0.0


def test_manifest_written(tmp_path):
    table, _ = run_ex1(
        ExperimentConfig(
            kind="ex1_exact",
            epsilon_list=(2.0**-4, 2.0**-5, 2.0**-6, 2.0**-7),
            T=1.0,
            options={"alpha": 1.0},
        )
    )
    csv_path = tmp_path / "results.csv"
    digest = table.write(csv_path)
    write_manifest(tmp_path / "manifest.json", {"kind": "ex1_exact"}, {"results.csv": digest})
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["csv_sha256"]["results.csv"] == digest
    assert csv_path.read_text().startswith("#schema=ex1-exact/1\n")
