"""Slow-fast averaging with an ergodic Ornstein-Uhlenbeck fast process.

The fast coordinate dY = -(1/eps) Y dt + eps^(-1/2) dW equilibrates to
N(0, 1/2) on the eps time scale (simulated by its exact transition, so no
fast-scale bias enters).  A slow drift f(x, y) = cos(y) therefore averages
to E cos(Z) = e^(-1/4), and the slow path converges to the averaged system
at roughly eps^(1/2) -- the rate the ergodic-average fluctuation theory
predicts, independent of the drift's regularity in x.
"""

import numpy as np

from levyavg import ExperimentConfig, SlowFastDecl, run_slow_fast, slow_fast_rate

print(f"averaged drift oracle: E cos(Z), Z ~ N(0, 1/2)  =  e^-0.25 = {np.exp(-0.25):.6f}\n")

decl = SlowFastDecl(alpha=1.5, f="cos(y)", f_bar="exp(-0.25)", beta1=0.9, kappa=0.05, iota=0.01)
theo = slow_fast_rate(decl.alpha, decl.beta1, decl.kappa, decl.iota)
print(
    f"theoretical exponent R = {theo.exponent:.3f}"
    f"   regularity-independent floor {theo.lower_bound:.3f}\n"
)

config = ExperimentConfig(
    kind="slow_fast",
    system=decl,
    epsilon_list=tuple(2.0 ** -k for k in range(3, 8)),
    n_paths=800,
    T=1.0,
    dt_factor=20,
    master_seed=23,
    n_threads=4,
)
table, rate = run_slow_fast(config)
print(f"{'eps':>10} {'E sup|X^eps - Xbar|':>22} {'stderr':>10}")
for row in table.rows:
    print(f"{row['epsilon']:>10.5f} {row['mean_sup_error_p']:>22.6f} {row['stderr']:>10.6f}")
print(f"\nfitted slope {rate.empirical_slope:.3f} +- {rate.stderr:.3f} (floor 0.3)")
