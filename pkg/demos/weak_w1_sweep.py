"""Weak convergence for a rough drift, measured on 1-d marginals.

Here the spatial drift factor is only 0.2-Hoelder (a lacunary cosine sum at
the boundary of the weak-convergence region for alpha = 1.6), realised as
its Gaussian-mollified representative at level n = 32 so strong solutions
exist to simulate.  No coupling is available in this regime: the two
ensembles run on independent noise and only the marginal laws are compared,
via the exact sorted-sample W1 on the line.  The distances drift down the
eps ladder -- convergence without a certified rate, so the check is
monotonicity within sampling error, not a slope.
"""

from levyavg import ExperimentConfig, SdeSystemDecl, run_weak_w1
from levyavg.experiments import rough_drift_expression

alpha = 1.6
beta = 1.0 - alpha / 2.0
rough = rough_drift_expression(beta, n_modes=7, mollify_n=32, amplitude=3.0)
decl = SdeSystemDecl(
    alpha=alpha,
    drift=(f"cos(t)*({rough})",),
    sigma="1",
    holder_beta=beta,
    gamma=beta,
    drift_bar=("0",),
    mollify_n=32,
)
config = ExperimentConfig(
    kind="weak_w1",
    system=decl,
    epsilon_list=tuple(2.0 ** -k for k in range(3, 7)),
    n_paths=2000,  # acceptance runs 5000 per side
    T=1.0,
    dt_factor=10,
    master_seed=9,
    n_threads=4,
    checkpoint_times=(0.25, 0.5, 1.0),
)
table, estimates = run_weak_w1(config)
by_t = {}
for e in estimates:
    by_t.setdefault(e.t, []).append(e)
for t, seq in sorted(by_t.items()):
    print(f"t = {t}")
    for e in seq:
        print(f"  eps = {e.epsilon:8.5f}: W1 = {e.value:7.4f} +- {e.stderr:.4f}")
