"""levyavg: multiscale SDEs driven by symmetric alpha-stable noise.

Simulation with exact-in-law stable increments, construction of averaged
systems, empirical strong/weak convergence-rate sweeps, and the spectral
Besov/Schauder diagnostics that back them.
"""

from .averaging import (
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
from .besov import (
    BesovNormResult,
    DyadicDecomposition,
    Mollifier,
    PeriodicGrid,
    besov_norm,
    frac_laplacian,
    gaussian_mollifier,
    holder_norm,
    littlewood_paley,
    mollifier_rate_check,
    mollify,
)
from .experiments import (
    ExperimentConfig,
    ResultTable,
    SdeSystemDecl,
    SlowFastDecl,
    W1Estimate,
    run_ex1,
    run_mollifier_check,
    run_schauder_sweep,
    run_slow_fast,
    run_strong_rate,
    run_weak_w1,
    w1_sorted,
)
from .noise import (
    StableParams,
    StablePathIncrements,
    TimeGrid,
    aggregate_increments,
    generator,
    sample_increments,
    sample_standard_stable,
    standard_stable,
)
from .pde import NonlocalPdeSpec, PdeSolution, elliptic_solve, schauder_ratio, solve_backward, solve_forward
from .sde import (
    AveragedSdeSpec,
    CoefficientSpec,
    Diffusion,
    Drift,
    MultiscaleSdeSpec,
    PathEnsemble,
    SlowFastSpec,
    TimeStructure,
    diffusion_constant,
    diffusion_from_expression,
    drift_from_expressions,
    drift_tabulated_periodic,
    drift_zero,
    euler_maruyama,
    simulate_coupled,
    simulate_slow_fast,
    sup_error,
)

__version__ = "0.1.0"
