"""Variance-reduced stochastic optimization with surrogate snapshots.

The package solves finite-sum problems F(w) = (1/n) sum_i f_i(w) with a
family of anchored stochastic methods whose epoch snapshot gradient is
averaged over a random subset of s components instead of all n, plus
mini-batch and coordinate-restricted variants, a decreasing-step SGD
baseline, the matching convergence-rate calculators, and a reproducible
experiment harness.
"""

from ._backend import JIT_ENABLED, backend_name
from .directions import (
    DirectionContext,
    cheap_direction,
    coordinate_direction,
    minibatch_direction,
    surrogate_gradient,
)
from .errors import (
    CheapSvrgError,
    DatasetFormatError,
    DivergenceError,
    InfeasibleBudgetError,
    InfeasibleStepError,
    NoConvergenceError,
    RankDeficientError,
)
from .harness import (
    AlgorithmSpec,
    BudgetPlan,
    InstanceSpec,
    StudyConfig,
    StudyResult,
    generate_regression_instance,
    load_dataset,
    plan_budget,
    read_traces,
    run_study,
    write_traces,
)
from .linalg import singular_values, spectral_extremes
from .objectives import (
    Dataset,
    GradientCounter,
    LEAST_SQUARES,
    ObjectiveKind,
    SmoothnessConstants,
    batch_gradient,
    component_gradient,
    component_gradient_coords,
    component_value,
    estimate_constants,
    full_gradient,
    logistic_l2,
    objective_value,
)
from .optimizers import (
    EpochConfig,
    Trace,
    run_cheap_svrg,
    run_cheaper_svrg,
    run_minibatch,
    run_sgd,
    run_svrg,
)
from .rng import SeededRng, derive_seed, sample_subset
from .theory import (
    BoundReport,
    ContractionReport,
    GradientBudget,
    TheoryParams,
    contraction_report,
    empirical_xi,
    empirical_zeta,
    epochs_needed,
    epochs_needed_formula,
    feasibility_check,
    gradient_budget,
    kappa_basic,
    kappa_coordinate,
    kappa_minibatch,
    rho_basic,
    rho_coordinate,
    rho_minibatch,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmSpec",
    "BoundReport",
    "BudgetPlan",
    "CheapSvrgError",
    "ContractionReport",
    "Dataset",
    "DatasetFormatError",
    "DirectionContext",
    "DivergenceError",
    "EpochConfig",
    "GradientBudget",
    "GradientCounter",
    "InfeasibleBudgetError",
    "InfeasibleStepError",
    "InstanceSpec",
    "JIT_ENABLED",
    "LEAST_SQUARES",
    "NoConvergenceError",
    "ObjectiveKind",
    "RankDeficientError",
    "SeededRng",
    "SmoothnessConstants",
    "StudyConfig",
    "StudyResult",
    "Trace",
    "TheoryParams",
    "backend_name",
    "batch_gradient",
    "cheap_direction",
    "component_gradient",
    "component_gradient_coords",
    "component_value",
    "contraction_report",
    "coordinate_direction",
    "derive_seed",
    "empirical_xi",
    "empirical_zeta",
    "epochs_needed",
    "epochs_needed_formula",
    "estimate_constants",
    "feasibility_check",
    "full_gradient",
    "generate_regression_instance",
    "gradient_budget",
    "kappa_basic",
    "kappa_coordinate",
    "kappa_minibatch",
    "load_dataset",
    "logistic_l2",
    "minibatch_direction",
    "objective_value",
    "plan_budget",
    "read_traces",
    "rho_basic",
    "rho_coordinate",
    "rho_minibatch",
    "run_cheap_svrg",
    "run_cheaper_svrg",
    "run_minibatch",
    "run_sgd",
    "run_study",
    "run_svrg",
    "sample_subset",
    "singular_values",
    "spectral_extremes",
    "surrogate_gradient",
    "write_traces",
]
