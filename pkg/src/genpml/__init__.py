"""Pseudo-maximum-likelihood estimation for sparse non-negative outcomes.

The estimating equation weights exponential-mean residuals by a power kappa
of the conditional mean; kappa = 0 is the Poisson score, 1 nonlinear least
squares, -1 the gamma score. The package bundles the solver, a censored
data-generating process, population bias/variance analytics, exponent
selection by cross-validation, and a replication harness behind both a
plain-function API and scikit-learn style estimators.
"""

from .core import (
    Dataset,
    EstimatorSpec,
    FitResult,
    SolverTrace,
    TraceRecord,
    conditional_mean,
    linear_predictor,
)
from .exceptions import (
    ConvergenceError,
    CsvFormatError,
    DataValidationError,
    DimensionMismatchError,
    GenPMLError,
    NonFiniteEvaluationError,
    RankDeficiencyError,
    SingularMatrixError,
    UnsupportedConfigurationError,
)
from .moments import (
    MomentEval,
    evaluate,
    moment_and_jacobian,
    moment_jacobian,
    moment_vector,
    objective_and_gradient,
)
from .solver import (
    bootstrap_se,
    check_full_rank,
    fit,
    fit_path,
    fit_poisson,
    sandwich_covariance,
)
from .rng import make_rng, replication_seed
from .dgp import (
    CENSOR_FAMILIES,
    CensorSpec,
    DgpConfig,
    SimulatedSample,
    censor_probability,
    draw_covariates,
    draw_outcome,
    generate,
)
from .asymptotics import (
    PopulationContext,
    asymptotic_variance,
    bias_approximation,
    corollary_bias_1d,
    efficient_kappa,
    population_moments,
    pseudo_true,
)
from .selection import (
    DEFAULT_KAPPA_GRID,
    CvResult,
    cross_validate,
    fold_indices,
    holdout_rmse,
)
from .experiments import (
    BIAS_CSV_HEADER,
    MOMENT_CSV_HEADER,
    PHASE_CSV_HEADER,
    SWEEP_CSV_HEADER,
    BiasCheckRow,
    MomentCheckRow,
    PhaseCell,
    PhaseResult,
    ReplicationPlan,
    RmseBand,
    SweepResult,
    SweepRow,
    rmse_band,
    run_bias_check,
    run_moment_check,
    run_phase_grid,
    run_sweep,
    write_bias_csv,
    write_moment_csv,
    write_phase_csv,
    write_sweep_csv,
)
from .io import (
    TransformRecord,
    cv_to_dict,
    dump_json,
    fit_to_dict,
    load_csv,
    transform_design,
    write_dataset_csv,
)
from .estimator import (
    CovariateTransformer,
    GeneralizedPMLRegressor,
    KappaSelectionCV,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset", "EstimatorSpec", "FitResult", "SolverTrace", "TraceRecord",
    "conditional_mean", "linear_predictor",
    "GenPMLError", "DataValidationError", "DimensionMismatchError",
    "NonFiniteEvaluationError", "UnsupportedConfigurationError",
    "RankDeficiencyError", "SingularMatrixError", "ConvergenceError",
    "CsvFormatError",
    "MomentEval", "evaluate", "moment_vector", "moment_jacobian",
    "moment_and_jacobian", "objective_and_gradient",
    "fit", "fit_path", "fit_poisson", "sandwich_covariance", "bootstrap_se",
    "check_full_rank",
    "make_rng", "replication_seed",
    "CENSOR_FAMILIES", "CensorSpec", "DgpConfig", "SimulatedSample",
    "censor_probability", "draw_covariates", "draw_outcome", "generate",
    "PopulationContext", "population_moments", "pseudo_true",
    "bias_approximation", "asymptotic_variance", "efficient_kappa",
    "corollary_bias_1d",
    "DEFAULT_KAPPA_GRID", "CvResult", "cross_validate", "fold_indices",
    "holdout_rmse",
    "ReplicationPlan", "SweepResult", "SweepRow", "run_sweep",
    "write_sweep_csv", "RmseBand", "rmse_band", "PhaseResult", "PhaseCell",
    "run_phase_grid", "write_phase_csv", "MomentCheckRow", "run_moment_check",
    "write_moment_csv", "BiasCheckRow", "run_bias_check", "write_bias_csv",
    "SWEEP_CSV_HEADER", "PHASE_CSV_HEADER", "MOMENT_CSV_HEADER",
    "BIAS_CSV_HEADER",
    "TransformRecord", "transform_design", "load_csv", "write_dataset_csv",
    "fit_to_dict", "cv_to_dict", "dump_json",
    "GeneralizedPMLRegressor", "KappaSelectionCV", "CovariateTransformer",
]
