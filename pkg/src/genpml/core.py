"""Domain types shared by all modules, plus the exponential-mean link utilities.

The estimator family is indexed by a real ``kappa`` in [-1, 1] and a
non-negative shift ``c``; the conditional mean model is mu_i = exp(theta' x_i)
throughout. ``kappa = 1`` is nonlinear least squares, ``kappa = 0`` Poisson,
``kappa = -1`` (c = 0) gamma, and ``kappa = -1`` with c = 1/b the negative
binomial moment condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import DataValidationError, DimensionMismatchError
from .validation import (
    as_design_matrix,
    as_outcome_vector,
    as_parameter_vector,
    check_same_n,
)

# Linear predictors above this threshold saturate exp() and raise the overflow
# flag (natural log of the largest finite double, minus 2 for headroom).
OVERFLOW_THRESHOLD: float = float(np.log(np.finfo(np.float64).max)) - 2.0


@dataclass(frozen=True)
class Dataset:
    """An estimation sample: non-negative outcomes y and an n x d design X.

    Immutable after construction (arrays are made read-only); safe to share
    across concurrent tasks.
    """

    y: np.ndarray
    X: np.ndarray
    feature_names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        y = as_outcome_vector(self.y)
        X = as_design_matrix(self.X)
        check_same_n(y, X)
        n, d = X.shape
        if d < 1:
            raise DataValidationError("X must have at least one column")
        if n < d:
            raise DataValidationError(
                f"need at least as many observations as parameters (n={n} < d={d})"
            )
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != d:
                raise DimensionMismatchError(
                    f"feature_names has length {len(names)} but X has d={d} columns"
                )
            object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class EstimatorSpec:
    """Identifies one generalized PML estimator plus solver controls.

    Parameters
    ----------
    kappa : float in [-1, 1]
        Family index: the moment weight is (c + mu)^kappa.
    c : float >= 0
        Weight shift; 0 for the NLS/Poisson/gamma family.
    tol : float > 0
        Convergence tolerance on the max-norm of the (sample-average) moment
        vector, scaled by max(1, mean(y)).
    max_iter : int
        Newton iteration budget per continuation stage.
    continuation_step : float > 0
        Step length of the kappa-continuation path from the Poisson solution.
    """

    kappa: float = 0.0
    c: float = 0.0
    tol: float = 1e-8
    max_iter: int = 200
    continuation_step: float = 0.1

    def __post_init__(self):
        if not np.isfinite(self.kappa) or not (-1.0 <= self.kappa <= 1.0):
            raise DataValidationError(f"kappa must lie in [-1, 1], got {self.kappa}")
        if not np.isfinite(self.c) or self.c < 0:
            raise DataValidationError(f"c must be non-negative, got {self.c}")
        if not self.tol > 0:
            raise DataValidationError(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) < 1:
            raise DataValidationError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.continuation_step > 0:
            raise DataValidationError(
                f"continuation_step must be positive, got {self.continuation_step}"
            )


@dataclass(frozen=True)
class FitResult:
    """Solution of the estimating equations with convergence diagnostics."""

    theta_hat: np.ndarray
    moment_norm: float
    iterations: int
    converged: bool
    covariance: Optional[np.ndarray] = None
    std_errors: Optional[np.ndarray] = None
    trace: Optional["SolverTrace"] = field(default=None, repr=False)


@dataclass
class TraceRecord:
    """One accepted solver step."""

    kappa: float
    theta: np.ndarray
    moment_norm: float
    step: float


@dataclass
class SolverTrace:
    """Accepted-iteration history and the termination reason.

    ``termination`` is one of ``converged``, ``max_iter``,
    ``line_search_failed``, ``non_finite``.
    """

    records: list[TraceRecord] = field(default_factory=list)
    termination: str = "converged"

    def append(self, kappa: float, theta: np.ndarray, moment_norm: float,
               step: float) -> None:
        self.records.append(TraceRecord(kappa, np.array(theta), moment_norm, step))


def linear_predictor(theta: Sequence[float], X) -> np.ndarray:
    """Return eta with eta_i = theta' x_i."""
    Xa = np.asarray(X, dtype=np.float64)
    if Xa.ndim == 1:
        Xa = Xa.reshape(1, -1)
    th = np.asarray(theta, dtype=np.float64).reshape(-1)
    if Xa.shape[1] != th.shape[0]:
        raise DimensionMismatchError(
            f"theta has shape {th.shape} but X has shape {Xa.shape}"
        )
    return Xa @ th


def conditional_mean(theta: Sequence[float], X) -> tuple[np.ndarray, bool]:
    """Return (mu, overflowed) with mu_i = exp(theta' x_i).

    Linear predictors beyond OVERFLOW_THRESHOLD are saturated at the threshold
    before exponentiating, and the returned flag is set, rather than silently
    producing infinities.
    """
    th = as_parameter_vector(theta, name="theta")
    eta = linear_predictor(th, X)
    overflow = bool(np.any(eta > OVERFLOW_THRESHOLD))
    if overflow:
        eta = np.minimum(eta, OVERFLOW_THRESHOLD)
    return np.exp(eta), overflow
