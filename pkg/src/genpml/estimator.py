"""Scikit-learn style wrappers around the moment-condition machinery.

GeneralizedPMLRegressor fits a single exponent; KappaSelectionCV picks the
exponent by cross-validation first. Both predict the conditional mean
exp(theta' x) and inherit R^2 scoring, get_params/set_params, and cloning
from the scikit-learn base classes, so they drop into pipelines and searches.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import Dataset, EstimatorSpec, conditional_mean
from .exceptions import ConvergenceError, DataValidationError, DimensionMismatchError
from .selection import DEFAULT_KAPPA_GRID, cross_validate
from .solver import fit as _fit_moment_problem
from .validation import as_design_matrix, as_outcome_vector, check_same_n


class GeneralizedPMLRegressor(RegressorMixin, BaseEstimator):
    """Exponential-mean regression solving the kappa-weighted moment condition.

    Parameters
    ----------
    kappa : float in [-1, 1]
        Residual weight exponent: 0 gives the Poisson score, 1 nonlinear
        least squares, -1 the gamma score.
    c : float >= 0
        Shift inside the weight (c + mu)^kappa.
    fit_intercept : bool
        Prepend an all-ones column before solving.
    compute_std_errors : bool
        Attach sandwich standard errors after a converged fit.

    Attributes
    ----------
    coef_, intercept_, theta_, std_errors_, covariance_, converged_,
    moment_norm_, n_iter_, n_features_in_
    """

    def __init__(self, kappa: float = 0.0, c: float = 0.0, tol: float = 1e-8,
                 max_iter: int = 200, fit_intercept: bool = False,
                 compute_std_errors: bool = True):
        self.kappa = kappa
        self.c = c
        self.tol = tol
        self.max_iter = max_iter
        self.fit_intercept = fit_intercept
        self.compute_std_errors = compute_std_errors

    def _design(self, X: np.ndarray) -> np.ndarray:
        if self.fit_intercept:
            return np.column_stack([np.ones(X.shape[0]), X])
        return X

    def fit(self, X, y):
        X = as_design_matrix(X)
        y = as_outcome_vector(y)
        check_same_n(y, X)
        self.n_features_in_ = X.shape[1]
        spec = EstimatorSpec(kappa=self.kappa, c=self.c, tol=self.tol,
                             max_iter=self.max_iter)
        data = Dataset(y=y, X=self._design(X))
        result = _fit_moment_problem(data, spec,
                                     compute_covariance=self.compute_std_errors)
        if not result.converged:
            raise ConvergenceError(
                f"solver did not converge at kappa={self.kappa} "
                f"(moment norm {result.moment_norm:.3e})"
            )
        self.theta_ = result.theta_hat
        if self.fit_intercept:
            self.intercept_ = float(result.theta_hat[0])
            self.coef_ = result.theta_hat[1:]
        else:
            self.intercept_ = 0.0
            self.coef_ = result.theta_hat
        self.std_errors_ = result.std_errors
        self.covariance_ = result.covariance
        self.converged_ = result.converged
        self.moment_norm_ = result.moment_norm
        self.n_iter_ = result.iterations
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "theta_")
        X = as_design_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(
                f"X has {X.shape[1]} features but the model was fitted "
                f"with {self.n_features_in_}"
            )
        mu, _ = conditional_mean(self.theta_, self._design(X))
        return mu


class KappaSelectionCV(RegressorMixin, BaseEstimator):
    """Pick the exponent by k-fold out-of-sample MSE, then refit on all data.

    Attributes (after fit): kappa_, cv_result_, plus everything the refitted
    GeneralizedPMLRegressor exposes via the delegate in `estimator_`.
    """

    def __init__(self, kappa_grid=DEFAULT_KAPPA_GRID, k: int = 5,
                 seed: int = 0, c: float = 0.0, tol: float = 1e-8,
                 max_iter: int = 200, fit_intercept: bool = False):
        self.kappa_grid = kappa_grid
        self.k = k
        self.seed = seed
        self.c = c
        self.tol = tol
        self.max_iter = max_iter
        self.fit_intercept = fit_intercept

    def fit(self, X, y):
        X = as_design_matrix(X)
        y = as_outcome_vector(y)
        check_same_n(y, X)
        self.n_features_in_ = X.shape[1]
        design = X
        if self.fit_intercept:
            design = np.column_stack([np.ones(X.shape[0]), X])
        data = Dataset(y=y, X=design)
        cv = cross_validate(data, self.kappa_grid, k=self.k, seed=self.seed,
                            c=self.c, tol=self.tol, max_iter=self.max_iter)
        self.cv_result_ = cv
        self.kappa_ = cv.selected_kappa
        delegate = GeneralizedPMLRegressor(
            kappa=self.kappa_, c=self.c, tol=self.tol,
            max_iter=self.max_iter, fit_intercept=self.fit_intercept,
        )
        self.estimator_ = delegate.fit(X, y)
        self.theta_ = delegate.theta_
        self.coef_ = delegate.coef_
        self.intercept_ = delegate.intercept_
        self.std_errors_ = delegate.std_errors_
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "estimator_")
        return self.estimator_.predict(X)


class CovariateTransformer(TransformerMixin, BaseEstimator):
    """Standardize columns by population moments and/or prepend an intercept.

    Matches the conventions of the fitting CLI: scale = sqrt(mean squared
    deviation) with the n denominator, intercept column first and never
    scaled. Constant columns cannot be standardized.
    """

    def __init__(self, standardize: bool = True, add_intercept: bool = False):
        self.standardize = standardize
        self.add_intercept = add_intercept

    def fit(self, X, y=None):
        X = as_design_matrix(X)
        self.n_features_in_ = X.shape[1]
        if self.standardize:
            self.means_ = X.mean(axis=0)
            self.scales_ = X.std(axis=0)
            if np.any(self.scales_ == 0.0):
                j = int(np.argmax(self.scales_ == 0.0))
                raise DataValidationError(
                    f"column {j} is constant and cannot be standardized"
                )
        else:
            self.means_ = np.zeros(X.shape[1])
            self.scales_ = np.ones(X.shape[1])
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "means_")
        X = as_design_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(
                f"X has {X.shape[1]} features but the transformer was "
                f"fitted with {self.n_features_in_}"
            )
        out = (X - self.means_) / self.scales_
        if self.add_intercept:
            out = np.column_stack([np.ones(out.shape[0]), out])
        return out
