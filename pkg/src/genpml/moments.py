"""Estimating equations: the moment vector, its Jacobian, and the objective.

The family solves, for a given (kappa, c),

    m(theta) = (1/n) sum_i (y_i - mu_i) (c + mu_i)^kappa x_i = 0,
    mu_i = exp(theta' x_i).

For c = 0 the equations are the first-order condition of a concave-to-nonconcave
objective family; ``objective_and_gradient`` evaluates it with gradient equal to
n * m(theta) for every kappa in [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Dataset, EstimatorSpec, conditional_mean, linear_predictor
from .exceptions import NonFiniteEvaluationError, UnsupportedConfigurationError
from .validation import as_parameter_vector

# Below these distances from the removable singularities at kappa = 0 and
# kappa = -1 the closed-form Poisson/gamma objectives are used instead of the
# generic (1/kappa, 1/(kappa+1)) coefficients.
_KAPPA_EPS = 1e-10


@dataclass(frozen=True)
class MomentEval:
    """Moment vector, Jacobian, and (when defined) the objective at one theta."""

    m: np.ndarray
    J: np.ndarray
    objective: Optional[float] = None


def _mu_or_raise(theta: np.ndarray, data: Dataset) -> np.ndarray:
    mu, overflowed = conditional_mean(theta, data.X)
    if overflowed:
        raise NonFiniteEvaluationError(
            "conditional mean overflowed during moment evaluation", theta=theta
        )
    return mu


def _check_finite(arr: np.ndarray, theta: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEvaluationError(
            f"non-finite {what} at theta={theta}", theta=theta
        )
    return arr


def moment_vector(theta, data: Dataset, spec: EstimatorSpec) -> np.ndarray:
    """Sample-average moment vector m(theta) (a d-vector)."""
    th = as_parameter_vector(theta, data.d)
    mu = _mu_or_raise(th, data)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        w = _weights(mu, spec)
        m = ((data.y - mu) * w) @ data.X / data.n
    return _check_finite(m, th, "moment vector")


def moment_jacobian(theta, data: Dataset, spec: EstimatorSpec) -> np.ndarray:
    """Analytic Jacobian dm/dtheta, symmetric by construction."""
    th = as_parameter_vector(theta, data.d)
    mu = _mu_or_raise(th, data)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        J = _jacobian_from_mu(mu, data, spec)
    return _check_finite(J, th, "moment Jacobian")


def moment_and_jacobian(theta, data: Dataset,
                        spec: EstimatorSpec) -> tuple[np.ndarray, np.ndarray]:
    """Both m and its Jacobian sharing one conditional-mean evaluation."""
    th = as_parameter_vector(theta, data.d)
    mu = _mu_or_raise(th, data)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        w = _weights(mu, spec)
        m = ((data.y - mu) * w) @ data.X / data.n
        J = _jacobian_from_mu(mu, data, spec)
    _check_finite(m, th, "moment vector")
    _check_finite(J, th, "moment Jacobian")
    return m, J


def _weights(mu: np.ndarray, spec: EstimatorSpec) -> np.ndarray:
    if spec.kappa == 0.0:
        return np.ones_like(mu)
    return np.power(spec.c + mu, spec.kappa)


def _jacobian_from_mu(mu: np.ndarray, data: Dataset,
                      spec: EstimatorSpec) -> np.ndarray:
    kappa, c = spec.kappa, spec.c
    base = np.power(c + mu, kappa - 1.0)
    scale = base * (kappa * mu * (data.y - mu) - mu * (c + mu))
    return (data.X * scale[:, None]).T @ data.X / data.n


def objective_and_gradient(theta, data: Dataset, kappa: float,
                           c: float = 0.0) -> tuple[float, np.ndarray]:
    """Objective whose gradient is n * moment_vector(theta) at the same kappa.

    Defined for c = 0 only. Near the removable singularities the closed-form
    Poisson (kappa = 0) and gamma (kappa = -1) objectives are dispatched to;
    elsewhere the generic form

        sum_i (1/kappa) y_i exp(kappa eta_i) - (1/(kappa+1)) exp((kappa+1) eta_i)

    is used, which also covers kappa = 1 (the squared-loss objective up to an
    affine rescaling that this normalization removes).
    """
    if c != 0.0:
        raise UnsupportedConfigurationError(
            f"the objective family is defined only for c = 0, got c = {c}"
        )
    if not (-1.0 <= kappa <= 1.0):
        raise UnsupportedConfigurationError(
            f"kappa must lie in [-1, 1], got {kappa}"
        )
    th = as_parameter_vector(theta, data.d)
    eta = linear_predictor(th, data.X)
    y, X, n = data.y, data.X, data.n

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if abs(kappa) < _KAPPA_EPS:
            value = float(np.sum(y * eta - np.exp(eta)))
            grad = (y - np.exp(eta)) @ X
        elif abs(kappa + 1.0) < _KAPPA_EPS:
            e_neg = np.exp(-eta)
            value = float(np.sum(-eta - y * e_neg))
            grad = (y * e_neg - 1.0) @ X
        else:
            e_k = np.exp(kappa * eta)
            e_k1 = np.exp((kappa + 1.0) * eta)
            value = float(np.sum(y * e_k / kappa - e_k1 / (kappa + 1.0)))
            grad = (y * e_k - e_k1) @ X

    if not np.isfinite(value):
        raise NonFiniteEvaluationError(
            f"non-finite objective at theta={th}", theta=th
        )
    return value, _check_finite(np.asarray(grad, dtype=np.float64), th, "gradient")


def evaluate(theta, data: Dataset, spec: EstimatorSpec,
             with_objective: bool = True) -> MomentEval:
    """Bundle m, J, and (for c = 0) the objective into one MomentEval."""
    m, J = moment_and_jacobian(theta, data, spec)
    objective = None
    if with_objective and spec.c == 0.0:
        objective, _ = objective_and_gradient(theta, data, spec.kappa)
    return MomentEval(m=m, J=J, objective=objective)
