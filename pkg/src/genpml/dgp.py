"""Synthetic data generation: exponential means, heteroskedastic multiplicative
noise, and asymmetric censoring to zero.

An observation is built as

    mu0_i  = exp(theta0' x_i)
    y_i    = 0                with probability P(x_i)   (censored branch)
    y_i    = mu0_i * eta_i    otherwise,

where eta is mean-one log-normal with Var[eta] = mu0^(alpha-2), so the
uncensored conditional variance is exactly mu0^alpha. The censoring
probability P decreases in mu0 — zeros concentrate where the mean is small.

Random-stream layout of ``generate`` (one Philox stream per config.seed, see
module ``rng``): covariate column 1 (n standard normals), covariate column 2
(n uniforms), censoring uniforms (n, consumed before the noise normals), noise
normals (n); each block in row order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Dataset
from .exceptions import DataValidationError
from .rng import make_rng

CENSOR_FAMILIES = ("none", "logistic_power", "double_exponential", "threshold")


@dataclass(frozen=True)
class CensorSpec:
    """Censoring-probability family and its parameters.

    families: ``none`` (P = 0), ``logistic_power`` (P = 1 / (1 + (tau*mu0)^beta)),
    ``double_exponential`` (P = exp(-(tau*mu0)^beta)), ``threshold``
    (P = 1 if mu0 <= threshold_c else 0).
    """

    family: str = "none"
    tau: float = 1.0
    beta: float = 1.0
    threshold_c: float = 1.0

    def __post_init__(self):
        if self.family not in CENSOR_FAMILIES:
            raise DataValidationError(
                f"unknown censoring family {self.family!r}; "
                f"expected one of {CENSOR_FAMILIES}"
            )
        if self.family in ("logistic_power", "double_exponential"):
            if not (self.tau > 0 and self.beta > 0):
                raise DataValidationError(
                    f"tau and beta must be positive, got tau={self.tau}, beta={self.beta}"
                )
        if self.family == "threshold" and not self.threshold_c > 0:
            raise DataValidationError(
                f"threshold_c must be positive, got {self.threshold_c}"
            )


@dataclass(frozen=True)
class DgpConfig:
    """Full simulation design: true parameter, heteroskedasticity, censoring, size, seed."""

    theta0: tuple[float, ...] = (1.0, 1.0)
    alpha: float = 1.0
    censor: CensorSpec = CensorSpec()
    n: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not self.alpha >= 0:
            raise DataValidationError(f"alpha must be >= 0, got {self.alpha}")
        if int(self.n) < 1:
            raise DataValidationError(f"n must be >= 1, got {self.n}")
        object.__setattr__(self, "theta0", tuple(float(t) for t in self.theta0))


@dataclass(frozen=True)
class SimulatedSample:
    """A generated dataset plus the latent quantities that produced it."""

    dataset: Dataset
    censored_mask: np.ndarray
    latent_mean: np.ndarray


def draw_covariates(n: int, seed: int) -> np.ndarray:
    """n x 2 design: column 1 standard normal, column 2 uniform on [0, 1]."""
    if n < 1:
        raise DataValidationError(f"n must be >= 1, got {n}")
    rng = make_rng(seed)
    return _draw_covariates_from(rng, n)


def _draw_covariates_from(rng: np.random.Generator, n: int) -> np.ndarray:
    X = np.empty((n, 2))
    X[:, 0] = rng.standard_normal(n)
    X[:, 1] = rng.random(n)
    return X


def censor_probability(mu0, censor: CensorSpec):
    """P(y = 0 | x) for the given family; accepts scalars or arrays."""
    mu0 = np.asarray(mu0, dtype=np.float64)
    if np.any(mu0 <= 0):
        raise DataValidationError("mu0 must be strictly positive")
    if censor.family == "none":
        p = np.zeros_like(mu0)
    elif censor.family == "logistic_power":
        p = 1.0 / (1.0 + (censor.tau * mu0) ** censor.beta)
    elif censor.family == "double_exponential":
        p = np.exp(-((censor.tau * mu0) ** censor.beta))
    else:  # threshold
        p = np.where(mu0 <= censor.threshold_c, 1.0, 0.0)
    return p if p.ndim else float(p)


def _noise_from_normal(mu0, alpha: float, z):
    """Mean-one log-normal noise: eta = exp(-s^2/2 + s z), s^2 = log(1 + mu0^(alpha-2))."""
    v = np.power(mu0, alpha - 2.0)
    s2 = np.log1p(v)
    s = np.sqrt(s2)
    return np.exp(s * z - s2 / 2.0)


def draw_outcome(mu0: float, alpha: float, p_censor: float,
                 unit_draws: tuple[float, float]) -> float:
    """One outcome from its latent mean, censoring probability, and unit draws.

    ``unit_draws`` is the (uniform, standard normal) pair for this observation:
    the uniform decides the zero branch, the normal drives the log-normal noise.
    """
    if not mu0 > 0:
        raise DataValidationError("mu0 must be strictly positive")
    if not 0.0 <= p_censor <= 1.0:
        raise DataValidationError(f"p_censor must lie in [0, 1], got {p_censor}")
    u, z = unit_draws
    if u < p_censor:
        return 0.0
    return float(mu0 * _noise_from_normal(mu0, alpha, z))


def generate(config: DgpConfig) -> SimulatedSample:
    """Generate a sample per the config; a pure function of its argument."""
    theta0 = np.asarray(config.theta0, dtype=np.float64)
    if theta0.shape[0] != 2:
        raise DataValidationError(
            "generate draws the 2-column covariate design; theta0 must have "
            f"length 2 (got {theta0.shape[0]}). Supply X directly for other designs."
        )
    n = int(config.n)
    rng = make_rng(config.seed)
    X = _draw_covariates_from(rng, n)
    u = rng.random(n)
    z = rng.standard_normal(n)

    mu0 = np.exp(X @ theta0)
    p = censor_probability(mu0, config.censor)
    censored = u < p
    y = np.where(censored, 0.0, mu0 * _noise_from_normal(mu0, config.alpha, z))

    censored = censored.copy()
    censored.flags.writeable = False
    mu0 = mu0.copy()
    mu0.flags.writeable = False
    return SimulatedSample(
        dataset=Dataset(y=y, X=X, feature_names=("x1", "x2")),
        censored_mask=censored,
        latent_mean=mu0,
    )
