"""Population-level analytics of the estimator family under censoring.

Every expectation over the covariate law is approximated by an average over a
fixed set of Monte Carlo draws held inside a PopulationContext, so identities
between formulas evaluated on the same context hold to floating precision
rather than statistically.

Conventions: theta0 is the data-generating parameter, P(x) the censoring
probability at x, mu0 = exp(theta0' x). The pseudo-true parameter theta~ of a
kappa-estimator solves the population moment condition

    E_x [ ((1 - P) mu0 - mu) * mu^kappa * x ] = 0,    mu = exp(theta' x),

and the estimator's first-order bias and sandwich variance are evaluated
around it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dgp import CensorSpec, censor_probability, _draw_covariates_from
from .exceptions import (
    DataValidationError,
    GenPMLError,
    NonFiniteEvaluationError,
    SingularMatrixError,
)
from .rng import make_rng

DEFAULT_N_DRAWS = 100_000


@dataclass(frozen=True)
class PopulationContext:
    """Covariate draws and DGP parameters for approximating E_x integrals."""

    theta0: np.ndarray
    alpha: float
    censor: CensorSpec
    x_draws: np.ndarray
    # derived, shared by every operation on this context
    eta0: np.ndarray = field(init=False, repr=False)
    mu0: np.ndarray = field(init=False, repr=False)
    p_censor: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        theta0 = np.asarray(self.theta0, dtype=np.float64).reshape(-1)
        draws = np.asarray(self.x_draws, dtype=np.float64)
        if draws.ndim == 1:
            draws = draws.reshape(-1, 1)
        if draws.shape[0] < 1000:
            raise DataValidationError(
                f"need at least 1000 covariate draws, got {draws.shape[0]}"
            )
        if draws.shape[1] != theta0.shape[0]:
            raise DataValidationError(
                f"x_draws has {draws.shape[1]} columns but theta0 has length "
                f"{theta0.shape[0]}"
            )
        eta0 = draws @ theta0
        mu0 = np.exp(eta0)
        object.__setattr__(self, "theta0", theta0)
        object.__setattr__(self, "x_draws", draws)
        object.__setattr__(self, "eta0", eta0)
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "p_censor",
                           np.asarray(censor_probability(mu0, self.censor)))

    @property
    def n_draws(self) -> int:
        return self.x_draws.shape[0]

    @property
    def d(self) -> int:
        return self.x_draws.shape[1]

    @classmethod
    def standard(cls, theta0=(1.0, 1.0), alpha: float = 1.0,
                 censor: CensorSpec = CensorSpec(),
                 n_draws: int = DEFAULT_N_DRAWS, seed: int = 0) -> "PopulationContext":
        """Context over the standard two-covariate law (normal, uniform)."""
        rng = make_rng(seed)
        return cls(theta0=np.asarray(theta0, dtype=np.float64), alpha=alpha,
                   censor=censor, x_draws=_draw_covariates_from(rng, int(n_draws)))


def _check_draws_finite(arr: np.ndarray, what: str) -> np.ndarray:
    finite = np.isfinite(arr)
    if arr.ndim > 1:
        finite = finite.all(axis=tuple(range(1, arr.ndim)))
    if not finite.all():
        idx = int(np.argmax(~finite))
        raise NonFiniteEvaluationError(
            f"overflow while evaluating {what} at draw index {idx}"
        )
    return arr


def population_moments(theta, kappa: float, ctx: PopulationContext) -> np.ndarray:
    """Monte Carlo average of ((1-P) mu0 - mu) mu^kappa x over the context draws."""
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    eta = ctx.x_draws @ theta
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        integrand = ((1.0 - ctx.p_censor) * ctx.mu0 - np.exp(eta)) * np.exp(kappa * eta)
    _check_draws_finite(integrand, "population moments")
    return integrand @ ctx.x_draws / ctx.n_draws


def _population_jacobian(theta: np.ndarray, kappa: float,
                         ctx: PopulationContext) -> np.ndarray:
    eta = ctx.x_draws @ theta
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        mu = np.exp(eta)
        w = np.exp(kappa * eta)
        scale = w * (kappa * ((1.0 - ctx.p_censor) * ctx.mu0 - mu) - mu)
    _check_draws_finite(scale, "population moment Jacobian")
    return (ctx.x_draws * scale[:, None]).T @ ctx.x_draws / ctx.n_draws


def pseudo_true(kappa: float, ctx: PopulationContext,
                max_iter: int = 100) -> np.ndarray:
    """Solve the population moment condition by damped Newton from theta0."""
    theta = np.array(ctx.theta0)
    g = population_moments(theta, kappa, ctx)
    norm = float(np.max(np.abs(g)))
    for _ in range(max_iter):
        if norm <= 1e-8 * max(1.0, float(np.max(np.abs(theta)))):
            return theta
        J = _population_jacobian(theta, kappa, ctx)
        try:
            p = np.linalg.solve(J, -g)
        except np.linalg.LinAlgError as exc:
            raise GenPMLError(
                f"population Newton hit a singular Jacobian at theta={theta}"
            ) from exc
        t = 1.0
        while t >= 2.0 ** -30:
            cand = theta + t * p
            try:
                g_c = population_moments(cand, kappa, ctx)
            except NonFiniteEvaluationError:
                t *= 0.5
                continue
            norm_c = float(np.max(np.abs(g_c)))
            if norm_c < norm:
                break
            t *= 0.5
        else:
            raise GenPMLError(
                "population Newton line search stalled at "
                f"theta={theta}, ||g||={norm:.3e} (kappa={kappa})"
            )
        theta, g, norm = cand, g_c, norm_c
    if norm <= 1e-8 * max(1.0, float(np.max(np.abs(theta)))):
        return theta
    raise GenPMLError(
        f"population Newton did not converge in {max_iter} iterations "
        f"(kappa={kappa}, ||g||={norm:.3e})"
    )


def bias_approximation(kappa: float, ctx: PopulationContext) -> np.ndarray:
    """First-order bias of the kappa-estimator under the context's censoring.

    Returns (A'A)^-1 A b with
        A = E_x[(P kappa - 1) x x' exp((kappa+1) theta0' x)],
        b = E_x[P x exp((kappa+1) theta0' x)].
    Free of alpha; identically zero when P = 0.
    """
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        growth = np.exp((kappa + 1.0) * ctx.eta0)
    _check_draws_finite(growth, "bias approximation")
    P = ctx.p_censor
    X = ctx.x_draws
    A = (X * ((P * kappa - 1.0) * growth)[:, None]).T @ X / ctx.n_draws
    b = (P * growth) @ X / ctx.n_draws
    AtA = A.T @ A
    cond = np.linalg.cond(AtA)
    if not np.isfinite(cond) or 1.0 / cond < 1e-14:
        raise SingularMatrixError(
            f"A'A is numerically singular (condition number {cond:.3e})",
            condition_number=float(cond),
        )
    return np.linalg.solve(AtA, A @ b)


def asymptotic_variance(kappa: float, ctx: PopulationContext) -> np.ndarray:
    """Per-observation sandwich variance J^-1 I J^-1 at the pseudo-true parameter.

    I = E_x[ x x' exp(2 kappa eta~) ( P exp(2 eta~)
          + (1-P) ((mu0 - mu~)^2 + exp(alpha eta0)) ) ]
    J = E_x[ x x' exp(kappa eta~) ( mu~ - kappa ((1-P) mu0 - mu~) ) ]

    with eta~ = theta~' x at theta~ = pseudo_true(kappa, ctx). Divide by n for
    the variance of an n-sample estimator.
    """
    theta_t = pseudo_true(kappa, ctx)
    X, P = ctx.x_draws, ctx.p_censor
    eta_t = X @ theta_t
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        mu_t = np.exp(eta_t)
        w = np.exp(kappa * eta_t)
        i_scale = w * w * (P * mu_t * mu_t
                           + (1.0 - P) * ((ctx.mu0 - mu_t) ** 2
                                          + np.exp(ctx.alpha * ctx.eta0)))
        j_scale = w * (mu_t - kappa * ((1.0 - P) * ctx.mu0 - mu_t))
    _check_draws_finite(i_scale, "variance integrand I")
    _check_draws_finite(j_scale, "variance integrand J")
    I = (X * i_scale[:, None]).T @ X / ctx.n_draws
    J = (X * j_scale[:, None]).T @ X / ctx.n_draws
    cond = np.linalg.cond(J)
    if not np.isfinite(cond) or 1.0 / cond < 1e-14:
        raise SingularMatrixError(
            f"population J is numerically singular (condition number {cond:.3e})",
            condition_number=float(cond),
        )
    Jinv = np.linalg.inv(J)
    V = Jinv @ I @ Jinv
    return (V + V.T) / 2.0


def efficient_kappa(alpha: float) -> float:
    """The uncensored-efficiency rule: the minimum-variance family member is kappa = 1 - alpha."""
    if not alpha >= 0:
        raise DataValidationError(f"alpha must be >= 0, got {alpha}")
    return 1.0 - alpha


def corollary_bias_1d(estimator: str, ctx: PopulationContext) -> float:
    """Closed-form one-dimensional bias of the Poisson (kappa=0) or NLS (kappa=1) fit.

        poisson: - E[x P exp(theta0 x)]  / E[x^2 exp(theta0 x)]
        nls:     - E[x P exp(2 theta0 x)] / E[x^2 (1 + P) exp(2 theta0 x)]
    """
    if ctx.d != 1:
        raise DataValidationError(
            f"corollary_bias_1d requires a one-dimensional context, got d={ctx.d}"
        )
    x = ctx.x_draws[:, 0]
    P = ctx.p_censor
    if estimator == "poisson":
        growth = ctx.mu0
        num = float(np.mean(x * P * growth))
        den = float(np.mean(x * x * growth))
    elif estimator == "nls":
        growth = ctx.mu0 ** 2
        num = float(np.mean(x * P * growth))
        den = float(np.mean(x * x * (1.0 + P) * growth))
    else:
        raise DataValidationError(
            f"estimator must be 'poisson' or 'nls', got {estimator!r}"
        )
    if den == 0.0:
        raise SingularMatrixError("zero denominator in the one-dimensional bias")
    return -num / den
