"""Root-finding for the estimating equations.

Strategy: the Poisson (kappa = 0) problem is globally concave, so it is solved
first from theta = 0; other family members are reached by continuation —
advancing kappa in small steps toward the target, re-solving by damped Newton
(direction -J^-1 m, backtracking line search on the max-norm of the moment
vector) warm-started from the previous step. Convergence is declared when
||m||_inf <= tol * max(1, mean(y)).
"""

from __future__ import annotations

import numpy as np

from .core import Dataset, EstimatorSpec, FitResult, SolverTrace, conditional_mean
from .exceptions import (
    ConvergenceError,
    GenPMLError,
    NonFiniteEvaluationError,
    RankDeficiencyError,
    SingularMatrixError,
)
from .moments import moment_and_jacobian, moment_vector, objective_and_gradient
from .rng import make_rng

# Smallest admissible backtracking step; below this the line search stalls.
MIN_STEP: float = 2.0 ** -30

# Singular-value ratio below which the design is treated as rank deficient.
RANK_TOL: float = 1e-10


def check_full_rank(X: np.ndarray) -> None:
    """Raise RankDeficiencyError (naming the null direction) if X is rank deficient."""
    _, s, Vt = np.linalg.svd(X, full_matrices=False)
    if s[0] == 0.0 or s[-1] / s[0] < RANK_TOL:
        direction = Vt[-1]
        raise RankDeficiencyError(
            "design matrix is numerically rank deficient "
            f"(singular-value ratio {0.0 if s[0] == 0 else s[-1] / s[0]:.3e}); "
            f"null-space direction {np.round(direction, 6)}",
            direction=direction,
        )


def _scaled_tol(data: Dataset, tol: float) -> float:
    return tol * max(1.0, float(np.mean(data.y)))


def _newton_direction(m: np.ndarray, J: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(J, -m)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(J, -m, rcond=None)[0]


def _solve_stage(data: Dataset, stage: EstimatorSpec, theta: np.ndarray,
                 scaled_tol: float, trace: SolverTrace) -> tuple[np.ndarray, float, int, bool]:
    """Damped Newton at a fixed (kappa, c), line search on ||m||_inf.

    Returns (theta, moment_norm, accepted_iterations, converged).
    """
    m, J = moment_and_jacobian(theta, data, stage)
    norm = float(np.max(np.abs(m)))
    iters = 0
    while norm > scaled_tol:
        if iters >= stage.max_iter:
            trace.termination = "max_iter"
            return theta, norm, iters, False
        p = _newton_direction(m, J)
        t = 1.0
        accepted = False
        while t >= MIN_STEP:
            cand = theta + t * p
            try:
                m_c, J_c = moment_and_jacobian(cand, data, stage)
            except NonFiniteEvaluationError:
                t *= 0.5
                continue
            norm_c = float(np.max(np.abs(m_c)))
            if norm_c < norm:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            trace.termination = "line_search_failed"
            return theta, norm, iters, False
        theta, m, J, norm = cand, m_c, J_c, norm_c
        iters += 1
        trace.append(stage.kappa, theta, norm, t)
    return theta, norm, iters, True


def _solve_poisson(data: Dataset, tol: float, max_iter: int,
                   trace: SolverTrace) -> tuple[np.ndarray, float, int, bool]:
    """Damped Newton on the concave Poisson objective from theta = 0.

    A trial step is accepted when the objective strictly increases or the
    moment max-norm strictly falls. The second test matters only near the
    optimum, where the concave objective is flat to rounding (it sums n large
    terms) while the gradient still carries several digits.
    """
    spec0 = EstimatorSpec(kappa=0.0, tol=tol, max_iter=max_iter)
    scaled_tol = _scaled_tol(data, tol)
    theta = np.zeros(data.d)
    obj, _ = objective_and_gradient(theta, data, 0.0)
    m, J = moment_and_jacobian(theta, data, spec0)
    norm = float(np.max(np.abs(m)))
    iters = 0
    while norm > scaled_tol:
        if iters >= max_iter:
            trace.termination = "max_iter"
            return theta, norm, iters, False
        p = _newton_direction(m, J)
        t = 1.0
        accepted = False
        while t >= MIN_STEP:
            cand = theta + t * p
            try:
                obj_c, _ = objective_and_gradient(cand, data, 0.0)
                m_c, J_c = moment_and_jacobian(cand, data, spec0)
            except NonFiniteEvaluationError:
                t *= 0.5
                continue
            norm_c = float(np.max(np.abs(m_c)))
            if obj_c > obj or norm_c < norm:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            trace.termination = "line_search_failed"
            return theta, norm, iters, False
        theta, obj = cand, obj_c
        m, J, norm = m_c, J_c, norm_c
        iters += 1
        trace.append(0.0, theta, norm, t)
    return theta, norm, iters, True


def _continuation_lattice(kappa: float, step: float) -> list[float]:
    """Intermediate kappa values strictly between 0 and the target, plus the target.

    Waypoints are rounded (3 * 0.1 -> 0.3) so traces carry clean stage labels;
    the target itself is kept bit-exact.
    """
    path = []
    k, i = 0.0, 1
    while abs(k := np.sign(kappa) * i * step) < abs(kappa) - 1e-12:
        path.append(round(float(k), 12))
        i += 1
    path.append(float(kappa))
    return path


def _result(theta, norm, iters, converged, data, spec, trace,
            compute_covariance) -> FitResult:
    covariance = std_errors = None
    if converged and compute_covariance:
        try:
            covariance = sandwich_covariance(data, spec, theta)
            std_errors = np.sqrt(np.diag(covariance))
        except (SingularMatrixError, NonFiniteEvaluationError):
            covariance = std_errors = None
    return FitResult(
        theta_hat=np.array(theta),
        moment_norm=float(norm),
        iterations=int(iters),
        converged=bool(converged),
        covariance=covariance,
        std_errors=std_errors,
        trace=trace,
    )


def fit_poisson(data: Dataset, tol: float = 1e-8, max_iter: int = 200,
                compute_covariance: bool = True) -> FitResult:
    """Poisson (kappa = 0) fit: concave objective, damped Newton from theta = 0."""
    check_full_rank(data.X)
    trace = SolverTrace()
    theta, norm, iters, converged = _solve_poisson(data, tol, max_iter, trace)
    spec0 = EstimatorSpec(kappa=0.0, tol=tol, max_iter=max_iter)
    return _result(theta, norm, iters, converged, data, spec0, trace,
                   compute_covariance)


def fit(data: Dataset, spec: EstimatorSpec,
        compute_covariance: bool = True) -> FitResult:
    """Solve m(theta) = 0 for the requested (kappa, c).

    Poisson warm start, then kappa-continuation in steps of
    ``spec.continuation_step``, each stage refined to the full tolerance.
    Non-convergence returns a diagnosable FitResult (never raises), carrying
    the best theta reached and the iteration trace.
    """
    results = fit_path(data, [spec.kappa], spec, compute_covariance=compute_covariance,
                       keep_trace=True)
    return results[spec.kappa]


def fit_path(data: Dataset, kappas, spec: EstimatorSpec,
             compute_covariance: bool = False,
             keep_trace: bool = False) -> dict[float, FitResult]:
    """Fit several kappa values in one continuation sweep.

    The requested values are merged into the continuation lattice and solved
    in order of increasing |kappa| (positive and negative branches walked
    separately from the shared Poisson solution), so a length-m grid costs one
    Poisson solve plus one warm-started refinement per lattice point. Results
    agree with per-kappa ``fit`` calls to solver tolerance.

    Returns a dict keyed by the requested kappa values (c, tol, max_iter, and
    continuation_step are taken from ``spec``).
    """
    kappas = [float(k) for k in kappas]
    for k in kappas:
        if not (-1.0 <= k <= 1.0):
            raise GenPMLError(f"kappa values must lie in [-1, 1], got {k}")
    check_full_rank(data.X)
    scaled_tol = _scaled_tol(data, spec.tol)
    results: dict[float, FitResult] = {}

    trace = SolverTrace()
    theta0, norm0, iters0, ok0 = _solve_poisson(data, spec.tol, spec.max_iter, trace)
    poisson_trace = trace if keep_trace else None

    if 0.0 in kappas:
        spec_k0 = EstimatorSpec(kappa=0.0, c=spec.c, tol=spec.tol,
                                max_iter=spec.max_iter,
                                continuation_step=spec.continuation_step)
        results[0.0] = _result(theta0, norm0, iters0, ok0, data, spec_k0,
                               poisson_trace, compute_covariance)

    for sign in (1.0, -1.0):
        targets = sorted({k for k in kappas if np.sign(k) == sign}, key=abs)
        if not targets:
            continue
        lattice = sorted(
            {k for k in _continuation_lattice(targets[-1], spec.continuation_step)}
            | set(targets),
            key=abs,
        )
        theta, iters, ok = np.array(theta0), iters0, ok0
        branch_trace = (
            SolverTrace(records=list(trace.records), termination=trace.termination)
            if keep_trace else SolverTrace()
        )
        for k in lattice:
            stage = EstimatorSpec(kappa=k, c=spec.c, tol=spec.tol,
                                  max_iter=spec.max_iter,
                                  continuation_step=spec.continuation_step)
            if ok:
                try:
                    theta, norm, it, ok = _solve_stage(data, stage, theta,
                                                       scaled_tol, branch_trace)
                    iters += it
                except NonFiniteEvaluationError:
                    branch_trace.termination = "non_finite"
                    ok = False
            if k in targets:
                norm_k = _norm_at(theta, data, stage)
                results[k] = _result(theta, norm_k, iters, ok, data, stage,
                                     branch_trace if keep_trace else None,
                                     compute_covariance)
            if not ok:
                for rest in targets:
                    if abs(rest) > abs(k) and rest not in results:
                        stage_r = EstimatorSpec(kappa=rest, c=spec.c, tol=spec.tol,
                                                max_iter=spec.max_iter,
                                                continuation_step=spec.continuation_step)
                        results[rest] = _result(
                            theta, _norm_at(theta, data, stage_r), iters, False,
                            data, stage_r, branch_trace if keep_trace else None,
                            compute_covariance)
                break
    return results


def _norm_at(theta: np.ndarray, data: Dataset, spec: EstimatorSpec) -> float:
    try:
        return float(np.max(np.abs(moment_vector(theta, data, spec))))
    except NonFiniteEvaluationError:
        return float("inf")


def sandwich_covariance(data: Dataset, spec: EstimatorSpec,
                        theta_hat) -> np.ndarray:
    """Plug-in sandwich J^-1 I J^-1 / n at theta_hat.

    I is the average outer product of the per-observation scores
    psi_i = (y_i - mu_i)(c + mu_i)^kappa x_i and J the average negative score
    Jacobian. Returns a symmetric positive semi-definite d x d matrix.
    """
    theta_hat = np.asarray(theta_hat, dtype=np.float64).reshape(-1)
    m, Jm = moment_and_jacobian(theta_hat, data, spec)
    J = -Jm
    cond = np.linalg.cond(J)
    if not np.isfinite(cond) or 1.0 / cond < RANK_TOL:
        raise SingularMatrixError(
            f"moment Jacobian is numerically singular (condition number {cond:.3e})",
            condition_number=float(cond),
        )
    mu, _ = conditional_mean(theta_hat, data.X)
    scores = data.X * ((data.y - mu) * np.power(spec.c + mu, spec.kappa))[:, None]
    I = scores.T @ scores / data.n
    Jinv = np.linalg.inv(J)
    V = Jinv @ I @ Jinv / data.n
    return (V + V.T) / 2.0


def bootstrap_se(data: Dataset, spec: EstimatorSpec, B: int,
                 seed: int) -> np.ndarray:
    """Nonparametric bootstrap standard errors.

    B row resamples with replacement; resample b draws its indices from a
    fresh generator seeded ``seed + b``, so the output is bit-identical across
    runs and independent of any execution schedule. Resamples whose refits do
    not converge are dropped; more than 20% drops is an error.
    """
    if B < 2:
        raise GenPMLError(f"bootstrap needs B >= 2 resamples, got {B}")
    estimates = []
    n_failed = 0
    for b in range(B):
        rng = make_rng(seed + b)
        idx = rng.integers(0, data.n, size=data.n)
        try:
            sample = Dataset(y=data.y[idx], X=data.X[idx])
            res = fit(sample, spec, compute_covariance=False)
        except GenPMLError:
            n_failed += 1
            continue
        if not res.converged:
            n_failed += 1
            continue
        estimates.append(res.theta_hat)
    if n_failed > 0.2 * B:
        raise ConvergenceError(
            f"{n_failed} of {B} bootstrap resamples failed to converge "
            "(more than the 20% budget)",
            n_failed=n_failed, n_total=B,
        )
    return np.std(np.asarray(estimates), axis=0, ddof=1)
