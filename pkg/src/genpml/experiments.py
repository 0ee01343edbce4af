"""Replication studies: sweeps over the data-generating process and exponent.

Every harness op follows the same recipe: replication r of a cell simulates a
fresh sample with seed `replication_seed(base_seed, r)`, fits the requested
exponents along one continuation path, and aggregates converged estimates
into bias / sd / rmse summaries, with

    rmse = sqrt(bias^2 + sd^2),   sd with ddof=1.

Cells run sequentially and depend only on (base_seed, r), so results are
reproducible bit-for-bit regardless of scheduling. CSV outputs carry no
timestamps for the same reason; floats are written with repr and round-trip
exactly.

Output schemas (UTF-8, header row; coord is a 0-based coefficient index):
  sweep:        cell_param_name, cell_param_value, kappa, coord, bias, std,
                rmse, n_converged, reps, n, base_seed
  phase:        alpha, tau, coord, optimal_kappa, rmse_at_opt
  moment check: kappa_requested, kappa_fitted, censoring, beta, moment_1,
                moment_2, n_converged, reps, n, n_draws, base_seed
  bias check:   kappa, censoring, beta, coord, mc_bias, analytic_bias,
                abs_gap, rel_gap, n_converged, reps, n, base_seed
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .asymptotics import PopulationContext, bias_approximation, population_moments
from .core import EstimatorSpec
from .dgp import CensorSpec, DgpConfig, generate
from .exceptions import ConvergenceError, DataValidationError, GenPMLError
from .rng import replication_seed
from .solver import fit_path

logger = logging.getLogger(__name__)

SWEEP_AXES = ("alpha", "tau", "beta", "kappa")
GAMMA_SUBSTITUTE_KAPPA = -0.95
# Population-draw seed offset; replication indices stay far below this.
_CTX_SEED_OFFSET = 2 ** 48


@dataclass(frozen=True)
class ReplicationPlan:
    """One sweep: which DGP knob varies, and which exponents get fitted."""

    dgp: DgpConfig
    sweep_axis: str
    sweep_values: tuple
    kappa_set: tuple = ()
    reps: int = 200
    n: int = 1000
    base_seed: int = 0

    def __post_init__(self):
        if self.sweep_axis not in SWEEP_AXES:
            raise DataValidationError(
                f"sweep_axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}"
            )
        if len(self.sweep_values) == 0:
            raise DataValidationError("sweep_values is empty")
        if self.reps < 1:
            raise DataValidationError(f"reps must be >= 1, got {self.reps}")
        if self.n < 2:
            raise DataValidationError(f"n must be >= 2, got {self.n}")
        if self.sweep_axis == "kappa":
            if self.kappa_set:
                raise DataValidationError(
                    "kappa_set must be empty when sweeping kappa itself; "
                    "the sweep values are the fitted exponents"
                )
            kappas = self.sweep_values
        else:
            if not self.kappa_set:
                raise DataValidationError("kappa_set is empty")
            kappas = self.kappa_set
        for kap in kappas:
            if not -1.0 <= kap <= 1.0:
                raise DataValidationError(f"kappa value {kap} outside [-1, 1]")
        if self.sweep_axis in ("tau", "beta") and self.dgp.censor.family == "none":
            raise DataValidationError(
                f"sweeping {self.sweep_axis} requires a censoring family"
            )
        object.__setattr__(self, "sweep_values",
                           tuple(float(v) for v in self.sweep_values))
        object.__setattr__(self, "kappa_set",
                           tuple(float(v) for v in self.kappa_set))

    def cell_config(self, value: float) -> DgpConfig:
        """The DGP for one sweep cell (n is set; seed is set per replication)."""
        base = replace(self.dgp, n=self.n)
        if self.sweep_axis == "alpha":
            return replace(base, alpha=value)
        if self.sweep_axis == "tau":
            return replace(base, censor=replace(base.censor, tau=value))
        if self.sweep_axis == "beta":
            return replace(base, censor=replace(base.censor, beta=value))
        return base  # kappa axis: one shared cell

    @property
    def fitted_kappas(self) -> tuple:
        return self.sweep_values if self.sweep_axis == "kappa" else self.kappa_set


@dataclass
class SweepRow:
    cell_param_name: str
    cell_param_value: float
    kappa: float
    coord: int
    bias: float
    std: float
    rmse: float
    n_converged: int
    reps: int
    n: int
    base_seed: int
    warning: bool = False  # >10% non-convergence in this (cell, kappa); not serialized


@dataclass
class SweepResult:
    plan: ReplicationPlan
    rows: list
    # (cell_value, kappa) -> (n_converged, d) array of estimates
    estimates: dict = field(repr=False, default_factory=dict)


def _replicate_cell(cfg: DgpConfig, kappas: Sequence[float], reps: int,
                    base_seed: int, spec: EstimatorSpec) -> dict:
    """Fit every kappa on `reps` fresh samples; returns kappa -> estimate stack."""
    collected: dict = {float(k): [] for k in kappas}
    for r in range(reps):
        sample = generate(replace(cfg, seed=replication_seed(base_seed, r)))
        try:
            results = fit_path(sample.dataset, kappas, spec)
        except GenPMLError:
            continue
        for kap in collected:
            res = results[kap]
            if res.converged:
                collected[kap].append(res.theta_hat)
    d = len(cfg.theta0)
    return {kap: (np.vstack(rows) if rows else np.empty((0, d)))
            for kap, rows in collected.items()}


def _summary_stats(estimates: np.ndarray, theta0: np.ndarray):
    """bias, sd (ddof=1), rmse per coordinate; NaNs when undefined."""
    d = theta0.shape[0]
    if estimates.shape[0] == 0:
        nan = np.full(d, np.nan)
        return nan, nan.copy(), nan.copy()
    bias = estimates.mean(axis=0) - theta0
    if estimates.shape[0] > 1:
        sd = estimates.std(axis=0, ddof=1)
    else:
        sd = np.full(d, np.nan)
    rmse = np.sqrt(bias ** 2 + sd ** 2)
    return bias, sd, rmse


def run_sweep(plan: ReplicationPlan, tol: float = 1e-8,
              max_iter: int = 200) -> SweepResult:
    """Replicate every cell of the plan and tabulate bias / sd / rmse."""
    spec = EstimatorSpec(kappa=0.0, c=0.0, tol=tol, max_iter=max_iter)
    theta0 = np.asarray(plan.dgp.theta0, dtype=np.float64)
    rows: list = []
    estimates: dict = {}

    if plan.sweep_axis == "kappa":
        cells = [(None, plan.cell_config(0.0), plan.sweep_values)]
    else:
        cells = [(v, plan.cell_config(v), plan.kappa_set)
                 for v in plan.sweep_values]

    for value, cfg, kappas in cells:
        per_kappa = _replicate_cell(cfg, kappas, plan.reps, plan.base_seed, spec)
        for kap in kappas:
            est = per_kappa[kap]
            cell_value = kap if value is None else value
            estimates[(cell_value, kap)] = est
            bias, sd, rmse = _summary_stats(est, theta0)
            n_conv = est.shape[0]
            warn = (plan.reps - n_conv) > 0.1 * plan.reps
            if warn:
                logger.warning(
                    "cell %s=%s kappa=%s: only %d of %d replications converged",
                    plan.sweep_axis, cell_value, kap, n_conv, plan.reps,
                )
            for coord in range(theta0.shape[0]):
                rows.append(SweepRow(
                    cell_param_name=plan.sweep_axis,
                    cell_param_value=float(cell_value),
                    kappa=float(kap),
                    coord=coord,
                    bias=float(bias[coord]),
                    std=float(sd[coord]),
                    rmse=float(rmse[coord]),
                    n_converged=n_conv,
                    reps=plan.reps,
                    n=plan.n,
                    base_seed=plan.base_seed,
                    warning=warn,
                ))
        logger.info("sweep cell %s=%s done (%d kappas, %d reps)",
                    plan.sweep_axis, value, len(kappas), plan.reps)
    return SweepResult(plan=plan, rows=rows, estimates=estimates)


@dataclass(frozen=True)
class RmseBand:
    """RMSE curve over kappa with a one-standard-error band around its minimum."""

    kappas: tuple
    rmse: np.ndarray
    se: np.ndarray
    argmin_kappa: float
    band_kappas: tuple  # contiguous run containing the argmin


def rmse_band(estimates: dict, theta0, coord: int,
              cell_value: Optional[float] = None) -> RmseBand:
    """Build the kappa RMSE curve for one coordinate from stored estimates.

    `estimates` maps (cell_value, kappa) -> estimate stack as produced by
    run_sweep; pass cell_value=None for kappa-axis sweeps, where the cell key
    equals the exponent. The band is the contiguous run of grid points around
    the argmin whose rmse lies within one Monte Carlo standard error of the
    minimum (standard error of rmse by the delta method on mean squared error).
    """
    theta0 = np.asarray(theta0, dtype=np.float64)
    pairs = sorted(
        (kap, est) for (cv, kap), est in estimates.items()
        if (cv == kap if cell_value is None else cv == cell_value)
    )
    if not pairs:
        raise DataValidationError("no estimates found for the requested cell")
    kappas, rmses, ses = [], [], []
    for kap, est in pairs:
        kappas.append(kap)
        if est.shape[0] < 2:
            rmses.append(np.nan)
            ses.append(np.nan)
            continue
        err = est[:, coord] - theta0[coord]
        bias = float(err.mean())
        sd = float(err.std(ddof=1))
        r = math.sqrt(bias ** 2 + sd ** 2)
        se_mse = float(np.std(err ** 2, ddof=1)) / math.sqrt(err.shape[0])
        rmses.append(r)
        ses.append(se_mse / (2.0 * r) if r > 0 else 0.0)
    rmse_arr = np.asarray(rmses)
    se_arr = np.asarray(ses)
    if not np.isfinite(rmse_arr).any():
        raise ConvergenceError("no kappa has enough converged replications")
    i_min = int(np.nanargmin(rmse_arr))
    cut = rmse_arr[i_min] + se_arr[i_min]
    lo = i_min
    while lo > 0 and np.isfinite(rmse_arr[lo - 1]) and rmse_arr[lo - 1] <= cut:
        lo -= 1
    hi = i_min
    while hi + 1 < len(kappas) and np.isfinite(rmse_arr[hi + 1]) \
            and rmse_arr[hi + 1] <= cut:
        hi += 1
    return RmseBand(kappas=tuple(kappas), rmse=rmse_arr, se=se_arr,
                    argmin_kappa=float(kappas[i_min]),
                    band_kappas=tuple(kappas[lo:hi + 1]))


def _argmin_kappa(kappas: Sequence[float], values: np.ndarray) -> tuple:
    """Index of the minimum with near-ties resolved to smallest |kappa|, then larger kappa."""
    finite = np.isfinite(values)
    if not finite.any():
        raise ConvergenceError("every kappa failed in this cell")
    v_min = float(np.min(values[finite]))
    tol = 1e-9 * (1.0 + abs(v_min))
    tied = [(abs(k), -k, i) for i, k in enumerate(kappas)
            if finite[i] and values[i] <= v_min + tol]
    tied.sort()
    return tied[0][2]


@dataclass
class PhaseCell:
    alpha: float
    tau: float
    coord: int
    optimal_kappa: float
    rmse_at_opt: float


@dataclass
class PhaseResult:
    cells: list
    kappa_grid: tuple
    # (alpha, tau) -> (len(grid), d) rmse matrix over the grid
    curves: dict = field(repr=False, default_factory=dict)


def run_phase_grid(alpha_values: Sequence[float], tau_values: Sequence[float],
                   kappa_grid: Sequence[float], reps: int = 200, n: int = 1000,
                   base_seed: int = 0, beta: float = 2.0,
                   family: str = "logistic_power", theta0=(1.0, 1.0),
                   tol: float = 1e-8, max_iter: int = 200) -> PhaseResult:
    """Map (alpha, tau) cells to the rmse-minimizing exponent per coordinate."""
    grid = tuple(float(g) for g in kappa_grid)
    theta0_arr = np.asarray(theta0, dtype=np.float64)
    spec = EstimatorSpec(kappa=0.0, c=0.0, tol=tol, max_iter=max_iter)
    cells: list = []
    curves: dict = {}
    for alpha in alpha_values:
        for tau in tau_values:
            censor = CensorSpec(family=family, tau=tau, beta=beta)
            cfg = DgpConfig(theta0=tuple(theta0_arr), alpha=alpha,
                            censor=censor, n=n, seed=0)
            per_kappa = _replicate_cell(cfg, grid, reps, base_seed, spec)
            rmse_mat = np.full((len(grid), theta0_arr.shape[0]), np.nan)
            for i, kap in enumerate(grid):
                _, _, rmse = _summary_stats(per_kappa[kap], theta0_arr)
                rmse_mat[i] = rmse
            curves[(float(alpha), float(tau))] = rmse_mat
            for coord in range(theta0_arr.shape[0]):
                i_best = _argmin_kappa(grid, rmse_mat[:, coord])
                cells.append(PhaseCell(
                    alpha=float(alpha), tau=float(tau), coord=coord,
                    optimal_kappa=grid[i_best],
                    rmse_at_opt=float(rmse_mat[i_best, coord]),
                ))
            logger.info("phase cell alpha=%s tau=%s done", alpha, tau)
    return PhaseResult(cells=cells, kappa_grid=grid, curves=curves)


@dataclass
class MomentCheckRow:
    kappa_requested: float
    kappa_fitted: float
    censoring: str
    beta: Optional[float]
    moment_1: float
    moment_2: float
    n_converged: int
    reps: int
    n: int
    n_draws: int
    base_seed: int


def run_moment_check(kappa_set: Sequence[float] = (0.0, 1.0, -1.0),
                     beta_values: Sequence[float] = (0.25, 1.0, 5.0, 9.0),
                     reps: int = 1000, n: int = 1000, alpha: float = 1.0,
                     tau: float = 1.0, base_seed: int = 0,
                     n_draws: int = 100_000, gamma_substitute: bool = True,
                     include_uncensored: bool = True, theta0=(1.0, 1.0),
                     tol: float = 1e-8, max_iter: int = 200) -> list:
    """Plug the average fitted parameter back into its population moments.

    For each censoring cell and exponent, averages the converged estimates
    over replications and evaluates the population moment vector at that
    average: small components mean the finite-sample fit tracks its own
    population fixed point. kappa = -1 is fitted as -0.95 when
    gamma_substitute is set (the boundary member is ill-posed on samples with
    zeros); both the requested and the fitted exponent are recorded.
    """
    theta0 = tuple(float(t) for t in theta0)
    spec = EstimatorSpec(kappa=0.0, c=0.0, tol=tol, max_iter=max_iter)
    fit_map = {}
    for kap in kappa_set:
        kap = float(kap)
        fitted = GAMMA_SUBSTITUTE_KAPPA if (
            gamma_substitute and kap == -1.0) else kap
        fit_map[kap] = fitted
    fitted_set = sorted(set(fit_map.values()))

    cells: list = [("logistic_power",
                    CensorSpec(family="logistic_power", tau=tau, beta=b), b)
                   for b in beta_values]
    if include_uncensored:
        cells.append(("none", CensorSpec(family="none"), None))

    rows: list = []
    for label, censor, beta in cells:
        cfg = DgpConfig(theta0=theta0, alpha=alpha, censor=censor, n=n, seed=0)
        per_kappa = _replicate_cell(cfg, fitted_set, reps, base_seed, spec)
        ctx = PopulationContext.standard(
            theta0=theta0, alpha=alpha, censor=censor, n_draws=n_draws,
            seed=replication_seed(base_seed, _CTX_SEED_OFFSET),
        )
        for kap_req, kap_fit in sorted(fit_map.items()):
            est = per_kappa[kap_fit]
            if est.shape[0] == 0:
                m = np.full(len(theta0), np.nan)
            else:
                m = population_moments(est.mean(axis=0), kap_fit, ctx)
            rows.append(MomentCheckRow(
                kappa_requested=kap_req, kappa_fitted=kap_fit,
                censoring=label, beta=beta,
                moment_1=float(m[0]), moment_2=float(m[1]),
                n_converged=est.shape[0], reps=reps, n=n,
                n_draws=int(n_draws), base_seed=base_seed,
            ))
        logger.info("moment-check cell %s beta=%s done", label, beta)
    return rows


@dataclass
class BiasCheckRow:
    kappa: float
    censoring: str
    beta: Optional[float]
    coord: int
    mc_bias: float
    analytic_bias: float
    abs_gap: float
    rel_gap: float
    n_converged: int
    reps: int
    n: int
    base_seed: int


def run_bias_check(kappa_set: Sequence[float] = (0.0, 1.0),
                   beta_values: Sequence[float] = (1.0, 2.0, 5.0),
                   reps: int = 500, n: int = 3000, alpha: float = 1.0,
                   tau: float = 1.0, base_seed: int = 0,
                   n_draws: int = 100_000, include_uncensored: bool = True,
                   theta0=(1.0, 1.0), tol: float = 1e-8,
                   max_iter: int = 200) -> list:
    """Monte Carlo bias of each exponent against its first-order approximation."""
    theta0 = tuple(float(t) for t in theta0)
    theta0_arr = np.asarray(theta0)
    spec = EstimatorSpec(kappa=0.0, c=0.0, tol=tol, max_iter=max_iter)
    kappas = sorted(float(k) for k in kappa_set)

    cells: list = [("logistic_power",
                    CensorSpec(family="logistic_power", tau=tau, beta=b), b)
                   for b in beta_values]
    if include_uncensored:
        cells.append(("none", CensorSpec(family="none"), None))

    rows: list = []
    for label, censor, beta in cells:
        cfg = DgpConfig(theta0=theta0, alpha=alpha, censor=censor, n=n, seed=0)
        per_kappa = _replicate_cell(cfg, kappas, reps, base_seed, spec)
        ctx = PopulationContext.standard(
            theta0=theta0, alpha=alpha, censor=censor, n_draws=n_draws,
            seed=replication_seed(base_seed, _CTX_SEED_OFFSET),
        )
        for kap in kappas:
            est = per_kappa[kap]
            mc_bias, _, _ = _summary_stats(est, theta0_arr)
            analytic = bias_approximation(kap, ctx)
            for coord in range(theta0_arr.shape[0]):
                abs_gap = abs(mc_bias[coord] - analytic[coord])
                denom = abs(analytic[coord])
                rel_gap = abs_gap / denom if denom > 0 else math.inf
                rows.append(BiasCheckRow(
                    kappa=kap, censoring=label, beta=beta, coord=coord,
                    mc_bias=float(mc_bias[coord]),
                    analytic_bias=float(analytic[coord]),
                    abs_gap=float(abs_gap), rel_gap=float(rel_gap),
                    n_converged=est.shape[0], reps=reps, n=n,
                    base_seed=base_seed,
                ))
        logger.info("bias-check cell %s beta=%s done", label, beta)
    return rows


# ---------------------------------------------------------------- CSV output

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_rows(path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


SWEEP_CSV_HEADER = ("cell_param_name", "cell_param_value", "kappa", "coord",
                    "bias", "std", "rmse", "n_converged", "reps", "n",
                    "base_seed")


def write_sweep_csv(result: SweepResult, path) -> None:
    _write_rows(path, SWEEP_CSV_HEADER,
                ((r.cell_param_name, r.cell_param_value, r.kappa, r.coord,
                  r.bias, r.std, r.rmse, r.n_converged, r.reps, r.n,
                  r.base_seed) for r in result.rows))


PHASE_CSV_HEADER = ("alpha", "tau", "coord", "optimal_kappa", "rmse_at_opt")


def write_phase_csv(result: PhaseResult, path) -> None:
    _write_rows(path, PHASE_CSV_HEADER,
                ((c.alpha, c.tau, c.coord, c.optimal_kappa, c.rmse_at_opt)
                 for c in result.cells))


MOMENT_CSV_HEADER = ("kappa_requested", "kappa_fitted", "censoring", "beta",
                     "moment_1", "moment_2", "n_converged", "reps", "n",
                     "n_draws", "base_seed")


def write_moment_csv(rows: Sequence[MomentCheckRow], path) -> None:
    _write_rows(path, MOMENT_CSV_HEADER,
                ((r.kappa_requested, r.kappa_fitted, r.censoring, r.beta,
                  r.moment_1, r.moment_2, r.n_converged, r.reps, r.n,
                  r.n_draws, r.base_seed) for r in rows))


BIAS_CSV_HEADER = ("kappa", "censoring", "beta", "coord", "mc_bias",
                   "analytic_bias", "abs_gap", "rel_gap", "n_converged",
                   "reps", "n", "base_seed")


def write_bias_csv(rows: Sequence[BiasCheckRow], path) -> None:
    _write_rows(path, BIAS_CSV_HEADER,
                ((r.kappa, r.censoring, r.beta, r.coord, r.mc_bias,
                  r.analytic_bias, r.abs_gap, r.rel_gap, r.n_converged,
                  r.reps, r.n, r.base_seed) for r in rows))
