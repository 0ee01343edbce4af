"""Data-driven choice of the exponent kappa.

Selection minimizes out-of-sample mean squared prediction error of the fitted
conditional mean over a kappa grid, using seeded k-fold cross-validation.
Near-ties (within 1e-9 relative of the minimum) resolve to the kappa of
smallest magnitude, and between two tied magnitudes to the larger kappa, so
the noiseless case lands on the simplest member of the family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import Dataset, EstimatorSpec, conditional_mean
from .exceptions import ConvergenceError, DataValidationError
from .rng import make_rng
from .solver import fit, fit_path

DEFAULT_KAPPA_GRID = tuple(round(-1.0 + 0.05 * i, 2) for i in range(41))


@dataclass(frozen=True)
class CvResult:
    """Cross-validation summary over a kappa grid."""

    kappa_grid: tuple
    e_curve: np.ndarray          # mean OOS MSE per grid point (NaN if any fold failed)
    per_fold: np.ndarray         # (k, len(grid)) fold-level OOS MSE, NaN on failure
    selected_kappa: float
    failures: tuple              # (fold_index, kappa) pairs that did not converge
    k: int
    seed: Optional[int]


def fold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Split range(n) into k near-equal folds from one seeded permutation."""
    if k < 2:
        raise DataValidationError(f"need at least 2 folds, got k={k}")
    if n < 2 * k:
        raise DataValidationError(
            f"need at least 2 observations per fold, got n={n} with k={k}"
        )
    perm = make_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, k)]


def _oos_mse(theta: np.ndarray, data: Dataset, idx: np.ndarray) -> float:
    mu, _ = conditional_mean(theta, data.X[idx])
    return float(np.mean((data.y[idx] - mu) ** 2))


def _break_ties(grid: Sequence[float], e_values: np.ndarray,
                usable: np.ndarray) -> float:
    finite = e_values[usable]
    if finite.size == 0:
        raise ConvergenceError(
            "no kappa in the grid converged on every fold",
            n_failed=int((~usable).sum()), n_total=len(grid),
        )
    e_min = float(np.min(finite))
    tol = 1e-9 * (1.0 + abs(e_min))
    tied = [g for g, e, ok in zip(grid, e_values, usable)
            if ok and e <= e_min + tol]
    tied.sort(key=lambda g: (abs(g), -g))
    return float(tied[0])


def cross_validate(data: Dataset, kappa_grid: Sequence[float] = DEFAULT_KAPPA_GRID,
                   k: int = 5, seed: int = 0, c: float = 0.0,
                   tol: float = 1e-8, max_iter: int = 200,
                   folds: Optional[list] = None) -> CvResult:
    """Score every kappa by k-fold out-of-sample MSE and pick the best.

    `folds` overrides the seeded split with an explicit list of test-index
    arrays (their union must be a partition of range(n)); `seed` is ignored
    in that case. A kappa that fails to converge on any fold is recorded in
    `failures` and excluded from selection.
    """
    grid = [float(g) for g in kappa_grid]
    if len(grid) == 0:
        raise DataValidationError("kappa_grid is empty")
    if len(set(grid)) != len(grid):
        raise DataValidationError("kappa_grid contains duplicate values")
    for g in grid:
        if not -1.0 <= g <= 1.0:
            raise DataValidationError(f"kappa grid value {g} outside [-1, 1]")

    if folds is None:
        folds = fold_indices(data.n, k, seed)
        seed_used: Optional[int] = seed
    else:
        folds = [np.asarray(f, dtype=np.intp) for f in folds]
        flat = np.concatenate(folds) if folds else np.array([], dtype=np.intp)
        if len(folds) < 2 or flat.size != data.n or \
                not np.array_equal(np.sort(flat), np.arange(data.n)):
            raise DataValidationError(
                "explicit folds must form a partition of range(n) with k >= 2"
            )
        seed_used = None
    k_used = len(folds)

    spec = EstimatorSpec(kappa=0.0, c=c, tol=tol, max_iter=max_iter)
    per_fold = np.full((k_used, len(grid)), np.nan)
    failures: list[tuple] = []
    mask = np.ones(data.n, dtype=bool)
    for j, test_idx in enumerate(folds):
        mask[:] = True
        mask[test_idx] = False
        train = Dataset(y=data.y[mask], X=data.X[mask],
                        feature_names=data.feature_names)
        results = fit_path(train, grid, spec)
        for col, g in enumerate(grid):
            res = results[g]
            if res.converged:
                per_fold[j, col] = _oos_mse(res.theta_hat, data, test_idx)
            else:
                failures.append((j, g))

    failed_kappas = {g for _, g in failures}
    usable = np.array([g not in failed_kappas for g in grid])
    e_curve = np.full(len(grid), np.nan)
    for col in range(len(grid)):
        if usable[col]:
            e_curve[col] = float(np.mean(per_fold[:, col]))
    selected = _break_ties(grid, e_curve, usable)
    return CvResult(kappa_grid=tuple(grid), e_curve=e_curve, per_fold=per_fold,
                    selected_kappa=selected, failures=tuple(failures),
                    k=k_used, seed=seed_used)


def holdout_rmse(data: Dataset, spec: EstimatorSpec, split_fraction: float = 0.8,
                 seed: int = 0, repeats: int = 10) -> tuple[float, float]:
    """Mean and sd of out-of-sample RMSE over repeated random train/test splits.

    All splits come from one generator seeded once, so the r-th repeat depends
    on the full history of the preceding ones. Repeats whose training fit does
    not converge are skipped; more than 20% skipped raises ConvergenceError.
    """
    if not 0.0 < split_fraction < 1.0:
        raise DataValidationError(
            f"split_fraction must be in (0, 1), got {split_fraction}"
        )
    if repeats < 1:
        raise DataValidationError(f"repeats must be >= 1, got {repeats}")
    n_train = int(round(split_fraction * data.n))
    if n_train < data.d or data.n - n_train < 1:
        raise DataValidationError(
            f"split_fraction={split_fraction} leaves an unusable split "
            f"(train={n_train}, test={data.n - n_train})"
        )
    rng = make_rng(seed)
    scores = []
    skipped = 0
    for _ in range(repeats):
        perm = rng.permutation(data.n)
        train_idx, test_idx = perm[:n_train], perm[n_train:]
        train = Dataset(y=data.y[train_idx], X=data.X[train_idx],
                        feature_names=data.feature_names)
        res = fit(train, spec, compute_covariance=False)
        if not res.converged:
            skipped += 1
            continue
        scores.append(math.sqrt(_oos_mse(res.theta_hat, data, test_idx)))
    if skipped > 0.2 * repeats:
        raise ConvergenceError(
            f"{skipped} of {repeats} holdout repeats failed to converge",
            n_failed=skipped, n_total=repeats,
        )
    mean = float(np.mean(scores))
    sd = float(np.std(scores, ddof=1)) if len(scores) > 1 else 0.0
    return mean, sd
