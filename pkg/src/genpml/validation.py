"""Input validation helpers shared by the domain types and the estimator API."""

from __future__ import annotations

import numpy as np

from .exceptions import DataValidationError, DimensionMismatchError


def as_design_matrix(X) -> np.ndarray:
    """Coerce X to a read-only float64 (n, d) matrix, rejecting non-finite entries."""
    arr = np.array(X, dtype=np.float64, copy=True, order="C")
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DataValidationError(f"X must be 2-dimensional, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        i, j = np.argwhere(~np.isfinite(arr))[0]
        raise DataValidationError(
            f"X contains a non-finite entry at row {int(i)}, column {int(j)}"
        )
    arr.flags.writeable = False
    return arr


def as_outcome_vector(y) -> np.ndarray:
    """Coerce y to a read-only float64 vector of non-negative reals."""
    arr = np.array(y, dtype=np.float64, copy=True).reshape(-1)
    bad = ~np.isfinite(arr)
    if np.any(bad):
        row = int(np.argmax(bad))
        raise DataValidationError(f"y contains a non-finite value at row {row}")
    neg = arr < 0
    if np.any(neg):
        row = int(np.argmax(neg))
        raise DataValidationError(
            f"y contains a negative value at row {row} (y[{row}] = {arr[row]})"
        )
    arr.flags.writeable = False
    return arr


def as_parameter_vector(theta, d: int | None = None, name: str = "theta") -> np.ndarray:
    """Coerce a parameter vector to float64, optionally checking its length."""
    arr = np.asarray(theta, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise DataValidationError(f"{name} contains non-finite values: {arr}")
    if d is not None and arr.shape[0] != d:
        raise DimensionMismatchError(
            f"{name} has shape {arr.shape} but the design has d={d} columns"
        )
    return arr


def check_same_n(y: np.ndarray, X: np.ndarray) -> None:
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatchError(
            f"y has shape {y.shape} but X has shape {X.shape}: row counts differ"
        )
