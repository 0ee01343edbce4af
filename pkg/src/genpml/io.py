"""Dataset files and machine-readable reports.

CSV datasets are one header row plus numeric data: the outcome column by
name, every other column a covariate in header order. Loading is strict —
ragged rows, missing or unparsable fields, non-finite values, and negative
outcomes are rejected with a CsvFormatError naming the offending row and
column; nothing is ever imputed. Floats are written with repr, so a
write/load round trip reproduces every value bit for bit.

JSON fit reports use a fixed key order (theta_hat, std_errors, kappa, c,
converged, moment_norm, n, d, seed), with an optional trailing "transform"
block when the design was modified before fitting.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Dataset, EstimatorSpec, FitResult
from .exceptions import CsvFormatError, DataValidationError


def load_csv(path, outcome_column: str = "y") -> Dataset:
    """Read a dataset from CSV, strictly."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CsvFormatError("malformed", f"{path}: file is empty") from None
        if outcome_column not in header:
            raise CsvFormatError(
                "missing-column",
                f"{path}: outcome column {outcome_column!r} not found in "
                f"header {header}", column=outcome_column,
            )
        y_pos = header.index(outcome_column)
        feature_names = tuple(h for i, h in enumerate(header) if i != y_pos)
        if not feature_names:
            raise CsvFormatError(
                "missing-column",
                f"{path}: no covariate columns besides {outcome_column!r}",
            )
        y_vals: list = []
        x_rows: list = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise CsvFormatError(
                    "malformed",
                    f"{path}: line {line_no} has {len(row)} fields, "
                    f"expected {len(header)}", row=line_no,
                )
            values = []
            for pos, cell in enumerate(row):
                text = cell.strip()
                try:
                    val = float(text) if text else float("nan")
                except ValueError:
                    val = float("nan")
                if not np.isfinite(val):
                    raise CsvFormatError(
                        "non-numeric",
                        f"{path}: line {line_no}, column {header[pos]!r}: "
                        f"cannot use value {cell!r}",
                        row=line_no, column=header[pos],
                    )
                values.append(val)
            if values[y_pos] < 0:
                raise CsvFormatError(
                    "negative-outcome",
                    f"{path}: line {line_no}: outcome {values[y_pos]} is "
                    "negative", row=line_no, column=outcome_column,
                )
            y_vals.append(values[y_pos])
            x_rows.append([v for i, v in enumerate(values) if i != y_pos])
    if not y_vals:
        raise CsvFormatError("malformed", f"{path}: no data rows")
    return Dataset(y=np.asarray(y_vals), X=np.asarray(x_rows),
                   feature_names=feature_names)


def write_dataset_csv(dataset: Dataset, path, outcome_column: str = "y") -> None:
    """Write a dataset as CSV with repr-formatted (round-tripping) floats."""
    names = dataset.feature_names or tuple(
        f"x{j + 1}" for j in range(dataset.d))
    if outcome_column in names:
        raise DataValidationError(
            f"outcome column name {outcome_column!r} collides with a "
            "covariate column"
        )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([outcome_column, *names])
        for i in range(dataset.n):
            writer.writerow([repr(float(dataset.y[i])),
                             *(repr(float(v)) for v in dataset.X[i])])


@dataclass(frozen=True)
class TransformRecord:
    """How a design was modified before fitting, and how to undo it.

    Standardization uses population (n-denominator) moments. The intercept
    column, when added, is prepended and never standardized.
    """

    add_intercept: bool
    standardize: bool
    means: Optional[np.ndarray]  # per original column; None unless standardized
    sds: Optional[np.ndarray]
    feature_names: Optional[tuple]  # names of the transformed design

    def unmap_coefficients(self, theta) -> tuple:
        """Map coefficients on the transformed design back to original scale.

        Returns (theta_original, offset) with the linear predictor identity

            theta' x_transformed = offset + theta_original' x_original,

        where x_original includes the leading 1 when add_intercept is set.
        The offset is zero except when standardizing without an intercept,
        where the centering has no coefficient slot to be absorbed into.
        """
        theta = np.asarray(theta, dtype=np.float64).reshape(-1)
        d = theta.shape[0] - (1 if self.add_intercept else 0)
        if self.standardize and self.means.shape[0] != d:
            raise DataValidationError(
                f"theta has {d} slope entries but the transform recorded "
                f"{self.means.shape[0]} columns"
            )
        if not self.standardize:
            return theta.copy(), 0.0
        slopes = theta[1:] if self.add_intercept else theta
        slopes_orig = slopes / self.sds
        shift = float(np.sum(slopes * self.means / self.sds))
        if self.add_intercept:
            return np.concatenate([[theta[0] - shift], slopes_orig]), 0.0
        return slopes_orig, -shift


def transform_design(data: Dataset, add_intercept: bool = False,
                     standardize: bool = False) -> tuple:
    """Optionally standardize columns and/or prepend an intercept column.

    Returns (transformed Dataset, TransformRecord). Standardization divides
    by the population standard deviation; a constant column cannot be
    standardized and raises DataValidationError naming it.
    """
    X = data.X
    names = data.feature_names or tuple(f"x{j + 1}" for j in range(data.d))
    means = sds = None
    if standardize:
        means = X.mean(axis=0)
        sds = X.std(axis=0)
        if np.any(sds == 0.0):
            j = int(np.argmax(sds == 0.0))
            raise DataValidationError(
                f"column {names[j]!r} is constant and cannot be standardized"
            )
        X = (X - means) / sds
    if add_intercept:
        X = np.column_stack([np.ones(data.n), X])
        names = ("intercept",) + names
    record = TransformRecord(add_intercept=add_intercept,
                             standardize=standardize, means=means, sds=sds,
                             feature_names=names)
    return Dataset(y=data.y, X=X, feature_names=names), record


def fit_to_dict(result: FitResult, spec: EstimatorSpec, n: int, seed: int,
                std_errors=None,
                transform: Optional[TransformRecord] = None) -> dict:
    """Fit report with the documented stable key order."""
    se = result.std_errors if std_errors is None else np.asarray(std_errors)
    doc = {
        "theta_hat": [float(v) for v in result.theta_hat],
        "std_errors": None if se is None else [float(v) for v in se],
        "kappa": float(spec.kappa),
        "c": float(spec.c),
        "converged": bool(result.converged),
        "moment_norm": float(result.moment_norm),
        "n": int(n),
        "d": int(result.theta_hat.shape[0]),
        "seed": int(seed),
    }
    if transform is not None and (transform.add_intercept
                                  or transform.standardize):
        theta_orig, offset = transform.unmap_coefficients(result.theta_hat)
        doc["transform"] = {
            "add_intercept": transform.add_intercept,
            "standardize": transform.standardize,
            "means": (None if transform.means is None
                      else [float(v) for v in transform.means]),
            "sds": (None if transform.sds is None
                    else [float(v) for v in transform.sds]),
            "theta_original": [float(v) for v in theta_orig],
            "offset": float(offset),
        }
    return doc


def cv_to_dict(cv) -> dict:
    """Cross-validation report (fold-level errors included)."""
    return {
        "selected_kappa": float(cv.selected_kappa),
        "kappa_grid": [float(g) for g in cv.kappa_grid],
        "e_curve": [float(v) for v in cv.e_curve],
        "per_fold": [[float(v) for v in row] for row in cv.per_fold],
        "failures": [[int(f), float(g)] for f, g in cv.failures],
        "k": int(cv.k),
        "seed": None if cv.seed is None else int(cv.seed),
    }


def dump_json(doc: dict, path=None) -> Optional[str]:
    """Serialize with a trailing newline; returns the text when path is None."""
    text = json.dumps(doc, indent=2) + "\n"
    if path is None:
        return text
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return None
