"""Strict readers for the experiment CSV and report JSON interchange formats.

The column layouts are pinned here, deliberately duplicated from their
producer: this package consumes files, not libraries, so the schema is the
whole contract. A reader refuses input whose header deviates from the
published layout and names the missing (or unexpected) column, because
silently tolerating drift is how a figure ends up showing the wrong
quantity.

Statistic fields in experiment tables may legitimately be ``nan`` (a cell
with zero converged replications reports nan bias/std/rmse, and a cv error
curve carries nan at exponents where every fold failed); dataset outcome
and covariate cells must be finite numbers.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .exceptions import SchemaError

# One row per (sweep cell, fitted exponent, coordinate).
SWEEP_COLUMNS = ("cell_param_name", "cell_param_value", "kappa", "coord",
                 "bias", "std", "rmse", "n_converged", "reps", "n",
                 "base_seed")

# One row per (alpha, tau, coordinate) cell of a phase grid.
PHASE_COLUMNS = ("alpha", "tau", "coord", "optimal_kappa", "rmse_at_opt")

_SWEEP_TEXT = ("cell_param_name",)
_SWEEP_INT = ("coord", "n_converged", "reps", "n", "base_seed")
_PHASE_INT = ("coord",)


def _read_table(path, columns: tuple) -> list:
    """Read a CSV whose header must equal ``columns`` up to order."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: file is empty") from None
        for name in columns:
            if name not in header:
                raise SchemaError(
                    f"{path}: missing column {name!r} (header has "
                    f"{header})", column=name)
        for name in header:
            if name not in columns:
                raise SchemaError(
                    f"{path}: unexpected column {name!r} (schema is "
                    f"{list(columns)})", column=name)
        if len(header) != len(columns):
            dup = next(h for h in header if header.count(h) > 1)
            raise SchemaError(f"{path}: duplicated column {dup!r}",
                              column=dup)
        positions = {name: header.index(name) for name in columns}
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaError(
                    f"{path}: line {line_no} has {len(row)} fields, "
                    f"expected {len(header)}")
            rows.append((line_no,
                         {name: row[pos].strip()
                          for name, pos in positions.items()}))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _typed_rows(path, raw_rows, text_columns: tuple, int_columns: tuple) -> list:
    out = []
    for line_no, raw in raw_rows:
        rec = {}
        for name, text in raw.items():
            if name in text_columns:
                rec[name] = text
                continue
            try:
                value = float(text)
            except ValueError:
                raise SchemaError(
                    f"{path}: line {line_no}, column {name!r}: cannot "
                    f"parse {text!r} as a number", column=name) from None
            rec[name] = int(value) if name in int_columns else value
        out.append(rec)
    return out


def read_sweep_csv(path) -> list:
    """Rows of a sweep table as typed dicts, all from one sweep axis."""
    rows = _typed_rows(path, _read_table(path, SWEEP_COLUMNS),
                       _SWEEP_TEXT, _SWEEP_INT)
    axes = {r["cell_param_name"] for r in rows}
    if len(axes) != 1:
        raise SchemaError(
            f"{path}: column 'cell_param_name' mixes sweep axes "
            f"{sorted(axes)}; one table holds one sweep",
            column="cell_param_name")
    return rows


def read_phase_csv(path) -> list:
    """Rows of a phase table as typed dicts."""
    return _typed_rows(path, _read_table(path, PHASE_COLUMNS), (), _PHASE_INT)


def _require_key(doc: dict, key: str, path) -> object:
    if key not in doc:
        raise SchemaError(f"{path}: missing key {key!r}", column=key)
    return doc[key]


def _float_list(doc: dict, key: str, path) -> list:
    raw = _require_key(doc, key, path)
    if not isinstance(raw, list) or not raw:
        raise SchemaError(f"{path}: key {key!r} must be a non-empty list",
                          column=key)
    try:
        return [float(v) for v in raw]
    except (TypeError, ValueError):
        raise SchemaError(f"{path}: key {key!r} holds non-numeric entries",
                          column=key) from None


def read_cv_json(path) -> dict:
    """Cross-validation report: selected exponent, grid, and error curve.

    Accepts either the bare report or the CLI's ``{"cv": ..., "fit": ...}``
    envelope.
    """
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    doc = raw["cv"] if isinstance(raw.get("cv"), dict) else raw
    grid = _float_list(doc, "kappa_grid", path)
    curve = _float_list(doc, "e_curve", path)
    if len(grid) != len(curve):
        raise SchemaError(
            f"{path}: 'e_curve' has {len(curve)} entries for a "
            f"{len(grid)}-point 'kappa_grid'", column="e_curve")
    selected = _require_key(doc, "selected_kappa", path)
    return {"selected_kappa": float(selected), "kappa_grid": grid,
            "e_curve": curve}


def read_fit_json(path) -> dict:
    """Fit report: coefficients plus the optional design-transform block."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    doc = {"theta_hat": _float_list(raw, "theta_hat", path)}
    transform = raw.get("transform")
    if transform is not None:
        if not isinstance(transform, dict):
            raise SchemaError(f"{path}: key 'transform' must be an object",
                              column="transform")
        doc["transform"] = {
            "add_intercept": bool(_require_key(transform, "add_intercept",
                                               path)),
            "theta_original": _float_list(transform, "theta_original", path),
            "offset": float(_require_key(transform, "offset", path)),
        }
    return doc


def read_dataset_csv(path, outcome_column: str = "y") -> tuple:
    """Read a dataset CSV into (y, X, feature_names), strictly finite."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: file is empty") from None
        if outcome_column not in header:
            raise SchemaError(
                f"{path}: missing column {outcome_column!r} (header has "
                f"{header})", column=outcome_column)
        y_pos = header.index(outcome_column)
        feature_names = tuple(h for i, h in enumerate(header) if i != y_pos)
        if not feature_names:
            raise SchemaError(
                f"{path}: no covariate columns besides {outcome_column!r}")
        y_vals: list = []
        x_rows: list = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaError(
                    f"{path}: line {line_no} has {len(row)} fields, "
                    f"expected {len(header)}")
            values = []
            for pos, cell in enumerate(row):
                try:
                    value = float(cell.strip())
                except ValueError:
                    value = float("nan")
                if not np.isfinite(value):
                    raise SchemaError(
                        f"{path}: line {line_no}, column {header[pos]!r}: "
                        f"cannot use value {cell!r}", column=header[pos])
                values.append(value)
            y_vals.append(values[y_pos])
            x_rows.append([v for i, v in enumerate(values) if i != y_pos])
    if not y_vals:
        raise SchemaError(f"{path}: no data rows")
    return np.asarray(y_vals), np.asarray(x_rows), feature_names
