"""Schema enforcement of the CSV/JSON readers."""

import csv
import json
import math

import pytest
from numpy.testing import assert_array_equal

from genpml_plots import (
    PHASE_COLUMNS,
    SWEEP_COLUMNS,
    SchemaError,
    read_cv_json,
    read_dataset_csv,
    read_fit_json,
    read_phase_csv,
    read_sweep_csv,
)


def _write_rows(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(rows)
    return path


def test_sweep_reader_types_and_order(alpha_sweep_csv):
    rows = read_sweep_csv(alpha_sweep_csv)
    assert len(rows) == 30  # 3 cells x 5 exponents x 2 coordinates
    first = rows[0]
    assert first["cell_param_name"] == "alpha"
    assert isinstance(first["cell_param_value"], float)
    assert isinstance(first["rmse"], float)
    assert isinstance(first["coord"], int)
    assert {r["coord"] for r in rows} == {0, 1}
    assert {r["kappa"] for r in rows} == {-1.0, -0.5, 0.0, 0.5, 1.0}


def test_sweep_reader_matches_raw_cells(alpha_sweep_csv):
    with open(alpha_sweep_csv, newline="") as fh:
        raw = list(csv.DictReader(fh))
    rows = read_sweep_csv(alpha_sweep_csv)
    assert_array_equal([r["rmse"] for r in rows],
                       [float(r["rmse"]) for r in raw])
    assert_array_equal([r["bias"] for r in rows],
                       [float(r["bias"]) for r in raw])


def test_sweep_reader_names_missing_column(tmp_path, alpha_sweep_csv):
    with open(alpha_sweep_csv, newline="") as fh:
        rows = list(csv.reader(fh))
    rows[0][rows[0].index("rmse")] = "foo"
    p = _write_rows(tmp_path / "renamed.csv", rows)
    with pytest.raises(SchemaError) as exc:
        read_sweep_csv(p)
    assert exc.value.column == "rmse"
    assert "rmse" in str(exc.value)


def test_sweep_reader_rejects_extra_column(tmp_path):
    p = _write_rows(tmp_path / "extra.csv",
                    [list(SWEEP_COLUMNS) + ["junk"],
                     ["alpha"] + ["0"] * (len(SWEEP_COLUMNS))])
    with pytest.raises(SchemaError) as exc:
        read_sweep_csv(p)
    assert exc.value.column == "junk"


def test_sweep_reader_rejects_mixed_axes(tmp_path):
    p = _write_rows(tmp_path / "mixed.csv",
                    [list(SWEEP_COLUMNS),
                     ["alpha", "0", "0", "0", "0", "0", "0", "4", "4", "60", "1"],
                     ["tau", "1", "0", "0", "0", "0", "0", "4", "4", "60", "1"]])
    with pytest.raises(SchemaError) as exc:
        read_sweep_csv(p)
    assert exc.value.column == "cell_param_name"


def test_sweep_reader_accepts_nan_statistics(tmp_path):
    p = _write_rows(tmp_path / "nan.csv",
                    [list(SWEEP_COLUMNS),
                     ["tau", "1", "0", "0", "nan", "nan", "nan", "0", "4",
                      "60", "1"]])
    row = read_sweep_csv(p)[0]
    assert math.isnan(row["rmse"]) and row["n_converged"] == 0


def test_sweep_reader_rejects_text_cell(tmp_path):
    p = _write_rows(tmp_path / "text.csv",
                    [list(SWEEP_COLUMNS),
                     ["tau", "1", "0", "0", "x", "0", "0", "4", "4", "60", "1"]])
    with pytest.raises(SchemaError) as exc:
        read_sweep_csv(p)
    assert exc.value.column == "bias"
    assert "line 2" in str(exc.value)


def test_empty_and_header_only_files(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError, match="file is empty"):
        read_phase_csv(empty)
    header_only = _write_rows(tmp_path / "header.csv", [list(PHASE_COLUMNS)])
    with pytest.raises(SchemaError, match="no data rows"):
        read_phase_csv(header_only)


def test_phase_reader_shape(phase_csv):
    rows = read_phase_csv(phase_csv)
    assert len(rows) == 50  # 5x5 grid x 2 coordinates
    assert {(r["alpha"], r["tau"]) for r in rows} == {
        (a, t) for a in (0.0, 0.5, 1.0, 1.5, 2.0) for t in (1.0, 2.0, 3.0, 4.0, 5.0)}
    assert all(-1.0 <= r["optimal_kappa"] <= 1.0 for r in rows)


def test_cv_reader_accepts_envelope_and_bare(cv_json, tmp_path):
    doc = read_cv_json(cv_json)
    assert len(doc["kappa_grid"]) == len(doc["e_curve"]) == 5
    assert doc["selected_kappa"] in doc["kappa_grid"]
    bare = tmp_path / "bare.json"
    bare.write_text(json.dumps(json.loads(cv_json.read_text())["cv"]))
    assert read_cv_json(bare) == doc


def test_cv_reader_names_missing_key(cv_json, tmp_path):
    inner = json.loads(cv_json.read_text())["cv"]
    del inner["e_curve"]
    p = tmp_path / "broken.json"
    p.write_text(json.dumps(inner))
    with pytest.raises(SchemaError) as exc:
        read_cv_json(p)
    assert exc.value.column == "e_curve"


def test_cv_reader_rejects_length_mismatch(cv_json, tmp_path):
    inner = json.loads(cv_json.read_text())["cv"]
    inner["e_curve"] = inner["e_curve"][:-1]
    p = tmp_path / "short.json"
    p.write_text(json.dumps(inner))
    with pytest.raises(SchemaError, match="kappa_grid"):
        read_cv_json(p)


def test_fit_reader_plain_and_transformed(fit_json, transformed_fit_json):
    plain = read_fit_json(fit_json)
    assert "transform" not in plain and len(plain["theta_hat"]) == 2
    transformed = read_fit_json(transformed_fit_json)
    block = transformed["transform"]
    assert block["add_intercept"] is True
    assert len(block["theta_original"]) == 3
    assert isinstance(block["offset"], float)


def test_fit_reader_requires_theta_hat(tmp_path):
    p = tmp_path / "nofit.json"
    p.write_text(json.dumps({"kappa": 0.0}))
    with pytest.raises(SchemaError) as exc:
        read_fit_json(p)
    assert exc.value.column == "theta_hat"


def test_dataset_reader_round_trip(dataset_csv):
    y, X, names = read_dataset_csv(dataset_csv)
    assert y.shape == (300,) and X.shape == (300, 2)
    assert names == ("x1", "x2")
    assert (y >= 0).all() and (y == 0).any()


def test_dataset_reader_names_outcome_column(tmp_path):
    p = tmp_path / "noy.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(SchemaError) as exc:
        read_dataset_csv(p)
    assert exc.value.column == "y"


def test_dataset_reader_rejects_non_finite_cell(tmp_path):
    p = tmp_path / "inf.csv"
    p.write_text("y,x1\n1.0,2.0\ninf,0.5\n")
    with pytest.raises(SchemaError) as exc:
        read_dataset_csv(p)
    assert exc.value.column == "y"
    assert "line 3" in str(exc.value)
