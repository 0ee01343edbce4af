"""Fixture inputs produced by the estimation CLI, consumed as files only.

Every input is generated by running ``python -m genpml.cli ...`` in a
subprocess — the published interface this package plots from. Nothing here
imports the estimator; if its CLI is not installed the whole suite skips.
"""

import subprocess
import sys

import pytest


def run_genpml(*argv):
    proc = subprocess.run([sys.executable, "-m", "genpml.cli", *argv],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(
            f"genpml {' '.join(argv)} exited {proc.returncode}:\n"
            f"{proc.stderr}")
    return proc


@pytest.fixture(scope="session", autouse=True)
def _require_genpml_cli():
    probe = subprocess.run([sys.executable, "-m", "genpml.cli", "--help"],
                           capture_output=True, text=True)
    if probe.returncode != 0:
        pytest.skip("genpml CLI is not installed; cannot produce inputs")


@pytest.fixture(scope="session")
def inputs_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("inputs")


@pytest.fixture(scope="session")
def alpha_sweep_csv(inputs_dir):
    # 3 alpha cells x 5 default exponents x 2 coordinates = 30 rows
    path = inputs_dir / "alpha_sweep.csv"
    run_genpml("sweep", "--axis", "alpha", "--values", "0,1,2",
               "--reps", "4", "--n", "60", "--seed", "11",
               "--censor", "logistic_power", "--tau", "2", "--beta", "2",
               "--out", str(path))
    return path


@pytest.fixture(scope="session")
def kappa_sweep_csv(inputs_dir):
    path = inputs_dir / "kappa_sweep.csv"
    run_genpml("sweep", "--axis", "kappa", "--values=-1,-0.5,0,0.5,1",
               "--reps", "4", "--n", "60", "--seed", "12",
               "--out", str(path))
    return path


@pytest.fixture(scope="session")
def phase_csv(inputs_dir):
    # 5x5 (alpha, tau) grid, two coordinates each
    path = inputs_dir / "phase.csv"
    run_genpml("phase", "--alphas", "0,0.5,1,1.5,2", "--taus", "1,2,3,4,5",
               "--grid=-1:1:0.5", "--reps", "2", "--n", "50", "--seed", "13",
               "--out", str(path))
    return path


@pytest.fixture(scope="session")
def dataset_csv(inputs_dir):
    path = inputs_dir / "data.csv"
    run_genpml("simulate", "--n", "300", "--seed", "17", "--alpha", "1",
               "--censor", "logistic_power", "--tau", "2", "--beta", "2",
               "--out", str(path))
    return path


@pytest.fixture(scope="session")
def fit_json(inputs_dir, dataset_csv):
    path = inputs_dir / "fit.json"
    run_genpml("fit", "--input", str(dataset_csv), "--kappa", "0.5",
               "--out", str(path))
    return path


@pytest.fixture(scope="session")
def transformed_fit_json(inputs_dir, dataset_csv):
    path = inputs_dir / "fit_transformed.json"
    run_genpml("fit", "--input", str(dataset_csv), "--kappa", "0",
               "--add-intercept", "--standardize", "--out", str(path))
    return path


@pytest.fixture(scope="session")
def cv_json(inputs_dir, dataset_csv):
    path = inputs_dir / "cv.json"
    run_genpml("cv", "--input", str(dataset_csv), "--grid=-1:1:0.5",
               "--k", "3", "--seed", "5", "--out", str(path))
    return path
