"""Core types, input validation, and the exponential-mean link."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from genpml import (
    Dataset,
    DataValidationError,
    DimensionMismatchError,
    EstimatorSpec,
    conditional_mean,
    linear_predictor,
)
from genpml.core import OVERFLOW_THRESHOLD
from genpml.validation import (
    as_design_matrix,
    as_outcome_vector,
    as_parameter_vector,
    check_same_n,
)


def test_dataset_basic_properties():
    y = np.array([0.0, 1.5, 2.0])
    X = np.array([[1.0, 0.0], [0.5, 1.0], [-1.0, 2.0]])
    data = Dataset(y=y, X=X, feature_names=("a", "b"))
    assert data.n == 3
    assert data.d == 2
    assert data.feature_names == ("a", "b")
    # arrays are defensive copies, frozen against mutation
    assert not data.y.flags.writeable
    assert not data.X.flags.writeable
    y[0] = 99.0
    assert data.y[0] == 0.0


def test_dataset_rejects_bad_shapes_and_values():
    X = np.ones((3, 2))
    with pytest.raises(DataValidationError):
        Dataset(y=np.array([1.0, -0.5, 2.0]), X=X)  # negative outcome
    with pytest.raises(DataValidationError):
        Dataset(y=np.array([1.0, np.nan, 2.0]), X=X)
    with pytest.raises(DimensionMismatchError):
        Dataset(y=np.array([1.0, 2.0]), X=X)  # length mismatch
    with pytest.raises(DataValidationError):
        Dataset(y=np.ones(2), X=np.ones((2, 3)))  # n < d
    with pytest.raises(DimensionMismatchError):
        Dataset(y=np.ones(3), X=X, feature_names=("only_one",))


def test_validation_helpers_name_offending_entries():
    with pytest.raises(DataValidationError, match="row 1"):
        as_outcome_vector([1.0, np.inf, 2.0])
    with pytest.raises(DataValidationError, match="row 2"):
        as_outcome_vector([1.0, 2.0, -3.0])
    bad = np.ones((3, 2))
    bad[2, 1] = np.nan
    with pytest.raises(DataValidationError, match="row 2"):
        as_design_matrix(bad)
    with pytest.raises(DimensionMismatchError):
        as_parameter_vector([1.0, 2.0], d=3)
    with pytest.raises(DimensionMismatchError):
        check_same_n(np.ones(3), np.ones((4, 2)))


def test_as_design_matrix_promotes_1d_to_column():
    X = as_design_matrix([1.0, 2.0, 3.0])
    assert X.shape == (3, 1)
    assert X.dtype == np.float64


def test_estimator_spec_validation():
    spec = EstimatorSpec(kappa=0.5, c=0.0)
    assert spec.kappa == 0.5
    with pytest.raises(DataValidationError):
        EstimatorSpec(kappa=1.5)
    with pytest.raises(DataValidationError):
        EstimatorSpec(kappa=-1.0001)
    with pytest.raises(DataValidationError):
        EstimatorSpec(c=-0.1)
    with pytest.raises(DataValidationError):
        EstimatorSpec(tol=0.0)
    with pytest.raises(DataValidationError):
        EstimatorSpec(max_iter=0)


def test_linear_predictor_matches_manual_dot():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((50, 3))
    theta = np.array([0.3, -1.2, 0.7])
    eta = linear_predictor(theta, X)
    assert_allclose(eta, X @ theta, rtol=0, atol=0)
    # linear in theta: eta(a*t1 + t2) == a*eta(t1) + eta(t2)
    t1 = rng.standard_normal(3)
    t2 = rng.standard_normal(3)
    assert_allclose(linear_predictor(2.5 * t1 + t2, X),
                    2.5 * linear_predictor(t1, X) + linear_predictor(t2, X),
                    rtol=1e-12)


def test_linear_predictor_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        linear_predictor([1.0, 2.0], np.ones((4, 3)))


def test_conditional_mean_saturates_instead_of_overflowing():
    X = np.array([[1.0], [2.0]])
    mu, overflowed = conditional_mean([1.0], X)
    assert not overflowed
    assert_allclose(mu, np.exp([1.0, 2.0]))

    mu_big, flagged = conditional_mean([1000.0], X)
    assert flagged
    assert np.all(np.isfinite(mu_big))
    assert_array_equal(mu_big, np.exp(np.minimum([1000.0, 2000.0],
                                                 OVERFLOW_THRESHOLD)))


def test_overflow_threshold_leaves_headroom():
    # exp at the threshold must still be finite with room for a few products
    assert np.isfinite(np.exp(OVERFLOW_THRESHOLD))
    assert np.exp(OVERFLOW_THRESHOLD) < np.finfo(np.float64).max / 5
