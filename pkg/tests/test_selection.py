"""Cross-validated exponent selection and holdout scoring."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from genpml import (
    CensorSpec,
    ConvergenceError,
    DataValidationError,
    Dataset,
    DgpConfig,
    EstimatorSpec,
    cross_validate,
    draw_covariates,
    fold_indices,
    generate,
    holdout_rmse,
)


def _noiseless(n=120, seed=21, theta=(0.8, 0.5)):
    X = draw_covariates(n, seed=seed)
    return Dataset(y=np.exp(X @ np.asarray(theta)), X=X)


def test_fold_indices_partition_and_balance():
    folds = fold_indices(103, k=5, seed=0)
    assert len(folds) == 5
    allidx = np.sort(np.concatenate(folds))
    assert_array_equal(allidx, np.arange(103))
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1
    # each fold is sorted, deterministic in the seed
    for f in folds:
        assert_array_equal(f, np.sort(f))
    again = fold_indices(103, k=5, seed=0)
    for a, b in zip(folds, again):
        assert_array_equal(a, b)
    other = fold_indices(103, k=5, seed=1)
    assert any(not np.array_equal(a, b) for a, b in zip(folds, other))


def test_fold_indices_validation():
    with pytest.raises(DataValidationError):
        fold_indices(50, k=1, seed=0)
    with pytest.raises(DataValidationError):
        fold_indices(9, k=5, seed=0)


def test_noiseless_ties_resolve_to_zero():
    # every exponent recovers theta exactly, so all OOS errors tie and the
    # smallest-magnitude kappa wins
    cv = cross_validate(_noiseless(), kappa_grid=[-1.0, -0.5, 0.0, 0.5, 1.0],
                        k=5, seed=2)
    assert cv.selected_kappa == 0.0
    assert cv.failures == ()
    assert np.all(np.isfinite(cv.e_curve))


def test_tied_magnitudes_resolve_to_positive():
    cv = cross_validate(_noiseless(), kappa_grid=[-0.5, 0.5], k=5, seed=2)
    assert cv.selected_kappa == 0.5


def test_explicit_folds_override_seed():
    data = _noiseless(n=90, seed=5)
    base = fold_indices(90, k=3, seed=7)
    cv_seeded = cross_validate(data, kappa_grid=[0.0, 0.5], k=3, seed=7)
    cv_explicit = cross_validate(data, kappa_grid=[0.0, 0.5],
                                 folds=list(reversed(base)))
    assert cv_seeded.seed == 7
    assert cv_explicit.seed is None
    assert cv_explicit.k == 3
    # fold order permutes rows of per_fold but not the aggregate curve
    assert_allclose(np.sort(cv_explicit.per_fold, axis=0),
                    np.sort(cv_seeded.per_fold, axis=0), rtol=1e-12)
    assert_allclose(cv_explicit.e_curve, cv_seeded.e_curve, rtol=1e-12)
    assert cv_explicit.selected_kappa == cv_seeded.selected_kappa


def test_explicit_folds_must_partition():
    data = _noiseless(n=30)
    good = fold_indices(30, k=3, seed=0)
    with pytest.raises(DataValidationError):
        cross_validate(data, kappa_grid=[0.0], folds=[np.arange(30)])  # k=1
    with pytest.raises(DataValidationError):
        cross_validate(data, kappa_grid=[0.0], folds=[good[0], good[1]])  # missing
    overlap = [good[0], np.concatenate([good[1], good[0][:1]]), good[2][:-1]]
    with pytest.raises(DataValidationError):
        cross_validate(data, kappa_grid=[0.0], folds=overlap)


def test_failures_are_recorded_and_excluded():
    # heavy censoring with alpha = 2 makes the kappa = -1 member stall on
    # every training fold while the rest of the grid converges
    cfg = DgpConfig(theta0=(1.0, 1.0), alpha=2.0,
                    censor=CensorSpec(family="logistic_power", tau=0.2, beta=2.0),
                    n=80, seed=0)
    data = generate(cfg).dataset
    cv = cross_validate(data, kappa_grid=[-1.0, -0.5, 0.0, 0.5, 1.0], k=4, seed=3)
    assert cv.failures == ((0, -1.0), (1, -1.0), (2, -1.0), (3, -1.0))
    assert np.isnan(cv.e_curve[0]) and np.all(np.isfinite(cv.e_curve[1:]))
    assert_array_equal(np.isnan(cv.per_fold[:, 0]), np.ones(4, dtype=bool))
    assert np.all(np.isfinite(cv.per_fold[:, 1:]))
    assert cv.selected_kappa == 1.0  # best OOS MSE among the usable exponents
    assert cv.e_curve[np.argwhere(np.array(cv.kappa_grid) == 1.0)[0, 0]] == \
        np.nanmin(cv.e_curve)


def test_all_failures_raise():
    data = _noiseless(n=60)
    with pytest.raises(ConvergenceError) as exc:
        cross_validate(data, kappa_grid=[0.0, 0.5], k=3, seed=0, max_iter=1)
    assert exc.value.n_failed == 2
    assert exc.value.n_total == 2


def test_grid_validation():
    data = _noiseless(n=40)
    with pytest.raises(DataValidationError):
        cross_validate(data, kappa_grid=[])
    with pytest.raises(DataValidationError):
        cross_validate(data, kappa_grid=[0.0, 0.5, 0.5])
    with pytest.raises(DataValidationError):
        cross_validate(data, kappa_grid=[0.0, 1.5])


def test_holdout_rmse_noiseless_and_deterministic():
    data = _noiseless(n=100, seed=9)
    spec = EstimatorSpec(kappa=0.0)
    mean, sd = holdout_rmse(data, spec, split_fraction=0.8, seed=4, repeats=5)
    assert mean < 1e-6  # exact model, exact recovery
    assert sd >= 0.0
    again = holdout_rmse(data, spec, split_fraction=0.8, seed=4, repeats=5)
    assert (mean, sd) == again

    noisy = generate(DgpConfig(theta0=(1.0, 1.0), alpha=1.0, n=300, seed=2)).dataset
    m1, s1 = holdout_rmse(noisy, spec, seed=0, repeats=6)
    m2, _ = holdout_rmse(noisy, spec, seed=1, repeats=6)
    assert m1 > 0 and s1 > 0
    assert m1 != m2


def test_holdout_rmse_validation():
    data = _noiseless(n=10)
    spec = EstimatorSpec(kappa=0.0)
    with pytest.raises(DataValidationError):
        holdout_rmse(data, spec, split_fraction=0.0)
    with pytest.raises(DataValidationError):
        holdout_rmse(data, spec, split_fraction=1.0)
    with pytest.raises(DataValidationError):
        holdout_rmse(data, spec, split_fraction=0.99)  # empty test split
    with pytest.raises(DataValidationError):
        holdout_rmse(data, spec, repeats=0)


def test_default_grid_shape():
    from genpml.selection import DEFAULT_KAPPA_GRID
    assert len(DEFAULT_KAPPA_GRID) == 41
    assert DEFAULT_KAPPA_GRID[0] == -1.0
    assert DEFAULT_KAPPA_GRID[-1] == 1.0
    assert DEFAULT_KAPPA_GRID[20] == 0.0
    steps = np.diff(DEFAULT_KAPPA_GRID)
    assert_allclose(steps, 0.05, rtol=1e-9)
