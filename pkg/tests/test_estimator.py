"""Sample covariance, masked estimator, and error decomposition."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maskcov.bounds import banded_bias_bound
from maskcov.estimator import (
    decompose_error,
    masked_estimator,
    relative_spectral_error,
    sample_covariance,
)
from maskcov.masks import all_ones_mask, banded_mask
from maskcov.matrix_core import SymMatrix, outer, schur_product
from maskcov.models import (
    CovarianceSpec,
    DistributionSpec,
    SampleSet,
    draw_samples,
    materialize,
)


def test_single_sample_gives_outer_product():
    x = np.array([1.0, -2.0, 0.5])
    s = SampleSet(x[None, :])
    assert np.array_equal(sample_covariance(s).mat, outer(x).mat)


def test_two_unit_vectors_give_half_identity():
    s = SampleSet(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert np.allclose(sample_covariance(s).mat, 0.5 * np.eye(2))


def test_rank_deficiency_when_n_below_p():
    rng = np.random.default_rng(0)
    s = SampleSet(rng.standard_normal((3, 8)))
    lam = np.linalg.eigvalsh(sample_covariance(s).mat)
    assert np.sum(lam > 1e-10) <= 3
    assert lam[0] == pytest.approx(0.0, abs=1e-12)


def test_masked_estimator_all_ones_is_plain():
    rng = np.random.default_rng(1)
    s = SampleSet(rng.standard_normal((10, 4)))
    est = masked_estimator(all_ones_mask(4), s)
    assert np.array_equal(est.mat, sample_covariance(s).mat)


def test_masked_estimator_identity_keeps_diagonal():
    rng = np.random.default_rng(2)
    s = SampleSet(rng.standard_normal((10, 4)))
    est = masked_estimator(banded_mask(4, 1), s)
    cov = sample_covariance(s).mat
    assert np.array_equal(est.mat, np.diag(np.diag(cov)))


def test_masked_estimator_zeroes_outside_band():
    rng = np.random.default_rng(3)
    s = SampleSet(rng.standard_normal((10, 6)))
    est = masked_estimator(banded_mask(6, 3), s).mat
    for i in range(6):
        for j in range(6):
            if abs(i - j) > 1:
                assert est[i, j] == 0.0


def test_centered_differs_by_exactly_masked_mean_outer():
    rng = np.random.default_rng(4)
    s = SampleSet(rng.standard_normal((40, 5)))
    mask = banded_mask(5, 3)
    plain = masked_estimator(mask, s)
    centered = masked_estimator(mask, s, centered=True)
    xbar = s.samples.mean(axis=0)
    expected_gap = schur_product(mask.matrix, outer(xbar))
    assert np.allclose(plain.mat - centered.mat, expected_gap.mat, atol=1e-12)


def test_decompose_error_all_ones_has_zero_bias():
    model = DistributionSpec(CovarianceSpec.ar1(5, 0.4), "gaussian")
    sigma = materialize(model.covariance)
    s = draw_samples(model, 50, 0)
    dec = decompose_error(all_ones_mask(5), sigma, s)
    assert dec.bias_term == 0.0
    assert dec.total_actual == pytest.approx(dec.variance_term)


def test_decompose_error_zero_variance_when_estimate_matches():
    # two samples whose empirical covariance is exactly the identity
    s = SampleSet(np.array([[math.sqrt(2.0), 0.0], [0.0, math.sqrt(2.0)]]))
    sigma = SymMatrix(np.eye(2))
    dec = decompose_error(all_ones_mask(2), sigma, s)
    assert dec.variance_term == pytest.approx(0.0, abs=1e-12)


def test_decompose_error_decaying_banded_bias_bound():
    sigma = materialize(CovarianceSpec.decaying(64, 2.0))
    mask = banded_mask(64, 9)  # b = 4
    s = draw_samples(DistributionSpec(CovarianceSpec.decaying(64, 2.0), "gaussian"), 5, 0)
    dec = decompose_error(mask, sigma, s)
    assert banded_bias_bound(2.0, 4) == pytest.approx(0.4)
    assert dec.bias_term <= 0.4


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_triangle_inequality(seed, half):
    rng = np.random.default_rng(seed)
    p = 6
    s = SampleSet(rng.standard_normal((8, p)))
    sigma = materialize(CovarianceSpec.ar1(p, 0.3))
    dec = decompose_error(banded_mask(p, 2 * half + 1), sigma, s)
    scale = max(1.0, dec.total_bound)
    assert dec.total_actual <= dec.total_bound + 1e-12 * scale
    assert dec.total_bound == pytest.approx(dec.variance_term + dec.bias_term)


def test_relative_spectral_error_examples():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((4, 4))
    target = SymMatrix(a @ a.T + np.eye(4))
    assert relative_spectral_error(target, target) == 0.0
    assert relative_spectral_error(SymMatrix(np.zeros((4, 4))), target) == pytest.approx(1.0)
    assert relative_spectral_error(2.0 * target, target) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        relative_spectral_error(target, SymMatrix(np.zeros((4, 4))))


def test_unbiasedness_entrywise():
    """Average of sample covariances over seeded trials matches Sigma entrywise.

    5-standard-error agreement on at least 95% of entries, per the acceptance
    convention for entrywise covariance checks.
    """
    model = DistributionSpec(CovarianceSpec.ar1(16, 0.5), "gaussian")
    sigma = materialize(model.covariance).mat
    trials, n, p = 2000, 50, 16
    sums = np.zeros((p, p))
    sq_sums = np.zeros((p, p))
    for t in range(trials):
        s = draw_samples(model, n, t)
        cov = sample_covariance(s).mat
        sums += cov
        sq_sums += cov**2
    mean = sums / trials
    var = (sq_sums / trials - mean**2) * trials / (trials - 1)
    se = np.sqrt(var / trials)
    ok = np.abs(mean - sigma) <= 5.0 * se
    assert np.mean(ok) >= 0.95
