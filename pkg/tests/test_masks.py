"""Mask construction and complexity metrics."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maskcov.masks import (
    MaskRangeWarning,
    all_ones_mask,
    banded_mask,
    custom_mask,
    load_mask,
    mask_complexity,
    tapered_mask,
    zero_mask,
)
from maskcov.matrix_core import (
    SymMatrix,
    gershgorin_column_bound,
    spectral_norm,
    write_matrix_text,
)

# the displayed 5x5 bandwidth-3 example
TRIDIAG_5 = np.array(
    [
        [1, 1, 0, 0, 0],
        [1, 1, 1, 0, 0],
        [0, 1, 1, 1, 0],
        [0, 0, 1, 1, 1],
        [0, 0, 0, 1, 1],
    ],
    dtype=float,
)


def test_banded_5_3_matches_display():
    assert np.array_equal(banded_mask(5, 3).matrix.mat, TRIDIAG_5)


def test_banded_bandwidth_one_is_identity():
    assert np.array_equal(banded_mask(6, 1).matrix.mat, np.eye(6))


def test_banded_band_covering_everything_is_all_ones():
    assert np.array_equal(banded_mask(4, 7).matrix.mat, np.ones((4, 4)))


def test_banded_rejects_even_and_out_of_range():
    with pytest.raises(ValueError):
        banded_mask(5, 4)
    with pytest.raises(ValueError):
        banded_mask(4, 9)
    with pytest.raises(ValueError):
        banded_mask(4, -1)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 20), st.integers(0, 19))
def test_banded_band_support(p, half):
    bandwidth = 2 * half + 1
    if bandwidth > 2 * p - 1:
        bandwidth = 2 * p - 1
        half = (bandwidth - 1) // 2
    m = banded_mask(p, bandwidth).matrix.mat
    for i in range(p):
        for j in range(p):
            assert (m[i, j] != 0.0) == (abs(i - j) <= half)


def test_all_ones_examples():
    assert np.array_equal(all_ones_mask(1).matrix.mat, [[1.0]])
    mc = mask_complexity(all_ones_mask(4))
    assert mc.col_norm_sq == pytest.approx(4.0)
    assert mc.spec_norm == pytest.approx(4.0)
    assert spectral_norm(all_ones_mask(2).matrix) == pytest.approx(2.0)


def test_tapered_examples():
    assert np.array_equal(tapered_mask(7, 1).matrix.mat, np.eye(7))
    m = tapered_mask(5, 3).matrix.mat
    assert m[0, 1] == pytest.approx(0.5)
    assert m[0, 2] == 0.0
    assert np.all(np.diag(m) == 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 16), st.integers(0, 15))
def test_tapered_entries_in_range_and_monotone(p, half):
    bandwidth = min(2 * half + 1, 2 * p - 1)
    m = tapered_mask(p, bandwidth).matrix.mat
    assert np.all(m >= 0.0) and np.all(m <= 1.0)
    row = m[0]
    assert np.all(np.diff(row) <= 1e-15)  # non-increasing in |i - j|


def test_mask_complexity_identity():
    mc = mask_complexity(banded_mask(5, 1))
    assert mc.col_norm_sq == pytest.approx(1.0)
    assert mc.spec_norm == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 24), st.integers(0, 8))
def test_banded_complexity_at_most_bandwidth(p, half):
    bandwidth = min(2 * half + 1, 2 * p - 1)
    mask = banded_mask(p, bandwidth)
    mc = mask_complexity(mask)
    assert mc.col_norm_sq <= bandwidth + 1e-9
    assert mc.spec_norm <= bandwidth + 1e-9
    assert mc.spec_norm <= gershgorin_column_bound(mask.matrix) + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_col_norm_dominated_by_spec_norm(p, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((p, p))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MaskRangeWarning)
        mask = custom_mask(SymMatrix(0.5 * (a + a.T)))
    mc = mask_complexity(mask)
    assert math.sqrt(mc.col_norm_sq) <= mc.spec_norm * (1.0 + 1e-9) + 1e-12


def test_zero_mask():
    mc = mask_complexity(zero_mask(4))
    assert mc.col_norm_sq == 0.0
    assert mc.spec_norm == 0.0


def test_load_mask_round_trip(tmp_path):
    src = banded_mask(6, 3)
    path = tmp_path / "mask.txt"
    write_matrix_text(src.matrix, path)
    back = load_mask(path)
    assert back.kind == "custom"
    assert np.array_equal(back.matrix.mat, src.matrix.mat)


def test_load_mask_warns_outside_unit_range(tmp_path):
    path = tmp_path / "mask.txt"
    write_matrix_text(SymMatrix(np.array([[1.0, -0.5], [-0.5, 2.0]])), path)
    with pytest.warns(MaskRangeWarning):
        mask = load_mask(path)
    assert mask.kind == "custom"


def test_load_mask_rejects_asymmetric(tmp_path):
    path = tmp_path / "mask.txt"
    path.write_text("2\n1 1\n0 1\n")
    with pytest.raises(ValueError):
        load_mask(path)
