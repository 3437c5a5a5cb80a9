# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Tests wavelet transforms"""

# pylint: disable=missing-function-docstring

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwcnn_restore.errors import ShapeError
from mwcnn_restore.layers import sum_pool2
from mwcnn_restore.tensor import new_rng
from mwcnn_restore.wavelet import (
    SubbandQuad,
    WptTree,
    daubechies2_taps,
    dwt2,
    dwt2_adjoint,
    get_bank,
    iwt2,
    wpt_decompose,
    wpt_reconstruct,
)

BANKS = ["haar", "db2"]


def test_haar_two_by_two_block() -> None:
    x = np.array([[[[1.0, 2.0], [3.0, 4.0]]]])
    q = dwt2(x, get_bank("haar"))
    assert [float(b[0, 0, 0, 0]) for b in q.bands] == [10.0, 4.0, 2.0, 0.0]


def test_haar_inverse_pixel_formula() -> None:
    q = SubbandQuad(*(np.full((1, 1, 1, 1), v) for v in (10.0, 4.0, 2.0, 0.0)))
    np.testing.assert_array_equal(
        iwt2(q, get_bank("haar")), np.array([[[[1.0, 2.0], [3.0, 4.0]]]])
    )


@pytest.mark.parametrize("bank", BANKS)
@pytest.mark.parametrize("dtype,tol", [(np.float32, 1e-5), (np.float64, 1e-10)])
def test_perfect_reconstruction(bank: str, dtype: type, tol: float) -> None:
    rng = new_rng(1)
    for h, w in [(4, 4), (8, 6), (16, 32), (64, 64)]:
        x = rng.standard_normal((2, 3, h, w)).astype(dtype)
        back = iwt2(dwt2(x, get_bank(bank)), get_bank(bank))
        assert back.dtype == dtype
        assert float(np.max(np.abs(back - x))) < tol


def test_haar_low_pass_is_sum_pooling() -> None:
    x = new_rng(2).integers(0, 256, size=(2, 2, 10, 14)).astype(np.float32)
    np.testing.assert_array_equal(dwt2(x, get_bank("haar")).x1, sum_pool2(x))


@pytest.mark.parametrize("bank", BANKS)
def test_odd_dims_rejected(bank: str) -> None:
    with pytest.raises(ShapeError):
        dwt2(np.zeros((1, 1, 5, 8)), get_bank(bank))


def test_db2_needs_four_pixels() -> None:
    with pytest.raises(ShapeError):
        dwt2(np.zeros((1, 1, 2, 2)), get_bank("db2"))


def test_unknown_bank() -> None:
    with pytest.raises(ValueError):
        get_bank("sym4")


def test_db2_taps_are_orthonormal() -> None:
    low, high = daubechies2_taps()
    assert len(low) == 4
    assert float(low.sum()) == pytest.approx(math.sqrt(2.0))
    assert float(low @ low) == pytest.approx(1.0)
    assert float(low @ high) == pytest.approx(0.0, abs=1e-12)


def test_db2_preserves_energy() -> None:
    x = new_rng(3).standard_normal((1, 1, 12, 16))
    q = dwt2(x, get_bank("db2"))
    energy = sum(float(np.sum(b**2)) for b in q.bands)
    assert energy == pytest.approx(float(np.sum(x**2)), rel=1e-10)


@pytest.mark.parametrize("bank", BANKS)
def test_adjoint_is_transpose(bank: str) -> None:
    rng = new_rng(4)
    x = rng.standard_normal((1, 2, 8, 8))
    q = SubbandQuad(*(rng.standard_normal((1, 2, 4, 4)) for _ in range(4)))
    lhs = sum(float(np.sum(a * b)) for a, b in zip(dwt2(x, get_bank(bank)).bands, q.bands))
    rhs = float(np.sum(x * dwt2_adjoint(q, get_bank(bank))))
    assert lhs == pytest.approx(rhs, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    alpha=st.floats(-4.0, 4.0),
    beta=st.floats(-4.0, 4.0),
    bank=st.sampled_from(BANKS),
)
def test_dwt_is_linear(seed: int, alpha: float, beta: float, bank: str) -> None:
    rng = new_rng(seed)
    x, y = rng.standard_normal((2, 1, 1, 8, 8))
    f = get_bank(bank)
    combined = dwt2(alpha * x + beta * y, f).stacked()
    separate = alpha * dwt2(x, f).stacked() + beta * dwt2(y, f).stacked()
    np.testing.assert_allclose(combined, separate, atol=1e-9)


def test_stacked_roundtrip_layout() -> None:
    t = np.arange(2 * 8 * 2 * 2, dtype=np.float64).reshape(2, 8, 2, 2)
    q = SubbandQuad.from_stacked(t)
    assert q.shape == (2, 2, 2, 2)
    np.testing.assert_array_equal(q.x2, t[:, 2:4])
    np.testing.assert_array_equal(q.stacked(), t)
    with pytest.raises(ShapeError):
        SubbandQuad.from_stacked(np.zeros((1, 6, 2, 2)))


@pytest.mark.parametrize("bank", BANKS)
@pytest.mark.parametrize("levels", [1, 2, 3])
def test_wpt_roundtrip(bank: str, levels: int) -> None:
    x = new_rng(levels).standard_normal((1, 1, 32, 24))
    tree = wpt_decompose(x, get_bank(bank), levels)
    assert len(tree.leaves) == 4**levels
    assert tree.leaf_shape == (1, 1, 32 // 2**levels, 24 // 2**levels)
    np.testing.assert_allclose(wpt_reconstruct(tree, get_bank(bank)), x, atol=1e-10)


def test_wpt_first_leaf_is_repeated_low_pass() -> None:
    x = new_rng(5).integers(0, 256, size=(1, 1, 16, 16)).astype(np.float64)
    tree = wpt_decompose(x, get_bank("haar"), 2)
    np.testing.assert_array_equal(tree.leaves[0], sum_pool2(sum_pool2(x)))
    # depth-first: the second leaf is the LH band of the LL band
    ll = dwt2(x, get_bank("haar")).x1
    np.testing.assert_array_equal(tree.leaves[1], dwt2(ll, get_bank("haar")).x2)


def test_wpt_size_must_divide() -> None:
    with pytest.raises(ShapeError):
        wpt_decompose(np.zeros((1, 1, 12, 12)), get_bank("haar"), 3)


def test_wpt_malformed_tree() -> None:
    tree = WptTree(levels=2, leaves=[np.zeros((1, 1, 2, 2))] * 5)
    with pytest.raises(ShapeError):
        wpt_reconstruct(tree, get_bank("haar"))
