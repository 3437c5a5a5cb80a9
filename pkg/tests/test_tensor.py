# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Tests tensor helpers"""

# pylint: disable=missing-function-docstring

import numpy as np
import pytest

from mwcnn_restore.errors import NonFiniteError, ShapeError
from mwcnn_restore.tensor import (
    DTYPE,
    check_tensor4,
    ensure_finite,
    ewise,
    new_rng,
    randn,
    zeros,
)


def test_same_seed_same_stream() -> None:
    a = new_rng(7).standard_normal(16)
    b = new_rng(7).standard_normal(16)
    np.testing.assert_array_equal(a, b)


def test_indexed_streams_differ() -> None:
    a = new_rng((7, 0)).standard_normal(16)
    b = new_rng((7, 1)).standard_normal(16)
    assert not np.array_equal(a, b)


def test_zeros_shape_and_dtype() -> None:
    t = zeros(2, 3, 4, 5)
    assert t.shape == (2, 3, 4, 5)
    assert t.dtype == DTYPE
    assert not t.any()


@pytest.mark.parametrize("dims", [(0, 1, 2, 2), (1, 1, -1, 2), (1, 0, 1, 1)])
def test_zeros_rejects_empty_dims(dims: tuple[int, int, int, int]) -> None:
    with pytest.raises(ShapeError):
        zeros(*dims)


def test_ewise_ops() -> None:
    a = np.full((1, 1, 2, 2), 3.0)
    b = np.full((1, 1, 2, 2), 2.0)
    np.testing.assert_array_equal(ewise("add", a, b), np.full_like(a, 5.0))
    np.testing.assert_array_equal(ewise("sub", a, b), np.full_like(a, 1.0))
    np.testing.assert_array_equal(ewise("mul", a, b), np.full_like(a, 6.0))


def test_ewise_shape_mismatch() -> None:
    with pytest.raises(ShapeError):
        ewise("add", np.zeros((1, 1, 2, 2)), np.zeros((1, 1, 2, 3)))


def test_ewise_unknown_op() -> None:
    with pytest.raises(ValueError):
        ewise("div", np.ones((1, 1, 1, 1)), np.ones((1, 1, 1, 1)))  # type: ignore[arg-type]


def test_ewise_overflow_is_an_error() -> None:
    big = np.full((1, 1, 1, 1), np.finfo(np.float32).max, dtype=np.float32)
    with np.errstate(over="ignore"), pytest.raises(NonFiniteError):
        ewise("add", big, big)


def test_ensure_finite() -> None:
    x = np.ones(3)
    assert ensure_finite(x) is x
    with pytest.raises(NonFiniteError):
        ensure_finite(np.array([1.0, np.nan]))


def test_check_tensor4() -> None:
    with pytest.raises(ShapeError):
        check_tensor4(np.zeros((2, 2)))
    with pytest.raises(NonFiniteError):
        check_tensor4(np.full((1, 1, 1, 1), np.inf))


def test_randn_moments() -> None:
    x = randn(new_rng(0), 4, 4, 64, 64, std=3.0)
    assert x.dtype == DTYPE
    assert abs(float(x.mean())) < 0.05
    assert float(x.std()) == pytest.approx(3.0, rel=0.02)


def test_randn_rejects_bad_std() -> None:
    with pytest.raises(ValueError):
        randn(new_rng(0), 1, 1, 2, 2, std=0.0)
