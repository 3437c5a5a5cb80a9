# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Tests PSNR and SSIM"""

# pylint: disable=missing-function-docstring

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwcnn_restore.errors import ShapeError
from mwcnn_restore.metrics import gaussian_window, psnr, ssim, ssim_map
from mwcnn_restore.pnm import ImageU8
from mwcnn_restore.tensor import new_rng


def _image(seed: int, size: int = 32) -> np.ndarray:
    return new_rng(seed).integers(0, 256, size=(size, size)).astype(np.float64)


def test_psnr_identical_is_infinite() -> None:
    a = _image(0)
    assert psnr(a, a) == math.inf


def test_psnr_closed_forms() -> None:
    a = np.full((8, 8), 100.0)
    assert psnr(a, a + 1.0) == pytest.approx(20 * math.log10(255), abs=1e-9)
    assert psnr(a, a + 1.0) == pytest.approx(48.13, abs=0.005)
    assert psnr(np.zeros((4, 4)), np.full((4, 4), 255.0)) == pytest.approx(0.0)


def test_psnr_accepts_images_and_tensors() -> None:
    img = ImageU8(np.zeros((4, 4), dtype=np.uint8))
    t = np.full((1, 1, 4, 4), 1.0)
    with pytest.raises(ShapeError):
        psnr(img, t)
    assert psnr(img, t[0, 0]) == pytest.approx(48.13, abs=0.005)


def test_psnr_decreases_with_noise() -> None:
    a = np.full((8, 8), 128.0)
    values = [psnr(a, a + amp) for amp in (1.0, 2.0, 5.0, 20.0)]
    assert values == sorted(values, reverse=True)


def test_gaussian_window() -> None:
    w = gaussian_window()
    assert w.shape == (11, 11)
    assert float(w.sum()) == pytest.approx(1.0)
    assert w[5, 5] == w.max()
    np.testing.assert_allclose(w, w.T)


def test_ssim_identical_is_one() -> None:
    a = _image(1)
    assert ssim(a, a) == 1.0


def test_ssim_inverted_is_negative() -> None:
    checker = np.kron(np.indices((8, 8)).sum(axis=0) % 2, np.ones((4, 4))) * 255.0
    assert ssim(checker, 255.0 - checker) < 0


@settings(max_examples=20, deadline=None)
@given(seed_a=st.integers(0, 1000), seed_b=st.integers(0, 1000))
def test_ssim_symmetric_and_bounded(seed_a: int, seed_b: int) -> None:
    a, b = _image(seed_a, 16), _image(seed_b, 16)
    value = ssim(a, b)
    assert -1.0 <= value <= 1.0
    assert value == pytest.approx(ssim(b, a), abs=1e-12)


def test_ssim_matches_windowed_sums() -> None:
    a, b = _image(2, 12), _image(3, 12)
    w = gaussian_window()
    c1, c2 = (0.01 * 255) ** 2, (0.03 * 255) ** 2
    expected = []
    for i in range(2):
        for j in range(2):
            pa, pb = a[i : i + 11, j : j + 11], b[i : i + 11, j : j + 11]
            mu_a, mu_b = (w * pa).sum(), (w * pb).sum()
            var_a = (w * pa * pa).sum() - mu_a**2
            var_b = (w * pb * pb).sum() - mu_b**2
            cov = (w * pa * pb).sum() - mu_a * mu_b
            expected.append(
                (2 * mu_a * mu_b + c1)
                * (2 * cov + c2)
                / ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2))
            )
    np.testing.assert_allclose(ssim_map(a, b).ravel(), expected, rtol=1e-9)


def test_ssim_small_image() -> None:
    with pytest.raises(ShapeError):
        ssim(np.zeros((10, 20)), np.zeros((10, 20)))
