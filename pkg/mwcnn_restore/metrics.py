# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Restoration quality metrics on the 0-255 scale."""

from __future__ import annotations

import functools
import math
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy import signal

from .constants import PIXEL_PEAK, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW
from .errors import ShapeError
from .pnm import ImageU8

ImageLike = ImageU8 | npt.NDArray[Any]


def _as_array(x: ImageLike) -> npt.NDArray[np.float64]:
    if isinstance(x, ImageU8):
        return x.samples.astype(np.float64)
    return np.asarray(x, dtype=np.float64)


def _as_plane(x: ImageLike) -> npt.NDArray[np.float64]:
    a = _as_array(x)
    while a.ndim > 2 and a.shape[0] == 1:
        a = a[0]
    if a.ndim != 2:
        raise ShapeError(f"SSIM needs a single gray plane, got shape {a.shape}")
    return a


def psnr(a: ImageLike, b: ImageLike) -> float:
    """Peak signal-to-noise ratio in dB with peak 255.

    Identical inputs give ``math.inf``.
    """
    x, y = _as_array(a), _as_array(b)
    if x.shape != y.shape:
        raise ShapeError(f"Shape mismatch: {x.shape} vs {y.shape}")
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PIXEL_PEAK**2 / mse)


@functools.cache
def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> Any:
    """Normalized 2-D Gaussian window of side ``size``."""
    taps = signal.windows.gaussian(size, std=sigma)
    window = np.outer(taps, taps)
    return window / window.sum()


def ssim_map(a: ImageLike, b: ImageLike) -> npt.NDArray[np.float64]:
    """Local SSIM over the valid region of the Gaussian window."""
    x, y = _as_plane(a), _as_plane(b)
    if x.shape != y.shape:
        raise ShapeError(f"Shape mismatch: {x.shape} vs {y.shape}")
    if min(x.shape) < SSIM_WINDOW:
        raise ShapeError(
            f"Image {x.shape[0]}x{x.shape[1]} smaller than the "
            f"{SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    window = gaussian_window()

    def filt(z: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return signal.correlate2d(z, window, mode="valid")

    c1 = (SSIM_K1 * PIXEL_PEAK) ** 2
    c2 = (SSIM_K2 * PIXEL_PEAK) ** 2
    mu_x, mu_y = filt(x), filt(y)
    var_x = filt(x * x) - mu_x * mu_x
    var_y = filt(y * y) - mu_y * mu_y
    cov = filt(x * y) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return num / den


def ssim(a: ImageLike, b: ImageLike) -> float:
    """Mean local SSIM (11x11 Gaussian window, sigma 1.5, K1 0.01, K2 0.03)."""
    value = float(np.mean(ssim_map(a, b)))
    return min(1.0, max(-1.0, value))
