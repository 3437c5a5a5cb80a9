# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""2-D discrete wavelet transform as four stride-2 subband correlations.

Indexing is 0-based. The 1-based block formulas for the Haar transform,
e.g. ``x1(i,j) = x(2i-1,2j-1) + x(2i-1,2j) + x(2i,2j-1) + x(2i,2j)``, read here
as ``x1[i, j] = x[2i, 2j] + x[2i, 2j+1] + x[2i+1, 2j] + x[2i+1, 2j+1]``.
Subband extraction is correlation (no filter flip), so the printed Haar
filters reproduce those formulas literally. Filters wider than 2 taps wrap
periodically past the bottom and right edges.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt
import pywt

from .errors import ShapeError
from .tensor import Tensor4

Matrix = npt.NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Four 2-D analysis filters plus the gain applied by the inverse.

    Attributes:
        name (str): Bank identifier, "haar" or "db2".
        tap (int): Filter side length.
        f_ll, f_lh, f_hl, f_hh (Matrix): ``tap x tap`` analysis filters.
        synth_gain (float): Scale applied to the adjoint to form the inverse.
    """

    name: str
    tap: int
    f_ll: Matrix
    f_lh: Matrix
    f_hl: Matrix
    f_hh: Matrix
    synth_gain: float

    @property
    def filters(self) -> tuple[Matrix, Matrix, Matrix, Matrix]:
        """Filters in subband order (x1, x2, x3, x4)."""
        return (self.f_ll, self.f_lh, self.f_hl, self.f_hh)

    def absolute(self) -> FilterBank:
        """Same bank with every filter entry replaced by its magnitude."""
        return FilterBank(
            name=f"|{self.name}|",
            tap=self.tap,
            f_ll=np.abs(self.f_ll),
            f_lh=np.abs(self.f_lh),
            f_hl=np.abs(self.f_hl),
            f_hh=np.abs(self.f_hh),
            synth_gain=self.synth_gain,
        )


def haar_bank() -> FilterBank:
    """Unnormalized Haar filters, all entries +-1; the inverse divides by 4."""
    return FilterBank(
        name="haar",
        tap=2,
        f_ll=np.array([[1.0, 1.0], [1.0, 1.0]]),
        f_lh=np.array([[-1.0, -1.0], [1.0, 1.0]]),
        f_hl=np.array([[-1.0, 1.0], [-1.0, 1.0]]),
        f_hh=np.array([[1.0, -1.0], [-1.0, 1.0]]),
        synth_gain=0.25,
    )


def daubechies2_taps() -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Orthonormal 4-tap Daubechies-2 low-pass and high-pass taps.

    The reconstruction taps of PyWavelets are used because correlating with
    them equals PyWavelets' convolution with its decomposition taps.
    """
    wavelet = pywt.Wavelet("db2")
    low = np.asarray(wavelet.rec_lo, dtype=np.float64)
    high = np.asarray(wavelet.rec_hi, dtype=np.float64)
    return low, high


def db2_bank() -> FilterBank:
    """Separable Daubechies-2 filters built as outer products of the D4 taps.

    Rows carry the vertical filter, so LH is high-pass along the vertical
    axis as in the Haar bank.
    """
    low, high = daubechies2_taps()
    return FilterBank(
        name="db2",
        tap=4,
        f_ll=np.outer(low, low),
        f_lh=np.outer(high, low),
        f_hl=np.outer(low, high),
        f_hh=np.outer(high, high),
        synth_gain=1.0,
    )


_BANKS = {"haar": haar_bank, "db2": db2_bank}


@functools.cache
def get_bank(name: str) -> FilterBank:
    """Look up a filter bank by name."""
    try:
        return _BANKS[name]()
    except KeyError:
        raise ValueError(f"Unsupported wavelet bank: {name}") from None


@dataclass(frozen=True, eq=False)
class SubbandQuad:
    """The four half-resolution subbands of one DWT level."""

    x1: Tensor4
    x2: Tensor4
    x3: Tensor4
    x4: Tensor4

    def __post_init__(self) -> None:
        shapes = {b.shape for b in self.bands}
        if len(shapes) != 1:
            raise ShapeError(f"Subband shapes differ: {sorted(shapes)}")

    @property
    def bands(self) -> tuple[Tensor4, Tensor4, Tensor4, Tensor4]:
        """Subbands in order x1 (LL), x2 (LH), x3 (HL), x4 (HH)."""
        return (self.x1, self.x2, self.x3, self.x4)

    @property
    def shape(self) -> tuple[int, ...]:
        """Common shape of the subbands."""
        return tuple(self.x1.shape)

    def stacked(self) -> Tensor4:
        """One tensor with all channels of x1 first, then x2, x3, x4."""
        return np.concatenate(self.bands, axis=1)

    @classmethod
    def from_stacked(cls, t: Tensor4) -> SubbandQuad:
        """Inverse of ``stacked``; the channel count must be divisible by 4."""
        if t.ndim != 4 or t.shape[1] % 4:
            raise ShapeError(f"Cannot split {t.shape} into four subband groups")
        x1, x2, x3, x4 = np.split(t, 4, axis=1)
        return cls(x1, x2, x3, x4)


def _check_even(h: int, w: int, bank: FilterBank) -> None:
    if h % 2 or w % 2:
        raise ShapeError(f"Spatial dims must be even, got {h}x{w}")
    if bank.tap > h or bank.tap > w:
        raise ShapeError(f"{bank.name} needs at least {bank.tap}x{bank.tap}, got {h}x{w}")


def _correlate_down(x: Tensor4, f: Matrix) -> Tensor4:
    """Stride-2 correlation of x with f (periodic wrap past the far edges)."""
    n, c, h, w = x.shape
    tap = f.shape[0]
    ext = tap - 2
    xp = np.pad(x, ((0, 0), (0, 0), (0, ext), (0, ext)), mode="wrap") if ext else x
    out = np.zeros((n, c, h // 2, w // 2), dtype=x.dtype)
    for a in range(tap):
        for b in range(tap):
            if f[a, b] != 0:
                out += x.dtype.type(f[a, b]) * xp[:, :, a : a + h : 2, b : b + w : 2]
    return out


def _scatter_up(bands: tuple[Tensor4, ...], filters: tuple[Matrix, ...]) -> Tensor4:
    """Adjoint of ``_correlate_down`` summed over the four subbands."""
    n, c, hh, hw = bands[0].shape
    h, w = 2 * hh, 2 * hw
    tap = filters[0].shape[0]
    ext = tap - 2
    dtype = bands[0].dtype
    xp = np.zeros((n, c, h + ext, w + ext), dtype=dtype)
    for f, s in zip(filters, bands):
        for a in range(tap):
            for b in range(tap):
                if f[a, b] != 0:
                    xp[:, :, a : a + h : 2, b : b + w : 2] += dtype.type(f[a, b]) * s
    if ext:
        # fold the wrapped margin back: rows first, then columns
        xp[:, :, :ext, :] += xp[:, :, h:, :]
        xp[:, :, :h, :ext] += xp[:, :, :h, w:]
    return np.ascontiguousarray(xp[:, :, :h, :w])


def dwt2(x: Tensor4, bank: FilterBank) -> SubbandQuad:
    """Single-level 2-D DWT of every (n, c) slab of ``x``.

    Args:
        x (Tensor4): Input with even spatial dims (at least ``bank.tap``).
        bank (FilterBank): Analysis filters.

    Returns:
        SubbandQuad: Subbands of shape (n, c, h/2, w/2).
    """
    _check_even(x.shape[2], x.shape[3], bank)
    return SubbandQuad(*(_correlate_down(x, f) for f in bank.filters))


def dwt2_adjoint(q: SubbandQuad, bank: FilterBank) -> Tensor4:
    """Transpose of the linear map ``dwt2`` (used by reverse mode)."""
    _check_even(2 * q.shape[2], 2 * q.shape[3], bank)
    return _scatter_up(q.bands, bank.filters)


def iwt2(q: SubbandQuad, bank: FilterBank) -> Tensor4:
    """Exact inverse of ``dwt2`` for the same bank.

    For Haar this evaluates the four pixel formulas, e.g. the top-left pixel
    of each block is ``(x1 - x2 - x3 + x4) / 4``.
    """
    out = dwt2_adjoint(q, bank)
    if bank.synth_gain != 1.0:
        out *= out.dtype.type(bank.synth_gain)
    return out


def iwt2_adjoint(x: Tensor4, bank: FilterBank) -> SubbandQuad:
    """Transpose of the linear map ``iwt2``."""
    q = dwt2(x, bank)
    if bank.synth_gain == 1.0:
        return q
    gain = x.dtype.type(bank.synth_gain)
    return SubbandQuad(*(b * gain for b in q.bands))


@dataclass
class WptTree:
    """Leaves of a multi-level wavelet packet decomposition.

    Leaves are ordered depth-first: all descendants of x1 come before those
    of x2, and so on recursively.
    """

    levels: int
    leaves: list[Tensor4] = field(default_factory=list)
    layout: str = "depth-first"

    @property
    def leaf_shape(self) -> tuple[int, ...]:
        """Common shape of the leaves."""
        return tuple(self.leaves[0].shape) if self.leaves else ()


def wpt_decompose(x: Tensor4, bank: FilterBank, levels: int) -> WptTree:
    """Recursive DWT of every subband, ``levels`` deep."""
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    factor = 2**levels
    if x.shape[2] % factor or x.shape[3] % factor:
        raise ShapeError(
            f"Spatial dims {x.shape[2]}x{x.shape[3]} not divisible by {factor}"
        )
    nodes = [x]
    for _ in range(levels):
        nodes = [band for node in nodes for band in dwt2(node, bank).bands]
    logging.debug("WPT: %d levels, %d leaves of %s", levels, len(nodes), nodes[0].shape)
    return WptTree(levels=levels, leaves=nodes)


def wpt_reconstruct(t: WptTree, bank: FilterBank) -> Tensor4:
    """Recursive IWT from the leaves to the root."""
    if t.levels < 1 or len(t.leaves) != 4**t.levels:
        raise ShapeError(
            f"Malformed tree: {len(t.leaves)} leaves for {t.levels} levels"
        )
    nodes: list[Any] = list(t.leaves)
    for _ in range(t.levels):
        nodes = [
            iwt2(SubbandQuad(*nodes[i : i + 4]), bank) for i in range(0, len(nodes), 4)
        ]
    return nodes[0]
