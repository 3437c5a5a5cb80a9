# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""
Wavelet packet dumps of gray images.

``decompose`` writes every leaf of the packet tree as a pair of PGM files:
``band_<path>.pgm`` holds the high byte of a 16-bit affine quantization of
the leaf and doubles as a preview, ``band_<path>.lo.pgm`` holds the low
byte. ``<path>`` lists the subband taken at each level (1 = LL, 2 = LH,
3 = HL, 4 = HH), so leaves sort in depth-first order. The sidecar
``subbands.txt`` records the bank, the level count, the original image size
and per leaf the ``offset`` and ``scale`` of the quantization::

    bank haar
    levels 2
    size 64 48
    band_11 0.0 0.0155...
"""

from __future__ import annotations

import itertools
import logging
import os
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from .constants import SUBBAND_SIDECAR
from .errors import PnmError
from .pnm import ImageU8, image_to_tensor, read_pnm, tensor_to_image, write_pnm
from .restore import pad_to_multiple
from .wavelet import WptTree, get_bank, wpt_decompose, wpt_reconstruct

_LEVELS16 = 65535


@dataclass(frozen=True)
class LeafInfo:
    """Dequantization of one leaf: ``value = q * scale + offset``."""

    name: str
    offset: float
    scale: float


@dataclass
class SubbandIndex:
    """Contents of the sidecar file."""

    bank: str
    levels: int
    size: tuple[int, int]
    leaves: list[LeafInfo] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            f"bank {self.bank}",
            f"levels {self.levels}",
            f"size {self.size[0]} {self.size[1]}",
        ]
        lines += [f"{leaf.name} {leaf.offset!r} {leaf.scale!r}" for leaf in self.leaves]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> SubbandIndex:
        """Parse a sidecar; raises PnmError on malformed content."""
        rows = [line.split() for line in text.splitlines() if line.strip()]
        try:
            header = {row[0]: row[1:] for row in rows[:3]}
            index = cls(
                bank=header["bank"][0],
                levels=int(header["levels"][0]),
                size=(int(header["size"][0]), int(header["size"][1])),
            )
            for name, offset, scale in rows[3:]:
                index.leaves.append(LeafInfo(name, float(offset), float(scale)))
        except (KeyError, IndexError, ValueError) as exc:
            raise PnmError(f"Malformed {SUBBAND_SIDECAR}: {exc}") from exc
        if len(index.leaves) != 4**index.levels:
            raise PnmError(
                f"{SUBBAND_SIDECAR} lists {len(index.leaves)} leaves "
                f"for {index.levels} levels"
            )
        return index


def leaf_names(levels: int) -> list[str]:
    """Leaf names in depth-first order."""
    return ["band_" + "".join(p) for p in itertools.product("1234", repeat=levels)]


def _quantize(leaf: npt.NDArray[np.float64]) -> tuple[npt.NDArray[np.int64], float, float]:
    offset = float(leaf.min())
    span = float(leaf.max()) - offset
    scale = span / _LEVELS16 if span > 0 else 1.0
    q = np.clip(np.rint((leaf - offset) / scale), 0, _LEVELS16).astype(np.int64)
    return q, offset, scale


def decompose(img: ImageU8, bank: str, levels: int, out_dir: str) -> SubbandIndex:
    """Write the packet leaves of ``img`` and the sidecar into ``out_dir``.

    The image is extended symmetrically to a multiple of 2^levels first; the
    sidecar keeps the original size.
    """
    x = image_to_tensor(img, dtype=np.float64)
    tree = wpt_decompose(pad_to_multiple(x, 2**levels), get_bank(bank), levels)
    index = SubbandIndex(bank=bank, levels=levels, size=(img.h, img.w))
    os.makedirs(out_dir, exist_ok=True)
    for name, leaf in zip(leaf_names(levels), tree.leaves):
        q, offset, scale = _quantize(leaf[0, 0])
        write_pnm(ImageU8((q >> 8).astype(np.uint8)), os.path.join(out_dir, f"{name}.pgm"))
        write_pnm(
            ImageU8((q & 0xFF).astype(np.uint8)), os.path.join(out_dir, f"{name}.lo.pgm")
        )
        index.leaves.append(LeafInfo(name, offset, scale))
    with open(os.path.join(out_dir, SUBBAND_SIDECAR), "w", encoding="utf-8") as f:
        f.write(index.to_text())
    logging.info("Wrote %d %s leaves to %s", len(tree.leaves), bank, out_dir)
    return index


def reconstruct(in_dir: str) -> ImageU8:
    """Rebuild the image from a ``decompose`` dump."""
    try:
        with open(os.path.join(in_dir, SUBBAND_SIDECAR), "r", encoding="utf-8") as f:
            index = SubbandIndex.from_text(f.read())
    except OSError as exc:
        raise PnmError(f"Could not read {SUBBAND_SIDECAR} in {in_dir}: {exc}") from exc
    leaves = []
    for info in index.leaves:
        hi = read_pnm(os.path.join(in_dir, f"{info.name}.pgm")).samples
        lo = read_pnm(os.path.join(in_dir, f"{info.name}.lo.pgm")).samples
        q = (hi.astype(np.int64) << 8) | lo.astype(np.int64)
        leaves.append((q * info.scale + info.offset)[np.newaxis, np.newaxis])
    x = wpt_reconstruct(WptTree(levels=index.levels, leaves=leaves), get_bank(index.bank))
    h, w = index.size
    return tensor_to_image(x[..., :h, :w])
