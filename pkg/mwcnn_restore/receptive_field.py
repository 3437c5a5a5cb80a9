# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Receptive-field masks of a built network.

The mask marks every input pixel that can influence one output pixel. It is
computed by pushing an indicator backward through a non-negative surrogate
of the network: conv weights set to one, wavelet filters replaced by their
magnitudes, BN and ReLU passing the signal unchanged. Because every entry of
the surrogate is non-negative no cancellation can hide a dependency.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .errors import ShapeError
from .layers import Tape, conv2d_input_grad, sum_pool2, sum_pool2_adjoint
from .model import INPUT, ModelGraph, Node, forward
from .wavelet import SubbandQuad, dwt2, dwt2_adjoint, get_bank

Mask = npt.NDArray[np.bool_]


@dataclass(frozen=True)
class MaskSummary:
    """Support statistics of a receptive-field mask.

    ``bbox`` is (top, left, bottom, right), inclusive. ``holes`` counts the
    zero pixels inside the bounding box.
    """

    bbox: tuple[int, int, int, int]
    support: int
    holes: int

    @property
    def extent(self) -> tuple[int, int]:
        """Height and width of the bounding box."""
        top, left, bottom, right = self.bbox
        return bottom - top + 1, right - left + 1

    @property
    def dense(self) -> bool:
        """True when the support fills its bounding box."""
        return self.support > 0 and self.holes == 0


def _binarize(x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    return (x > 0).astype(np.float64)


def _surrogate_step(
    node: Node,
    grad: npt.NDArray[np.float64],
    conv_shapes: dict[str, tuple[int, ...]],
    conv_pads: dict[str, int],
) -> list[npt.NDArray[np.float64]]:
    match node.op:
        case "conv":
            in_shape = conv_shapes[node.name]
            ones = np.ones((grad.shape[1], in_shape[1], 3, 3), dtype=np.float64)
            return [
                conv2d_input_grad(grad, ones, node.dilation, conv_pads[node.name], in_shape)
            ]
        case "bn" | "relu":
            return [grad]
        case "dwt":
            bank = get_bank(node.bank).absolute()
            return [dwt2_adjoint(SubbandQuad.from_stacked(grad), bank)]
        case "iwt":
            return [dwt2(grad, get_bank(node.bank).absolute()).stacked()]
        case "sum_pool":
            return [sum_pool2_adjoint(grad)]
        case "unpool":
            return [sum_pool2(grad)]
        case "add":
            return [grad, grad]
        case _:
            raise ValueError(f"Unknown op {node.op!r} in node {node.name!r}")


def receptive_field_mask(
    g: ModelGraph,
    out_pixel: tuple[int, int],
    size: tuple[int, int] = (32, 32),
) -> Mask:
    """Binary mask of input pixels that can change output pixel ``out_pixel``.

    Args:
        g (ModelGraph): The network; its parameter values are ignored.
        out_pixel (tuple[int, int]): (row, col) of the selected output pixel.
        size (tuple[int, int]): Input height and width, divisible by the
            network's divisor.

    Returns:
        Mask: Boolean array of shape ``size``.
    """
    h, w = size
    row, col = out_pixel
    if not (0 <= row < h and 0 <= col < w):
        raise ValueError(f"Output pixel {out_pixel} outside the {h}x{w} image")
    if h % g.divisor or w % g.divisor:
        raise ShapeError(f"Mask size {h}x{w} not divisible by {g.divisor}")

    # Shapes only: a zero input in eval mode records every conv input.
    tape = Tape()
    forward(g, np.zeros((1, g.in_channels, h, w)), mode="eval", tape=tape)
    conv_shapes: dict[str, tuple[int, ...]] = {}
    conv_pads: dict[str, int] = {}
    while len(tape):
        record = tape.pop()
        if record.kind == "conv":
            conv_shapes[record.layer_id] = record.saved["x"].shape
            conv_pads[record.layer_id] = record.saved["pad"]

    seed = np.zeros((1, g.in_channels, h, w), dtype=np.float64)
    seed[0, :, row, col] = 1.0
    pending = {g.output: seed}
    for node in reversed(g.nodes):
        grad = pending.pop(node.name, None)
        if grad is None:
            continue
        for src, contrib in zip(
            node.inputs, _surrogate_step(node, grad, conv_shapes, conv_pads)
        ):
            total = pending[src] + contrib if src in pending else contrib
            pending[src] = _binarize(total)
    reached = pending.get(INPUT)
    if reached is None:
        return np.zeros((h, w), dtype=bool)
    mask: Mask = reached.sum(axis=(0, 1)) > 0
    logging.debug("Receptive field of %s: %d pixels", out_pixel, int(mask.sum()))
    return mask


def mask_summary(mask: Mask) -> MaskSummary:
    """Bounding box, support size and hole count of ``mask``."""
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        return MaskSummary(bbox=(0, 0, -1, -1), support=0, holes=0)
    top, bottom = int(rows.min()), int(rows.max())
    left, right = int(cols.min()), int(cols.max())
    support = int(rows.size)
    area = (bottom - top + 1) * (right - left + 1)
    return MaskSummary(
        bbox=(top, left, bottom, right), support=support, holes=area - support
    )


def mask_to_image(mask: Mask) -> npt.NDArray[np.uint8]:
    """8-bit rendering: 255 inside the receptive field, 0 elsewhere."""
    return np.where(mask, np.uint8(255), np.uint8(0))
