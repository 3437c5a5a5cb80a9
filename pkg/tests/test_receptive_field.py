# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Tests receptive-field masks"""

# pylint: disable=missing-function-docstring

import numpy as np
import pytest

from mwcnn_restore.config import MwcnnConfig
from mwcnn_restore.errors import ShapeError
from mwcnn_restore.model import build, conv_chain, dilated_chain_variant
from mwcnn_restore.receptive_field import (
    mask_summary,
    mask_to_image,
    receptive_field_mask,
)


def test_dilated_chain_has_gridding_holes() -> None:
    mask = receptive_field_mask(dilated_chain_variant(3, 4), (16, 16))
    summary = mask_summary(mask)
    assert summary.bbox == (10, 10, 22, 22)
    assert summary.extent == (13, 13)
    assert summary.support == 49
    assert summary.holes == 120
    assert mask[10, 10] and not mask[11, 10]


def test_single_conv_is_three_by_three() -> None:
    summary = mask_summary(receptive_field_mask(conv_chain([1], 2), (5, 5)))
    assert summary.extent == (3, 3)
    assert summary.dense


def test_one_level_wavelet_network_is_dense() -> None:
    g = build(MwcnnConfig(levels=1, widths=(4,), block_depth=2))
    summary = mask_summary(receptive_field_mask(g, (16, 16)))
    assert summary.dense
    assert summary.extent[0] > 3


@pytest.mark.parametrize("levels", [2, 3])
def test_deeper_wavelet_networks_are_dense(levels: int) -> None:
    g = build(MwcnnConfig(levels=levels, block_depth=1, widths=(2,) * levels))
    assert mask_summary(receptive_field_mask(g, (16, 16))).dense


def test_plain_chain_grows_linearly() -> None:
    summary = mask_summary(receptive_field_mask(conv_chain([1] * 4, 2), (16, 16)))
    assert summary.extent == (9, 9)
    assert summary.dense


def test_argument_checks() -> None:
    g = build(MwcnnConfig(levels=2, widths=(2, 4), block_depth=1))
    with pytest.raises(ValueError):
        receptive_field_mask(g, (32, 0))
    with pytest.raises(ShapeError):
        receptive_field_mask(g, (0, 0), size=(30, 32))


def test_empty_mask_summary() -> None:
    summary = mask_summary(np.zeros((4, 4), dtype=bool))
    assert summary.support == 0
    assert not summary.dense


def test_mask_image() -> None:
    img = mask_to_image(np.array([[True, False]]))
    assert img.dtype == np.uint8
    assert img.tolist() == [[255, 0]]
