# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Tests network construction, forward and backward"""

# pylint: disable=missing-function-docstring

import logging

import numpy as np
import pytest

from mwcnn_restore.config import MwcnnConfig
from mwcnn_restore.errors import ConfigError, ShapeError, TapeError
from mwcnn_restore.layers import Tape
from mwcnn_restore.model import (
    backward,
    build,
    conv_chain,
    dilated_chain_variant,
    forward,
    param_count,
)
from mwcnn_restore.selfcheck import model_grad_error, tiny_model_case
from mwcnn_restore.tensor import new_rng


def test_default_network_has_24_convs() -> None:
    g = build(MwcnnConfig())
    assert len(g.conv_layers) == 24
    assert g.divisor == 8
    assert all(n.dilation == 1 for n in g.conv_layers)


def test_untrained_network_is_identity() -> None:
    g = build(MwcnnConfig(), new_rng(0))
    y = new_rng(1).uniform(0, 255, (2, 1, 24, 40)).astype(np.float32)
    np.testing.assert_array_equal(forward(g, y), y)


def test_channel_layout() -> None:
    g = build(MwcnnConfig(levels=2, widths=(8, 16), block_depth=2))
    assert g.params["enc1.0.conv.weight"].shape == (8, 4, 3, 3)
    assert g.params["enc2.0.conv.weight"].shape == (16, 32, 3, 3)
    assert g.params["dec2.1.conv.weight"].shape == (32, 16, 3, 3)
    assert g.params["dec1.1.conv.weight"].shape == (4, 8, 3, 3)
    assert not g.params["dec1.1.conv.weight"].any()
    assert "dec1.1.bn.gamma" not in g.params


@pytest.mark.parametrize("downsampler", ["dwt", "sum_pool", "dilated_chain"])
@pytest.mark.parametrize("levels", [1, 2, 3])
def test_forward_preserves_shape(downsampler: str, levels: int) -> None:
    cfg = MwcnnConfig(
        levels=levels,
        widths=tuple(4 * 2**i for i in range(levels)),
        block_depth=2,
        downsampler=downsampler,
    )
    g = build(cfg, new_rng(levels))
    y = new_rng(9).standard_normal((2, 1, 2 * cfg.divisor, 3 * cfg.divisor))
    y = y.astype(np.float32)
    assert forward(g, y, mode="train").shape == y.shape
    assert forward(g, y, mode="eval").shape == y.shape


def test_sum_pool_variant_keeps_channels() -> None:
    g = build(MwcnnConfig(levels=1, widths=(8,), downsampler="sum_pool"))
    assert g.params["enc1.0.conv.weight"].shape == (8, 1, 3, 3)
    assert [n.op for n in g.nodes if n.op in {"sum_pool", "unpool"}] == [
        "sum_pool",
        "unpool",
    ]


def test_dilated_chain_delegation() -> None:
    g = build(MwcnnConfig(levels=2, block_depth=3, downsampler="dilated_chain"))
    assert len(g.conv_layers) == 12
    assert {n.dilation for n in g.conv_layers} == {2}
    assert g.divisor == 1


def test_input_checks() -> None:
    g = build(MwcnnConfig(levels=2, widths=(4, 8), block_depth=1))
    with pytest.raises(ShapeError):
        forward(g, np.zeros((1, 1, 12, 10), dtype=np.float32))
    with pytest.raises(ShapeError):
        forward(g, np.zeros((1, 3, 8, 8), dtype=np.float32))


@pytest.mark.parametrize("bank", ["haar", "db2"])
@pytest.mark.parametrize("levels", [1, 2, 3])
def test_identity_blocks_reduce_to_wpt(bank: str, levels: int) -> None:
    g = build(MwcnnConfig(levels=levels, bank=bank), identity_blocks=True)
    assert not g.conv_layers
    y = new_rng(levels).standard_normal((1, 1, 32, 32)).astype(np.float32)
    assert float(np.max(np.abs(forward(g, y) - y))) < 1e-5


def test_mixed_banks_need_flag(caplog: pytest.LogCaptureFixture) -> None:
    with pytest.raises(ConfigError):
        MwcnnConfig(bank="haar", bank_expand="db2")
    cfg = MwcnnConfig(levels=1, bank="haar", bank_expand="db2", allow_mixed_banks=True)
    with caplog.at_level(logging.WARNING):
        g = build(cfg)
    assert "Mixed wavelet banks" in caplog.text
    assert [n.bank for n in g.nodes if n.op in {"dwt", "iwt"}] == ["haar", "db2"]


def test_param_count() -> None:
    g = conv_chain([1, 1], 8, global_residual=False)
    # conv 1->8 (80) + BN (16) + conv 8->1 (73)
    assert param_count(g) == 80 + 16 + 73


def test_dilated_chain_rejects_zero_depth() -> None:
    with pytest.raises(ValueError):
        dilated_chain_variant(0, 4)


def test_backward_matches_finite_differences() -> None:
    g, y, target = tiny_model_case(new_rng(11))
    assert model_grad_error(g, y, target) < 1e-3


def test_backward_needs_tape() -> None:
    g = build(MwcnnConfig(levels=1, widths=(2,), block_depth=1))
    with pytest.raises(TapeError):
        backward(g, None, np.zeros((1, 1, 4, 4), dtype=np.float32))


def test_backward_rejects_foreign_tape() -> None:
    g = build(MwcnnConfig(levels=1, widths=(2,), block_depth=1))
    other = build(MwcnnConfig(levels=1, widths=(2,), block_depth=2))
    tape = Tape()
    y = np.ones((2, 1, 4, 4), dtype=np.float32)
    forward(other, y, mode="train", tape=tape)
    with pytest.raises(TapeError):
        backward(g, tape, y)


def test_input_gradient_of_identity_network() -> None:
    g = build(MwcnnConfig(levels=1, widths=(2,), block_depth=2), dtype=np.float64)
    y = new_rng(3).standard_normal((2, 1, 4, 4))
    tape = Tape()
    forward(g, y, mode="train", tape=tape)
    grad_out = new_rng(4).standard_normal(y.shape)
    grads = backward(g, tape, grad_out)
    # zero last conv: only the global residual path reaches the input
    np.testing.assert_allclose(grads.input, grad_out)
    assert grads.params["dec1.1.conv.weight"].any()
