# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Tests budget-matched ablations"""

# pylint: disable=missing-function-docstring

import math

import pytest

from mwcnn_restore.ablation import (
    receptive_extent,
    run_ablation,
    run_level_sweep,
    variant_config,
)
from mwcnn_restore.config import MwcnnConfig, TrainConfig, preset_config
from mwcnn_restore.constants import DEFAULT_ABLATION_VARIANTS
from mwcnn_restore.corpus import split_corpus, synthetic_corpus
from mwcnn_restore.model import build
from mwcnn_restore.tensor import new_rng

BASE = MwcnnConfig(levels=1, widths=(4,), block_depth=2)
TRAIN = TrainConfig(
    sigma=25.0, patch=8, batch=2, epochs=1, steps_per_epoch=2, lr_start=1e-3, lr_end=1e-3
)


def _data() -> tuple[list, list]:
    return split_corpus(synthetic_corpus(3, 16, new_rng(0)), 1)


def test_variant_configs() -> None:
    assert variant_config("db2", BASE).bank == "db2"
    hd = variant_config("hd", BASE)
    assert (hd.bank, hd.bank_expand, hd.allow_mixed_banks) == ("haar", "db2", True)
    assert variant_config("sum_pool", BASE).downsampler == "sum_pool"
    chain = variant_config("dilated_chain", BASE)
    assert chain.downsampler == "dilated_chain"
    assert chain.widths == BASE.widths
    with pytest.raises(ValueError):
        variant_config("unknown", BASE)


def test_receptive_extents() -> None:
    chain = build(variant_config("dilated_chain", BASE))
    extent, holes = receptive_extent(chain)
    assert extent == (17, 17)
    assert holes > 0
    _, holes = receptive_extent(build(BASE))
    assert holes == 0


def test_variants_share_budget() -> None:
    corpus, val = _data()
    results = run_ablation(["haar", "sum_pool", "dilated_chain"], BASE, TRAIN, corpus, val)
    assert [r.variant for r in results] == ["haar", "sum_pool", "dilated_chain"]
    assert [r.conv_layers for r in results] == [4, 4, 4]
    noisy = {r.noisy_psnr for r in results}
    assert len(noisy) == 1
    for r in results:
        assert math.isfinite(r.val_psnr)


@pytest.mark.slow
def test_level_sweep() -> None:
    corpus, val = _data()
    results = run_level_sweep([1, 2], BASE, TRAIN, corpus, val)
    assert [r.variant for r in results] == ["haar-L1", "haar-L2"]
    assert results[0].rf_extent[0] < results[1].rf_extent[0]


@pytest.mark.slow
def test_desk_ablation_gains_over_noise() -> None:
    model_cfg, cfg = preset_config("desk")
    corpus, val = split_corpus(
        synthetic_corpus(24, 96, new_rng(cfg.seed + 3)), cfg.val_count
    )
    results = run_ablation(list(DEFAULT_ABLATION_VARIANTS), model_cfg, cfg, corpus, val)
    gains = {r.variant: r.gain for r in results}
    assert gains["haar"] >= 2.0
    assert all(gain > 0 for gain in gains.values()), gains
