# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Train several architectures under one budget and compare them."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace

from .config import MwcnnConfig, TrainConfig
from .constants import SUPPORTED_ABLATION_VARIANTS
from .corpus import Corpus
from .model import ModelGraph, build, param_count
from .receptive_field import mask_summary, receptive_field_mask
from .tensor import new_rng
from .train import Trainer

RF_PROBE_SIZE = 128


# pylint: disable=too-many-instance-attributes
@dataclass
class AblationResult:
    """Budget-matched outcome of one trained variant."""

    variant: str
    levels: int
    conv_layers: int
    params: int
    rf_extent: tuple[int, int]
    rf_holes: int
    noisy_psnr: float
    val_psnr: float
    seconds: float

    @property
    def gain(self) -> float:
        """PSNR improvement over the noisy input, in dB."""
        return self.val_psnr - self.noisy_psnr


def variant_config(variant: str, base: MwcnnConfig) -> MwcnnConfig:
    """Model config of an ablation variant, sharing depth and widths with ``base``.

    Args:
        variant (str): One of haar, db2, hd, sum_pool, dilated_chain.
        base (MwcnnConfig): Levels, widths, block depth and channels to keep.

    Returns:
        MwcnnConfig: The variant's configuration.
    """
    if variant not in SUPPORTED_ABLATION_VARIANTS:
        raise ValueError(f"Unsupported ablation variant: {variant}")
    common = {
        "levels": base.levels,
        "block_depth": base.block_depth,
        "widths": base.widths,
        "global_residual": base.global_residual,
        "in_channels": base.in_channels,
    }
    match variant:
        case "haar" | "db2":
            return MwcnnConfig(bank=variant, downsampler="dwt", **common)
        case "hd":
            return MwcnnConfig(
                bank="haar",
                bank_expand="db2",
                allow_mixed_banks=True,
                downsampler="dwt",
                **common,
            )
        case _:
            return MwcnnConfig(downsampler=variant, **common)


def receptive_extent(g: ModelGraph) -> tuple[tuple[int, int], int]:
    """Receptive-field extent and hole count of the probe's center pixel."""
    side = RF_PROBE_SIZE
    mask = receptive_field_mask(g, (side // 2, side // 2), size=(side, side))
    summary = mask_summary(mask)
    return summary.extent, summary.holes


def train_variant(
    variant: str,
    model_cfg: MwcnnConfig,
    train_cfg: TrainConfig,
    corpus: Corpus,
    val: Corpus,
) -> AblationResult:
    """Build, train and score one variant from the shared seed."""
    start = time.perf_counter()
    g = build(model_cfg, new_rng(train_cfg.seed))
    log = Trainer(g, corpus, train_cfg, val).run()
    extent, holes = receptive_extent(g)
    result = AblationResult(
        variant=variant,
        levels=model_cfg.levels,
        conv_layers=len(g.conv_layers),
        params=param_count(g),
        rf_extent=extent,
        rf_holes=holes,
        noisy_psnr=log.noisy_psnr,
        val_psnr=log.final_val_psnr,
        seconds=time.perf_counter() - start,
    )
    logging.info(
        "%s: %.2f dB (noisy %.2f dB) in %.1f s",
        variant,
        result.val_psnr,
        result.noisy_psnr,
        result.seconds,
    )
    return result


def run_ablation(
    variants: list[str],
    base: MwcnnConfig,
    train_cfg: TrainConfig,
    corpus: Corpus,
    val: Corpus,
) -> list[AblationResult]:
    """Train every variant with identical data, seed and step budget."""
    return [
        train_variant(v, variant_config(v, base), train_cfg, corpus, val)
        for v in variants
    ]


def run_level_sweep(
    levels: list[int],
    base: MwcnnConfig,
    train_cfg: TrainConfig,
    corpus: Corpus,
    val: Corpus,
) -> list[AblationResult]:
    """Train the wavelet network at each level count under one budget.

    Widths follow the default doubling rule for each level count; the patch
    size must be divisible by 2^max(levels).
    """
    results = []
    for count in levels:
        cfg = replace(base, levels=count, widths=None)
        results.append(
            train_variant(f"{cfg.bank}-L{count}", cfg, train_cfg, corpus, val)
        )
    return results
