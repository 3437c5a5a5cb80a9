# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Export functions for usage as library."""

__all__ = [
    "Checkpoint",
    "MwcnnConfig",
    "ModelGraph",
    "SelfCheckSuite",
    "TrainConfig",
    "Trainer",
    "backward",
    "build",
    "checkpoint_load",
    "checkpoint_save",
    "dwt2",
    "forward",
    "get_bank",
    "iwt2",
    "preset_config",
    "psnr",
    "receptive_field_mask",
    "ssim",
    "wpt_decompose",
    "wpt_reconstruct",
]

from .checkpoint import Checkpoint, checkpoint_load, checkpoint_save
from .config import MwcnnConfig, TrainConfig, preset_config
from .metrics import psnr, ssim
from .model import ModelGraph, backward, build, forward
from .receptive_field import receptive_field_mask
from .selfcheck import SelfCheckSuite
from .train import Trainer
from .wavelet import dwt2, get_bank, iwt2, wpt_decompose, wpt_reconstruct

try:
    from ._version import version as __version__
except ImportError:
    __version__ = "unknown"
