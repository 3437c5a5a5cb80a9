# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Exceptions raised by the library.

The CLI translates these into exit codes; library code never exits.
"""

from __future__ import annotations


class MwcnnError(Exception):
    """Base class for all errors raised by mwcnn_restore."""


class ShapeError(MwcnnError, ValueError):
    """Shape, divisibility or channel-count violation."""


class NonFiniteError(MwcnnError, ArithmeticError):
    """A public operation produced NaN or Inf."""


class TapeError(MwcnnError, RuntimeError):
    """Tape underflow, record mismatch, or missing tape."""


class ConfigError(MwcnnError, ValueError):
    """Invalid configuration value or unknown configuration key."""


class PnmError(MwcnnError, ValueError):
    """Malformed or unsupported PNM file."""


class CheckpointError(MwcnnError, ValueError):
    """Checkpoint could not be written or read."""


class ChecksumError(CheckpointError):
    """Checkpoint CRC-32 does not match its content."""


class IncompatibleCheckpointError(CheckpointError):
    """Checkpoint was written for a different model configuration."""


class TrainingDivergedError(NonFiniteError):
    """Training produced a non-finite loss."""

    def __init__(self, step: int, lr: float, grad_norm: float) -> None:
        super().__init__(
            f"Non-finite loss at step {step} (lr={lr:.6g}, grad_norm={grad_norm:.6g})"
        )
        self.step = step
        self.lr = lr
        self.grad_norm = grad_norm
