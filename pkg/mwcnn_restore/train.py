# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Gaussian-denoising training harness.

Images stay on the 0-255 float scale end to end and noisy inputs are never
clipped. Every random draw of a run comes from generators seeded by
``TrainConfig.seed``, so equal seeds reproduce the loss trajectory bit for
bit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .checkpoint import Checkpoint
from .config import TrainConfig
from .corpus import Corpus
from .errors import ConfigError, NonFiniteError, ShapeError, TrainingDivergedError
from .layers import AdamState, Tape, adam_step
from .metrics import psnr
from .model import ModelGraph, backward, forward
from .tensor import DTYPE, Tensor4, new_rng, randn

LOG_HEADER = "# epoch step lr loss val_psnr"


def loss(pred: Tensor4, target: Tensor4) -> tuple[float, Tensor4]:
    """Mean-over-batch halved squared error and its gradient.

    ``L = 1/(2N) * sum_i ||pred_i - target_i||^2`` with ``N`` the batch size;
    the gradient is ``(pred - target) / N``.
    """
    if pred.shape != target.shape:
        raise ShapeError(f"Shape mismatch: {pred.shape} vs {target.shape}")
    n = pred.shape[0]
    diff = pred - target
    value = float(np.sum(np.square(diff, dtype=np.float64))) / (2.0 * n)
    return value, diff / diff.dtype.type(n)


def add_gaussian_noise(x: Tensor4, sigma: float, rng: np.random.Generator) -> Tensor4:
    """``x`` plus i.i.d. N(0, sigma^2) noise, unclipped."""
    if sigma < 0:
        raise ValueError(f"Noise level must be >= 0, got {sigma}")
    if sigma == 0:
        return x.copy()
    return x + randn(rng, *x.shape, std=sigma, dtype=x.dtype)


def sample_patches(
    corpus: Corpus, patch: int, count: int, rng: np.random.Generator
) -> Tensor4:
    """``count`` uniformly placed ``patch`` x ``patch`` crops as (count, 1, p, p).

    Each crop first draws an image index, then the top-left corner.
    """
    if not corpus:
        raise ValueError("Cannot sample patches from an empty corpus")
    for img in corpus:
        if img.shape[0] < patch or img.shape[1] < patch:
            raise ShapeError(
                f"Image {img.shape[0]}x{img.shape[1]} smaller than patch {patch}"
            )
    out = np.empty((count, 1, patch, patch), dtype=DTYPE)
    for i in range(count):
        img = corpus[int(rng.integers(len(corpus)))]
        top = int(rng.integers(img.shape[0] - patch + 1))
        left = int(rng.integers(img.shape[1] - patch + 1))
        out[i, 0] = img[top : top + patch, left : left + patch]
    return out


def dihedral(x: Tensor4, element: int) -> Tensor4:
    """Apply element 0..7 of the square's symmetry group to the spatial axes.

    Elements 0-3 rotate by ``element`` quarter turns, 4-7 additionally flip
    left-right. Element 0 is the identity.
    """
    if not 0 <= element < 8:
        raise ValueError(f"Dihedral element must be in 0..7, got {element}")
    turns = element % 4
    if turns % 2 and x.shape[2] != x.shape[3]:
        raise ShapeError(f"Quarter-turn rotation needs a square input, got {x.shape}")
    out = np.rot90(x, k=turns, axes=(2, 3))
    if element >= 4:
        out = out[:, :, :, ::-1]
    return np.ascontiguousarray(out)


def augment(x: Tensor4, rng: np.random.Generator) -> Tensor4:
    """Random rotation/flip, drawn uniformly per sample of the batch."""
    elements = rng.integers(8, size=x.shape[0])
    return np.concatenate(
        [dihedral(x[i : i + 1], int(e)) for i, e in enumerate(elements)], axis=0
    )


def lr_schedule(epoch: int, cfg: TrainConfig) -> float:
    """Exponential decay from ``lr_start`` to ``lr_end`` over the epochs.

    ``adam_alpha``, when set, replaces the schedule by a constant.
    """
    if cfg.adam_alpha is not None:
        return cfg.adam_alpha
    if not 0 <= epoch < max(cfg.epochs, 1):
        raise ValueError(f"Epoch {epoch} outside 0..{cfg.epochs - 1}")
    if cfg.epochs < 2:
        if cfg.lr_start != cfg.lr_end:
            raise ConfigError("A decaying schedule needs at least two epochs")
        return cfg.lr_start
    if epoch == cfg.epochs - 1:
        return cfg.lr_end
    return cfg.lr_start * (cfg.lr_end / cfg.lr_start) ** (epoch / (cfg.epochs - 1))


def border_crop(x: Tensor4, border: int) -> Tensor4:
    """Drop ``border`` pixels on every side when the image is large enough."""
    h, w = x.shape[-2:]
    if border <= 0 or h <= 2 * border or w <= 2 * border:
        return x
    return x[..., border : h - border, border : w - border]


def dyadic_crop(img: Any, divisor: int) -> Any:
    """Top-left crop of a 2-D image to multiples of ``divisor``."""
    h = img.shape[0] - img.shape[0] % divisor
    w = img.shape[1] - img.shape[1] % divisor
    if h < 1 or w < 1:
        raise ShapeError(f"Image {img.shape} smaller than {divisor}x{divisor}")
    return img[:h, :w]


@dataclass
class EpochRecord:
    """One line of the training log."""

    epoch: int
    step: int
    lr: float
    loss: float
    val_psnr: float

    def format_line(self) -> str:
        """``epoch step lr loss val_psnr`` separated by single spaces."""
        return (
            f"{self.epoch} {self.step} {self.lr:.6e} {self.loss:.6f} "
            f"{self.val_psnr:.4f}"
        )


@dataclass
class TrainingLog:
    """Per-epoch records plus every step loss of the run."""

    epochs: list[EpochRecord] = field(default_factory=list)
    step_losses: list[float] = field(default_factory=list)
    noisy_psnr: float = math.nan

    @property
    def final_val_psnr(self) -> float:
        return self.epochs[-1].val_psnr if self.epochs else math.nan

    def lines(self) -> list[str]:
        """Header line followed by one line per epoch."""
        return [LOG_HEADER] + [r.format_line() for r in self.epochs]

    def write(self, path: str) -> None:
        """Write the line-oriented log to ``path``."""
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(self.lines()) + "\n")


class Trainer:
    """Single-writer optimizer loop over one model.

    Args:
        g (ModelGraph): Model to train in place.
        corpus (Corpus): Training images.
        cfg (TrainConfig): Training protocol.
        val (Corpus | None): Held-out validation images.
        adam (AdamState | None): Optimizer state to resume from.
        epoch (int): First epoch to run.
        rng_state (dict | None): Data generator state to resume from.
    """

    # pylint: disable=too-many-arguments
    def __init__(
        self,
        g: ModelGraph,
        corpus: Corpus,
        cfg: TrainConfig,
        val: Corpus | None = None,
        *,
        adam: AdamState | None = None,
        epoch: int = 0,
        rng_state: dict[str, Any] | None = None,
    ) -> None:
        if g.cfg is not None:
            cfg.check_model(g.cfg)
        self.g = g
        self.corpus = corpus
        self.cfg = cfg
        self.val = val or []
        self.adam = adam if adam is not None else AdamState.for_params(g.params)
        self.epoch = epoch
        self.step = epoch * cfg.steps_per_epoch
        self.rng = new_rng(cfg.seed + 1)
        if rng_state is not None:
            self.rng.bit_generator.state = rng_state
        self.border = g.cfg.divisor if g.cfg is not None else 0

    @classmethod
    def from_checkpoint(
        cls,
        g: ModelGraph,
        ckpt: Checkpoint,
        corpus: Corpus,
        val: Corpus | None = None,
    ) -> Trainer:
        """Continue a run; ``g`` must already hold the checkpoint tensors."""
        return cls(
            g,
            corpus,
            ckpt.train_cfg,
            val,
            adam=ckpt.adam,
            epoch=ckpt.epoch,
            rng_state=ckpt.rng_state,
        )

    def checkpoint(self) -> Checkpoint:
        """Snapshot of the model and the complete training state."""
        return Checkpoint.from_model(
            self.g, self.cfg, adam=self.adam, epoch=self.epoch, rng=self.rng
        )

    def train_step(self, lr: float) -> float:
        """sample -> augment -> noise -> forward -> loss -> backward -> ADAM."""
        clean = sample_patches(self.corpus, self.cfg.patch, self.cfg.batch, self.rng)
        if self.cfg.augment:
            clean = augment(clean, self.rng)
        noisy = add_gaussian_noise(clean, self.cfg.sigma, self.rng)
        tape = Tape()
        try:
            pred = forward(self.g, noisy, mode="train", tape=tape)
        except NonFiniteError as exc:
            raise TrainingDivergedError(self.step, lr, math.nan) from exc
        value, grad_out = loss(pred, clean)
        grads = backward(self.g, tape, grad_out)
        grad_norm = math.sqrt(
            sum(
                float(np.sum(np.square(v, dtype=np.float64)))
                for v in grads.params.values()
            )
        )
        if not (math.isfinite(value) and math.isfinite(grad_norm)):
            raise TrainingDivergedError(self.step, lr, grad_norm)
        adam_step(self.g.params, grads.params, self.adam, lr)
        self.step += 1
        return value

    def validate(self) -> tuple[float, float]:
        """Mean (model, noisy-input) PSNR over the validation images.

        Noise is drawn from a generator reset on every call, so each epoch
        sees the same noisy inputs.
        """
        if not self.val:
            return math.nan, math.nan
        noise_rng = new_rng(self.cfg.seed + 2)
        divisor = self.g.divisor
        model_scores, noisy_scores = [], []
        for img in self.val:
            clean = dyadic_crop(img, divisor)[np.newaxis, np.newaxis].astype(DTYPE)
            noisy = add_gaussian_noise(clean, self.cfg.sigma, noise_rng)
            pred = forward(self.g, noisy, mode="eval")
            ref = border_crop(clean, self.border)
            model_scores.append(psnr(border_crop(pred, self.border), ref))
            noisy_scores.append(psnr(border_crop(noisy, self.border), ref))
        return float(np.mean(model_scores)), float(np.mean(noisy_scores))

    def run(self, log: TrainingLog | None = None) -> TrainingLog:
        """Run the remaining epochs and return the (extended) log."""
        log = log if log is not None else TrainingLog()
        if self.val and math.isnan(log.noisy_psnr):
            log.noisy_psnr = self.validate()[1]
        while self.epoch < self.cfg.epochs:
            lr = lr_schedule(self.epoch, self.cfg)
            losses = [self.train_step(lr) for _ in range(self.cfg.steps_per_epoch)]
            log.step_losses.extend(losses)
            val_psnr, _ = self.validate()
            record = EpochRecord(
                epoch=self.epoch,
                step=self.step,
                lr=lr,
                loss=float(np.mean(losses)),
                val_psnr=val_psnr,
            )
            log.epochs.append(record)
            logging.info("%s", record.format_line())
            self.epoch += 1
        return log


def train_epochs(
    g: ModelGraph, corpus: Corpus, cfg: TrainConfig, val: Corpus | None = None
) -> TrainingLog:
    """Train ``g`` in place for ``cfg.epochs`` epochs.

    Args:
        g (ModelGraph): Model to train.
        corpus (Corpus): Training images, each at least ``cfg.patch`` square.
        cfg (TrainConfig): Training protocol.
        val (Corpus | None): Held-out images for the per-epoch PSNR.

    Returns:
        TrainingLog: Per-epoch loss and validation PSNR.
    """
    return Trainer(g, corpus, cfg, val).run()
