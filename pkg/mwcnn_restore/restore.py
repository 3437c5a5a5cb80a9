# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Apply a trained network to images and score it on clean references."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import get_worker_count
from .metrics import psnr, ssim
from .model import ModelGraph, forward
from .pnm import ImageU8, image_to_tensor, list_pnm_files, read_pnm, tensor_to_image
from .tensor import DTYPE, Tensor4, new_rng
from .train import add_gaussian_noise, border_crop


def pad_to_multiple(x: Tensor4, divisor: int) -> Tensor4:
    """Extend the bottom and right edges symmetrically to multiples of ``divisor``."""
    h, w = x.shape[-2:]
    pad_h = -h % divisor
    pad_w = -w % divisor
    if not pad_h and not pad_w:
        return x
    return np.pad(x, ((0, 0), (0, 0), (0, pad_h), (0, pad_w)), mode="symmetric")


def denoise_tensor(g: ModelGraph, y: Tensor4) -> Tensor4:
    """Eval-mode forward pass on an input of any spatial size.

    The input is padded to the network's divisor and the output cropped back.
    """
    h, w = y.shape[-2:]
    padded = pad_to_multiple(np.asarray(y, dtype=DTYPE), g.divisor)
    if padded.shape != y.shape:
        logging.debug("Padded %dx%d input to %s", h, w, padded.shape[-2:])
    return forward(g, padded, mode="eval")[..., :h, :w]


def denoise_image(g: ModelGraph, img: ImageU8) -> ImageU8:
    """Restore an 8-bit image; color input is reduced to luma first."""
    if img.channels != 1:
        logging.warning("Color input converted to luma before restoration")
    return tensor_to_image(denoise_tensor(g, image_to_tensor(img)))


@dataclass(frozen=True)
class EvalRow:
    """Scores of one restored image."""

    name: str
    psnr: float
    ssim: float
    noisy_psnr: float


def evaluate_image(
    g: ModelGraph,
    name: str,
    clean: ImageU8,
    sigma: float,
    rng: np.random.Generator,
) -> EvalRow:
    """Add noise to ``clean``, restore it and score the 8-bit result.

    Scores exclude a border of 2^levels pixels on every side.
    """
    border = g.divisor
    reference = image_to_tensor(clean)
    noisy = add_gaussian_noise(reference, sigma, rng)
    restored = image_to_tensor(tensor_to_image(denoise_tensor(g, noisy)))
    ref = border_crop(reference, border)[0, 0]
    out = border_crop(restored, border)[0, 0]
    return EvalRow(
        name=name,
        psnr=psnr(out, ref),
        ssim=ssim(out, ref),
        noisy_psnr=psnr(border_crop(noisy, border)[0, 0], ref),
    )


def evaluate_directory(
    g: ModelGraph,
    clean_dir: str,
    sigma: float,
    seed: int = 0,
    workers: int | None = None,
) -> list[EvalRow]:
    """Score ``g`` on every PNM image of ``clean_dir``.

    Image ``i`` (in sorted name order) draws its noise from the stream
    ``(seed, i)``, so the result does not depend on the worker count.

    Args:
        g (ModelGraph): Trained network.
        clean_dir (str): Directory of clean reference images.
        sigma (float): Noise level on the 0-255 scale.
        seed (int): Noise seed.
        workers (int | None): Thread count; defaults to ``MWCNN_THREADS``.

    Returns:
        list[EvalRow]: One row per image, sorted by file name.
    """
    names = list_pnm_files(clean_dir)
    if not names:
        raise ValueError(f"No PNM images found in {clean_dir}")
    workers = workers or get_worker_count()

    def score(index: int) -> EvalRow:
        name = names[index]
        clean = read_pnm(os.path.join(clean_dir, name), gray=True)
        row = evaluate_image(g, name, clean, sigma, new_rng((seed, index)))
        logging.debug("%s: %.2f dB (noisy %.2f dB)", name, row.psnr, row.noisy_psnr)
        return row

    with ThreadPoolExecutor(max_workers=min(workers, len(names))) as pool:
        rows = list(pool.map(score, range(len(names))))
    logging.info("Evaluated %d images with %d worker(s)", len(rows), workers)
    return sorted(rows, key=lambda r: r.name)
