# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Gray image corpora for training and validation.

A corpus is a list of 2-D float32 arrays on the 0-255 scale, each with its
own size.
"""

from __future__ import annotations

import logging
import os

import numpy as np
import numpy.typing as npt

from .pnm import list_pnm_files, read_pnm

Image2D = npt.NDArray[np.float32]
Corpus = list[Image2D]


def _synthetic_image(size: int, rng: np.random.Generator) -> Image2D:
    """Piecewise-smooth scene: shaded background, flat shapes, one texture."""
    rows, cols = np.mgrid[0:size, 0:size].astype(np.float64) / size
    gx, gy = rng.uniform(-80.0, 80.0, size=2)
    img = 128.0 + gx * (cols - 0.5) + gy * (rows - 0.5)

    for _ in range(int(rng.integers(3, 7))):
        level = rng.uniform(-90.0, 90.0)
        if rng.random() < 0.5:
            top, left = rng.uniform(0.0, 0.8, size=2)
            height, width = rng.uniform(0.1, 0.5, size=2)
            inside = (
                (rows >= top)
                & (rows < top + height)
                & (cols >= left)
                & (cols < left + width)
            )
        else:
            cy, cx = rng.uniform(0.1, 0.9, size=2)
            radius = rng.uniform(0.08, 0.3)
            inside = (rows - cy) ** 2 + (cols - cx) ** 2 < radius**2
        img = np.where(inside, img + level, img)

    freq = rng.uniform(4.0, 12.0)
    angle = rng.uniform(0.0, np.pi)
    amplitude = rng.uniform(10.0, 30.0)
    phase = np.cos(angle) * cols + np.sin(angle) * rows
    band = (rows > 0.5) if rng.random() < 0.5 else (cols > 0.5)
    img = img + np.where(band, amplitude * np.sin(2 * np.pi * freq * phase), 0.0)
    return np.clip(np.rint(img), 0, 255).astype(np.float32)


def synthetic_corpus(count: int, size: int, rng: np.random.Generator) -> Corpus:
    """``count`` synthetic ``size`` x ``size`` gray images with integer values.

    Args:
        count (int): Number of images.
        size (int): Side length in pixels.
        rng (np.random.Generator): Source of the scene parameters.

    Returns:
        Corpus: The generated images.
    """
    if count < 1 or size < 1:
        raise ValueError(f"count and size must be positive, got {count}, {size}")
    return [_synthetic_image(size, rng) for _ in range(count)]


def load_corpus(directory: str) -> Corpus:
    """All PNM images of ``directory`` (sorted by name), converted to luma."""
    names = list_pnm_files(directory)
    if not names:
        raise ValueError(f"No PNM images found in {directory}")
    corpus = [
        read_pnm(os.path.join(directory, n), gray=True).samples.astype(np.float32)
        for n in names
    ]
    logging.info("Loaded %d images from %s", len(corpus), directory)
    return corpus


def split_corpus(corpus: Corpus, val_count: int) -> tuple[Corpus, Corpus]:
    """Hold out the last ``val_count`` images for validation."""
    if val_count < 0 or val_count >= len(corpus):
        raise ValueError(
            f"Cannot hold out {val_count} of {len(corpus)} images for validation"
        )
    if val_count == 0:
        return list(corpus), []
    return list(corpus[:-val_count]), list(corpus[-val_count:])
