# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Netpbm gray and color images (P2, P3, P5, P6) with maxval 255."""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt

from .errors import PnmError
from .tensor import DTYPE, Tensor4

PNM_EXTENSIONS = (".pgm", ".ppm", ".pnm")

_MAGIC_INFO = {
    # magic: (channels, binary)
    b"P2": (1, False),
    b"P3": (3, False),
    b"P5": (1, True),
    b"P6": (3, True),
}

_BT601 = np.array([0.299, 0.587, 0.114])

_TOKEN = re.compile(rb"#[^\n]*|\S+")


@dataclass(frozen=True, eq=False)
class ImageU8:
    """8-bit image in row-major layout.

    ``samples`` has shape (h, w) for gray images and (h, w, 3) for color.
    """

    samples: npt.NDArray[np.uint8]

    def __post_init__(self) -> None:
        s = self.samples
        if s.dtype != np.uint8:
            raise PnmError(f"Samples must be uint8, got {s.dtype}")
        if s.ndim == 3 and s.shape[2] == 3:
            pass
        elif s.ndim != 2:
            raise PnmError(f"Unsupported sample layout {s.shape}")
        if min(s.shape[:2]) < 1:
            raise PnmError(f"Empty image {s.shape}")

    @property
    def h(self) -> int:
        return int(self.samples.shape[0])

    @property
    def w(self) -> int:
        return int(self.samples.shape[1])

    @property
    def channels(self) -> int:
        return 1 if self.samples.ndim == 2 else 3


def luma(img: ImageU8) -> ImageU8:
    """BT.601 luma of a color image; gray images are returned unchanged."""
    if img.channels == 1:
        return img
    y = img.samples.astype(np.float64) @ _BT601
    return ImageU8(np.clip(np.rint(y), 0, 255).astype(np.uint8))


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """First ``count`` header tokens (comments skipped) and the end offset."""
    tokens: list[bytes] = []
    pos = 0
    for match in _TOKEN.finditer(data):
        if match.group().startswith(b"#"):
            continue
        tokens.append(match.group())
        pos = match.end()
        if len(tokens) == count:
            return tokens, pos
    raise PnmError("Malformed header: missing fields")


def _parse_int(token: bytes, what: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise PnmError(f"Malformed header: bad {what} {token!r}") from None
    if value < 1:
        raise PnmError(f"Malformed header: {what} must be positive, got {value}")
    return value


def decode_pnm(data: bytes) -> ImageU8:
    """Decode the bytes of a PNM file."""
    tokens, pos = _header_tokens(data, 4)
    magic = tokens[0]
    if magic not in _MAGIC_INFO:
        raise PnmError(f"Unsupported PNM magic {magic!r}")
    channels, binary = _MAGIC_INFO[magic]
    w = _parse_int(tokens[1], "width")
    h = _parse_int(tokens[2], "height")
    maxval = _parse_int(tokens[3], "maxval")
    if maxval != 255:
        raise PnmError(f"Only maxval 255 is supported, got {maxval}")
    count = h * w * channels

    if binary:
        # exactly one whitespace byte separates the header from the raster
        payload = data[pos + 1 : pos + 1 + count]
        if len(payload) < count:
            raise PnmError(f"Truncated payload: {len(payload)} of {count} bytes")
        flat = np.frombuffer(payload, dtype=np.uint8)
    else:
        values = [t for t in _TOKEN.findall(data[pos:]) if not t.startswith(b"#")]
        if len(values) < count:
            raise PnmError(f"Truncated payload: {len(values)} of {count} samples")
        try:
            ints = np.array([int(v) for v in values[:count]], dtype=np.int64)
        except ValueError as exc:
            raise PnmError(f"Malformed sample: {exc}") from exc
        if ints.min() < 0 or ints.max() > 255:
            raise PnmError("Sample outside 0..255")
        flat = ints.astype(np.uint8)

    shape = (h, w) if channels == 1 else (h, w, 3)
    return ImageU8(flat.reshape(shape).copy())


def encode_pnm(img: ImageU8, binary: bool = True) -> bytes:
    """Encode an image as P5/P6 (``binary``) or P2/P3."""
    if img.channels == 1:
        magic = "P5" if binary else "P2"
    else:
        magic = "P6" if binary else "P3"
    header = f"{magic}\n{img.w} {img.h}\n255\n".encode("ascii")
    if binary:
        return header + np.ascontiguousarray(img.samples).tobytes()
    rows = img.samples.reshape(img.h, -1)
    body = "".join(" ".join(str(v) for v in row) + "\n" for row in rows)
    return header + body.encode("ascii")


def read_pnm(path: str, gray: bool = False) -> ImageU8:
    """Read a PNM file; ``gray`` converts color images to BT.601 luma.

    Args:
        path (str): File to read.
        gray (bool): Convert color input to luma.

    Returns:
        ImageU8: The decoded image.
    """
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as exc:
        raise PnmError(f"Could not read {path}: {exc}") from exc
    try:
        img = decode_pnm(data)
    except PnmError as exc:
        raise PnmError(f"{path}: {exc}") from exc
    logging.debug("Read %s: %dx%d, %d channel(s)", path, img.w, img.h, img.channels)
    return luma(img) if gray else img


def write_pnm(img: ImageU8, path: str, binary: bool = True) -> None:
    """Write ``img`` to ``path`` (P5/P6 by default)."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "wb") as f:
        f.write(encode_pnm(img, binary))


def is_pnm_path(path: str) -> bool:
    """True for file names with a Netpbm extension."""
    return path.lower().endswith(PNM_EXTENSIONS)


def image_to_tensor(img: ImageU8, dtype: Any = DTYPE) -> Tensor4:
    """Gray image as a (1, 1, h, w) tensor on the 0-255 scale."""
    gray = luma(img).samples
    return gray.astype(dtype)[np.newaxis, np.newaxis]


def tensor_to_image(t: Tensor4) -> ImageU8:
    """Round and clip the first slab of ``t`` to an 8-bit gray image."""
    plane = np.asarray(t)[0, 0]
    return ImageU8(np.clip(np.rint(plane), 0, 255).astype(np.uint8))


def list_pnm_files(directory: str) -> list[str]:
    """Names of the Netpbm files in ``directory``, sorted."""
    try:
        names = os.listdir(directory)
    except OSError as exc:
        raise PnmError(f"Could not list {directory}: {exc}") from exc
    return sorted(n for n in names if is_pnm_path(n))
