# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Dense 4-D tensors in (n, c, h, w) row-major layout.

A Tensor4 is a C-contiguous ``numpy.ndarray`` with exactly four axes, every
dimension at least 1 and finite entries. Model state and training use
float32; the oracle module works in float64. All functions here preserve the
dtype of their inputs.

Random numbers come from ``numpy.random.Generator`` backed by the PCG64 bit
generator, so equal seeds give bitwise-equal sample streams.
"""

from __future__ import annotations

from typing import Any, Literal, Sequence, TypeAlias

import numpy as np
import numpy.typing as npt

from .errors import NonFiniteError, ShapeError

Tensor4: TypeAlias = npt.NDArray[np.floating[Any]]

DTYPE = np.float32

EwiseOp = Literal["add", "sub", "mul"]

_EWISE_OPS = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
}


def new_rng(seed: int | Sequence[int]) -> np.random.Generator:
    """Create a deterministic generator (PCG64).

    ``seed`` is a 64-bit integer or a sequence of them, e.g. ``(seed, index)``
    for one independent stream per work item.
    """
    return np.random.Generator(np.random.PCG64(seed))


def ensure_finite(x: npt.NDArray[Any], what: str = "tensor") -> npt.NDArray[Any]:
    """Raise NonFiniteError if ``x`` holds NaN or Inf; return ``x`` otherwise."""
    if not np.all(np.isfinite(x)):
        raise NonFiniteError(f"{what} contains non-finite values")
    return x


def check_tensor4(x: npt.NDArray[Any], what: str = "tensor") -> npt.NDArray[Any]:
    """Validate the Tensor4 invariants on ``x`` and return it unchanged."""
    if not isinstance(x, np.ndarray) or x.ndim != 4:
        raise ShapeError(f"{what} must be a 4-D array (n, c, h, w)")
    if min(x.shape) < 1:
        raise ShapeError(f"{what} has an empty dimension: {x.shape}")
    return ensure_finite(x, what)


def _check_dims(n: int, c: int, h: int, w: int) -> tuple[int, int, int, int]:
    dims = (int(n), int(c), int(h), int(w))
    if min(dims) < 1:
        raise ShapeError(f"All dimensions must be >= 1, got {dims}")
    size = 1
    for d in dims:
        size *= d
    if size > np.iinfo(np.intp).max:
        raise ShapeError(f"Index space overflow for shape {dims}")
    return dims


def zeros(n: int, c: int, h: int, w: int, dtype: Any = DTYPE) -> Tensor4:
    """All-zero tensor of shape (n, c, h, w)."""
    return np.zeros(_check_dims(n, c, h, w), dtype=dtype)


def ewise(op: EwiseOp, a: Tensor4, b: Tensor4) -> Tensor4:
    """Elementwise ``add``, ``sub`` or ``mul`` of two same-shape tensors."""
    if op not in _EWISE_OPS:
        raise ValueError(f"Unsupported elementwise operation: {op}")
    if a.shape != b.shape:
        raise ShapeError(f"Shape mismatch: {a.shape} vs {b.shape}")
    out: Tensor4 = _EWISE_OPS[op](a, b)
    return ensure_finite(out, f"ewise {op} result")


def randn(
    rng: np.random.Generator,
    n: int,
    c: int,
    h: int,
    w: int,
    std: float,
    dtype: Any = DTYPE,
) -> Tensor4:
    """I.i.d. normal samples with mean 0 and standard deviation ``std``."""
    if not std > 0:
        raise ValueError(f"Standard deviation must be positive, got {std}")
    shape = _check_dims(n, c, h, w)
    samples = rng.standard_normal(shape, dtype=np.dtype(dtype).type)
    return samples * np.asarray(std, dtype=dtype)
