# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Brute-force float64 references for the fast paths.

Everything here is written as literal loops over the defining sums and is
meant for tiny inputs only; a hard size guard rejects anything larger.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
import numpy.typing as npt

from .constants import GRAD_CHECK_EXEMPT
from .errors import NonFiniteError, ShapeError
from .wavelet import SubbandQuad

F64 = npt.NDArray[np.float64]

MAX_ORACLE_SHAPE = (2, 4, 16, 16)
MAX_ORACLE_OUT_CHANNELS = 4
EQUIV_TOLERANCE = 1e-5

# Polyphase component of each output phase as a combination of the Haar
# subbands (x1, x2, x3, x4), before the division by 4.
PHASE_COMBINATIONS = {
    (0, 0): (1, -1, -1, 1),
    (0, 1): (1, -1, 1, -1),
    (1, 0): (1, 1, -1, -1),
    (1, 1): (1, 1, 1, 1),
}


def _guard(x: Any, out_channels: int = 0) -> None:
    if x.ndim != 4:
        raise ShapeError(f"Expected a 4-D tensor, got shape {x.shape}")
    if any(d > m for d, m in zip(x.shape, MAX_ORACLE_SHAPE)):
        raise ShapeError(f"Oracle input {x.shape} exceeds {MAX_ORACLE_SHAPE}")
    if out_channels > MAX_ORACLE_OUT_CHANNELS:
        raise ShapeError(f"Oracle supports at most {MAX_ORACLE_OUT_CHANNELS} filters")


def direct_conv2d_ref(
    x: Any, w: Any, b: Any = None, dilation: int = 1, pad: int | None = None
) -> F64:
    """Dilated correlation evaluated one output value at a time.

    ``out[n, o, i, j] = b[o] + sum_{c, s, t} w[o, c, s, t] *
    x[n, c, i + d*s - pad, j + d*t - pad]`` with out-of-range ``x`` read as 0.
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    _guard(x, w.shape[0])
    if w.shape[1] != x.shape[1]:
        raise ShapeError(f"Kernel expects {w.shape[1]} channels, got {x.shape[1]}")
    pad = dilation if pad is None else pad
    n, c, h, wd = x.shape
    oc, _, kh, kw = w.shape
    out_h = h + 2 * pad - dilation * (kh - 1)
    out_w = wd + 2 * pad - dilation * (kw - 1)
    if out_h < 1 or out_w < 1:
        raise ShapeError("Input too small for the dilated kernel")
    bias = np.zeros(oc) if b is None else np.asarray(b, dtype=np.float64)
    out = np.zeros((n, oc, out_h, out_w))
    for bi, o, i, j in itertools.product(range(n), range(oc), range(out_h), range(out_w)):
        acc = bias[o]
        for ch, s, t in itertools.product(range(c), range(kh), range(kw)):
            r = i + dilation * s - pad
            q = j + dilation * t - pad
            if 0 <= r < h and 0 <= q < wd:
                acc += w[o, ch, s, t] * x[bi, ch, r, q]
        out[bi, o, i, j] = acc
    return out


def dwt2_ref(x: Any) -> SubbandQuad:
    """Haar subbands from the four block formulas, one block at a time."""
    x = np.asarray(x, dtype=np.float64)
    _guard(x)
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise ShapeError(f"Spatial dims must be even, got {h}x{w}")
    bands = [np.zeros((n, c, h // 2, w // 2)) for _ in range(4)]
    for bi, ch, i, j in itertools.product(range(n), range(c), range(h // 2), range(w // 2)):
        tl = x[bi, ch, 2 * i, 2 * j]
        tr = x[bi, ch, 2 * i, 2 * j + 1]
        bl = x[bi, ch, 2 * i + 1, 2 * j]
        br = x[bi, ch, 2 * i + 1, 2 * j + 1]
        bands[0][bi, ch, i, j] = tl + tr + bl + br
        bands[1][bi, ch, i, j] = -tl - tr + bl + br
        bands[2][bi, ch, i, j] = -tl + tr - bl + br
        bands[3][bi, ch, i, j] = tl - tr - bl + br
    return SubbandQuad(*bands)


@dataclass
class PhaseResult:
    """Discrepancy between both sides of the identity at one output phase."""

    phase: tuple[int, int]
    max_abs_diff: float
    positions: int

    @property
    def passed(self) -> bool:
        return self.max_abs_diff < EQUIV_TOLERANCE


@dataclass
class EquivReport:
    """Per-phase results of ``dilated_equiv_check``."""

    phases: list[PhaseResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.phases) and all(p.passed for p in self.phases)

    @property
    def max_abs_diff(self) -> float:
        return max((p.max_abs_diff for p in self.phases), default=0.0)


def dilated_equiv_check(
    x: Any, k: Any = None, rng: np.random.Generator | None = None
) -> EquivReport:
    """Compare a dilation-2 conv with plain convs on combined Haar subbands.

    At output phase (p, q) the dilation-2 conv sampled at ``(2i+p, 2j+q)``
    must equal the dilation-1 conv of the matching subband combination
    divided by 4, e.g. ``(x1 - x2 - x3 + x4) / 4`` for phase (0, 0). A
    one-pixel border of the half-resolution grid is excluded.

    Args:
        x: Single-channel input of shape (n, 1, h, w), h and w even and >= 6.
        k: 3x3 kernel; drawn from ``rng`` when omitted.
        rng (np.random.Generator | None): Source for a missing kernel.

    Returns:
        EquivReport: Max abs discrepancy per phase.
    """
    x = np.asarray(x, dtype=np.float64)
    _guard(x)
    h, w = x.shape[2], x.shape[3]
    if h % 2 or w % 2:
        raise ShapeError(f"Spatial dims must be even, got {h}x{w}")
    if h < 6 or w < 6:
        raise ShapeError(f"{h}x{w} leaves no interior for a 3x3 kernel")
    if k is None:
        if rng is None:
            raise ValueError("Either a kernel or a generator is required")
        k = rng.standard_normal((3, 3))
    kernel = np.asarray(k, dtype=np.float64).reshape(1, 1, 3, 3)
    kernel = np.broadcast_to(kernel, (1, x.shape[1], 3, 3))

    dilated = direct_conv2d_ref(x, kernel, dilation=2, pad=2)
    bands = dwt2_ref(x).bands
    report = EquivReport()
    for (p, q), signs in PHASE_COMBINATIONS.items():
        combined = sum(s * band for s, band in zip(signs, bands)) / 4.0
        rhs = direct_conv2d_ref(combined, kernel, dilation=1, pad=1)
        lhs = dilated[:, :, p::2, q::2]
        inner = (slice(None), slice(None), slice(1, -1), slice(1, -1))
        diff = np.abs(lhs[inner] - rhs[inner])
        report.phases.append(
            PhaseResult(phase=(p, q), max_abs_diff=float(diff.max()), positions=diff.size)
        )
    return report


def finite_diff_grad(
    f: Callable[[F64], float], theta: Any, step: float = 1e-3
) -> F64:
    """Central-difference gradient of scalar ``f`` at ``theta``.

    The step for coordinate i is ``step * max(1, |theta_i|)``. ``theta`` is
    not modified.
    """
    if not step > 0:
        raise ValueError(f"Step must be positive, got {step}")
    base = np.array(theta, dtype=np.float64)
    grad = np.zeros_like(base)
    probe = base.copy()
    for idx in np.ndindex(base.shape):
        h = step * max(1.0, abs(base[idx]))
        probe[idx] = base[idx] + h
        f_plus = f(probe)
        probe[idx] = base[idx] - h
        f_minus = f(probe)
        probe[idx] = base[idx]
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NonFiniteError(f"Non-finite function value at index {idx}")
        grad[idx] = (f_plus - f_minus) / (2.0 * h)
    return grad


def max_relative_error(
    analytic: Any, numeric: Any, exempt: float = GRAD_CHECK_EXEMPT
) -> float:
    """Largest ``|a - n| / max(|a|, |n|)`` over elements not both below ``exempt``."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    if a.shape != n.shape:
        raise ShapeError(f"Shape mismatch: {a.shape} vs {n.shape}")
    scale = np.maximum(np.abs(a), np.abs(n))
    checked = scale >= exempt
    if not np.any(checked):
        return 0.0
    return float(np.max(np.abs(a - n)[checked] / scale[checked]))
