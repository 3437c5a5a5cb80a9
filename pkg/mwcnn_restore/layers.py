# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Differentiable layers with explicit reverse mode.

Every forward function optionally records what its backward needs on a
``Tape``; backward functions consume those records in reverse order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .constants import ADAM_BETA1, ADAM_BETA2, ADAM_EPS, BN_EPS, BN_MOMENTUM
from .errors import ShapeError, TapeError
from .tensor import DTYPE, Tensor4, randn

Mode = Literal["train", "eval"]


@dataclass
class TapeRecord:
    """Saved state of one forward call."""

    layer_id: str
    kind: str
    saved: dict[str, Any] = field(default_factory=dict)


class Tape:
    """Ordered forward records; backward pops them last-in first-out."""

    def __init__(self) -> None:
        self._records: list[TapeRecord] = []

    def __len__(self) -> int:
        return len(self._records)

    def push(self, record: TapeRecord) -> None:
        """Append a record produced by a forward call."""
        self._records.append(record)

    def pop(self, layer_id: str | None = None) -> TapeRecord:
        """Remove and return the most recent record.

        Args:
            layer_id (str | None): If given, the record must belong to this layer.

        Returns:
            TapeRecord: The most recent record.
        """
        if not self._records:
            raise TapeError(f"Tape underflow (expected record for {layer_id!r})")
        record = self._records.pop()
        if layer_id is not None and record.layer_id != layer_id:
            raise TapeError(
                f"Tape mismatch: expected {layer_id!r}, found {record.layer_id!r}"
            )
        return record


def _record(tape: Tape | None, layer_id: str, kind: str, **saved: Any) -> None:
    if tape is not None:
        tape.push(TapeRecord(layer_id=layer_id, kind=kind, saved=saved))


def _expect(record: TapeRecord, kind: str) -> None:
    if record.kind != kind:
        raise TapeError(f"Record {record.layer_id!r} is {record.kind}, not {kind}")


# Convolution


@dataclass
class ConvParams:
    """Weights of one 2-D convolution.

    ``weight`` has shape (out_c, in_c, kh, kw); zero padding of ``pad``
    pixels on every side. ``pad`` defaults to ``dilation`` so a 3x3 kernel
    keeps the spatial size.
    """

    weight: Tensor4
    bias: Any
    dilation: int = 1
    pad: int | None = None

    def __post_init__(self) -> None:
        if self.dilation < 1:
            raise ValueError(f"Dilation must be positive, got {self.dilation}")
        if self.weight.ndim != 4:
            raise ShapeError(f"Conv weight must be 4-D, got {self.weight.shape}")
        if self.bias.shape != (self.weight.shape[0],):
            raise ShapeError(
                f"Conv bias shape {self.bias.shape} does not match "
                f"{self.weight.shape[0]} output channels"
            )
        if self.pad is None:
            self.pad = self.dilation


def _conv_windows(x: Tensor4, kh: int, kw: int, dilation: int, pad: int) -> Any:
    """View of shape (n, c, out_h, out_w, kh, kw) over the zero-padded input."""
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    span_h = dilation * (kh - 1) + 1
    span_w = dilation * (kw - 1) + 1
    if xp.shape[2] < span_h or xp.shape[3] < span_w:
        raise ShapeError(f"Input {x.shape[2:]} too small for dilated kernel")
    win = sliding_window_view(xp, (span_h, span_w), axis=(2, 3))
    return win[..., ::dilation, ::dilation]


def conv2d_fwd(
    x: Tensor4, p: ConvParams, tape: Tape | None = None, layer_id: str = "conv"
) -> Tensor4:
    """Dilated 2-D correlation plus bias.

    ``out[o, i, j] = bias[o] + sum_{c,s,t} w[o, c, s, t] *
    xpad[c, i + d*s, j + d*t]`` with ``xpad`` zero-padded by ``pad``.
    """
    if x.shape[1] != p.weight.shape[1]:
        raise ShapeError(
            f"Conv {layer_id!r} expects {p.weight.shape[1]} channels, got {x.shape[1]}"
        )
    pad = p.dilation if p.pad is None else p.pad
    _, _, kh, kw = p.weight.shape
    win = _conv_windows(x, kh, kw, p.dilation, pad)
    out = np.tensordot(win, p.weight, axes=([1, 4, 5], [1, 2, 3]))
    out = np.ascontiguousarray(out.transpose(0, 3, 1, 2))
    out += p.bias.reshape(1, -1, 1, 1)
    _record(tape, layer_id, "conv", x=x, weight=p.weight, dilation=p.dilation, pad=pad)
    return out


def conv2d_input_grad(
    grad_out: Tensor4,
    weight: Tensor4,
    dilation: int,
    pad: int,
    in_shape: tuple[int, ...],
) -> Tensor4:
    """Gradient of a convolution with respect to its input."""
    n, c, h, w = in_shape
    _, _, kh, kw = weight.shape
    out_h, out_w = grad_out.shape[2], grad_out.shape[3]
    gxp = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=grad_out.dtype)
    for s in range(kh):
        for t in range(kw):
            contrib = np.tensordot(grad_out, weight[:, :, s, t], axes=([1], [0]))
            gxp[
                :,
                :,
                s * dilation : s * dilation + out_h,
                t * dilation : t * dilation + out_w,
            ] += contrib.transpose(0, 3, 1, 2)
    return np.ascontiguousarray(gxp[:, :, pad : pad + h, pad : pad + w])


def conv2d_bwd(
    grad_out: Tensor4, record: TapeRecord
) -> tuple[Tensor4, Tensor4, Any]:
    """Reverse mode of ``conv2d_fwd``.

    Returns:
        tuple: (grad_x, grad_weight, grad_bias).
    """
    _expect(record, "conv")
    x, weight = record.saved["x"], record.saved["weight"]
    dilation, pad = record.saved["dilation"], record.saved["pad"]
    _, _, kh, kw = weight.shape
    win = _conv_windows(x, kh, kw, dilation, pad)
    grad_w = np.tensordot(grad_out, win, axes=([0, 2, 3], [0, 2, 3]))
    grad_b = grad_out.sum(axis=(0, 2, 3))
    grad_x = conv2d_input_grad(grad_out, weight, dilation, pad, x.shape)
    return grad_x, np.ascontiguousarray(grad_w), grad_b


# Batch normalization


@dataclass
class BNParams:
    """Per-channel affine parameters and running statistics."""

    gamma: Any
    beta: Any
    running_mean: Any
    running_var: Any
    momentum: float = BN_MOMENTUM
    eps: float = BN_EPS

    @classmethod
    def fresh(cls, channels: int, dtype: Any = DTYPE) -> BNParams:
        """gamma=1, beta=0, running statistics (0, 1)."""
        return cls(
            gamma=np.ones(channels, dtype=dtype),
            beta=np.zeros(channels, dtype=dtype),
            running_mean=np.zeros(channels, dtype=dtype),
            running_var=np.ones(channels, dtype=dtype),
        )


def _per_channel(v: Any) -> Any:
    return v.reshape(1, -1, 1, 1)


def bn_fwd(
    x: Tensor4,
    p: BNParams,
    mode: Mode = "train",
    tape: Tape | None = None,
    layer_id: str = "bn",
) -> Tensor4:
    """Batch normalization over (n, h, w) per channel.

    Train mode normalizes by batch statistics and updates the running
    statistics in place; eval mode uses the running statistics.
    """
    if x.shape[1] != p.gamma.shape[0]:
        raise ShapeError(
            f"BN {layer_id!r} expects {p.gamma.shape[0]} channels, got {x.shape[1]}"
        )
    dtype = x.dtype.type
    if mode == "train":
        count = x.shape[0] * x.shape[2] * x.shape[3]
        if count < 2:
            raise ShapeError("Batch statistics need at least two values per channel")
        mean = x.mean(axis=(0, 2, 3))
        var = x.var(axis=(0, 2, 3))
        m = dtype(p.momentum)
        p.running_mean[...] = (1 - m) * p.running_mean + m * mean
        p.running_var[...] = (1 - m) * p.running_var + m * var * dtype(
            count / (count - 1)
        )
    else:
        mean, var = p.running_mean, p.running_var
    inv_std = (1.0 / np.sqrt(var + dtype(p.eps))).astype(x.dtype)
    x_hat = (x - _per_channel(mean)) * _per_channel(inv_std)
    out = x_hat * _per_channel(p.gamma) + _per_channel(p.beta)
    _record(tape, layer_id, "bn", x_hat=x_hat, inv_std=inv_std, gamma=p.gamma, mode=mode)
    return out


def bn_bwd(grad_out: Tensor4, record: TapeRecord) -> tuple[Tensor4, Any, Any]:
    """Reverse mode of ``bn_fwd``.

    Returns:
        tuple: (grad_x, grad_gamma, grad_beta).
    """
    _expect(record, "bn")
    x_hat, inv_std = record.saved["x_hat"], record.saved["inv_std"]
    gamma = record.saved["gamma"]
    grad_beta = grad_out.sum(axis=(0, 2, 3))
    grad_gamma = (grad_out * x_hat).sum(axis=(0, 2, 3))
    if record.saved["mode"] == "eval":
        grad_x = grad_out * _per_channel(gamma * inv_std)
        return grad_x, grad_gamma, grad_beta
    count = grad_out.shape[0] * grad_out.shape[2] * grad_out.shape[3]
    scale = _per_channel(gamma * inv_std / grad_out.dtype.type(count))
    grad_x = scale * (
        grad_out * grad_out.dtype.type(count)
        - _per_channel(grad_beta)
        - x_hat * _per_channel(grad_gamma)
    )
    return grad_x, grad_gamma, grad_beta


# ReLU


def relu_fwd(x: Tensor4, tape: Tape | None = None, layer_id: str = "relu") -> Tensor4:
    """max(0, x)."""
    _record(tape, layer_id, "relu", x=x)
    return np.maximum(x, x.dtype.type(0))


def relu_bwd(grad_out: Tensor4, record: TapeRecord) -> Tensor4:
    """Mask the gradient by x > 0; the subgradient at 0 is 0."""
    _expect(record, "relu")
    return np.where(record.saved["x"] > 0, grad_out, grad_out.dtype.type(0))


# Pooling


def sum_pool2(x: Tensor4) -> Tensor4:
    """Non-overlapping 2x2 block sums.

    The accumulation order matches ``wavelet.dwt2`` so the result equals the
    Haar LL subband bitwise.
    """
    h, w = x.shape[2], x.shape[3]
    if h % 2 or w % 2:
        raise ShapeError(f"Spatial dims must be even, got {h}x{w}")
    out = np.zeros((x.shape[0], x.shape[1], h // 2, w // 2), dtype=x.dtype)
    for a in range(2):
        for b in range(2):
            out += x[:, :, a::2, b::2]
    return out


def sum_pool2_adjoint(g: Tensor4) -> Tensor4:
    """Transpose of ``sum_pool2``: copy each value over its 2x2 block."""
    return np.repeat(np.repeat(g, 2, axis=2), 2, axis=3)


def unpool2(x: Tensor4) -> Tensor4:
    """Right inverse of ``sum_pool2`` (each value spread over its block / 4)."""
    return sum_pool2_adjoint(x) * x.dtype.type(0.25)


def unpool2_adjoint(g: Tensor4) -> Tensor4:
    """Transpose of ``unpool2``: block sums / 4."""
    return sum_pool2(g) * g.dtype.type(0.25)


# Initialization and optimizer


def he_init(
    rng: np.random.Generator, shape: tuple[int, int, int, int], dtype: Any = DTYPE
) -> Tensor4:
    """Normal(0, sqrt(2 / fan_in)) weights with fan_in = in_c * kh * kw."""
    fan_in = shape[1] * shape[2] * shape[3]
    if fan_in <= 0:
        raise ValueError(f"Zero fan-in for weight shape {shape}")
    return randn(rng, *shape, std=math.sqrt(2.0 / fan_in), dtype=dtype)


@dataclass
class AdamState:
    """First/second moment accumulators keyed by parameter name."""

    m: dict[str, Any]
    v: dict[str, Any]
    t: int = 0
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS

    @classmethod
    def for_params(cls, params: dict[str, Any]) -> AdamState:
        """Zero accumulators mirroring ``params``."""
        return cls(
            m={k: np.zeros_like(v) for k, v in params.items()},
            v={k: np.zeros_like(v) for k, v in params.items()},
        )


def adam_step(
    params: dict[str, Any], grads: dict[str, Any], state: AdamState, lr: float
) -> None:
    """One bias-corrected ADAM update, applied to ``params`` in place."""
    if params.keys() != grads.keys() or params.keys() != state.m.keys():
        raise ShapeError("Parameter, gradient and optimizer state names differ")
    state.t += 1
    correction1 = 1.0 - state.beta1**state.t
    correction2 = 1.0 - state.beta2**state.t
    for name, param in params.items():
        grad = grads[name]
        if grad.shape != param.shape:
            raise ShapeError(f"Gradient shape mismatch for {name!r}")
        dtype = param.dtype.type
        m, v = state.m[name], state.v[name]
        m *= dtype(state.beta1)
        m += dtype(1.0 - state.beta1) * grad
        v *= dtype(state.beta2)
        v += dtype(1.0 - state.beta2) * grad * grad
        m_hat = m / dtype(correction1)
        v_hat = v / dtype(correction2)
        param -= dtype(lr) * m_hat / (np.sqrt(v_hat) + dtype(state.eps))
