# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Multi-level wavelet CNN graphs and their reverse mode.

A ``ModelGraph`` is a static list of nodes in topological order. Node
``input`` is implicit; every other node names the nodes it reads. Forward
evaluates the list front to back, backward walks it back to front and
accumulates gradients into the inputs of each node.

MWCNN topology for ``levels = L``::

    input -> down1 -> enc1 -> down2 -> enc2 ... downL -> encL
    encL -> decL -> upL (+ encL-1) -> decL-1 -> ... -> dec1 -> up1 (+ input)

The last conv of ``dec1`` has no BN/ReLU, predicts the residual subbands and
starts at zero, so an untrained model is the identity.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .config import MwcnnConfig
from .errors import ShapeError, TapeError
from .layers import (
    BNParams,
    ConvParams,
    Mode,
    Tape,
    TapeRecord,
    bn_bwd,
    bn_fwd,
    conv2d_bwd,
    conv2d_fwd,
    he_init,
    relu_bwd,
    relu_fwd,
    sum_pool2,
    sum_pool2_adjoint,
    unpool2,
    unpool2_adjoint,
)
from .tensor import DTYPE, Tensor4, check_tensor4, ensure_finite, ewise, new_rng
from .wavelet import SubbandQuad, dwt2, dwt2_adjoint, get_bank, iwt2, iwt2_adjoint

INPUT = "input"

_DOWN_OPS = {"dwt": ("dwt", "iwt", 4), "sum_pool": ("sum_pool", "unpool", 1)}


@dataclass(frozen=True)
class Node:
    """One operation of the graph.

    ``op`` is one of conv, bn, relu, dwt, iwt, sum_pool, unpool, add.
    Conv nodes own ``<name>.weight`` and ``<name>.bias``; BN nodes own
    ``<name>.gamma``/``<name>.beta`` and the buffers
    ``<name>.running_mean``/``<name>.running_var``.
    """

    name: str
    op: str
    inputs: tuple[str, ...]
    dilation: int = 1
    bank: str = ""


@dataclass
class ModelGraph:
    """Nodes, skip topology and the parameter store of one network."""

    cfg: MwcnnConfig | None = None
    nodes: list[Node] = field(default_factory=list)
    output: str = INPUT
    params: dict[str, Any] = field(default_factory=dict)
    buffers: dict[str, Any] = field(default_factory=dict)
    kind: str = "mwcnn"
    in_channels: int = 1

    @property
    def conv_layers(self) -> list[Node]:
        """Conv nodes in graph order."""
        return [n for n in self.nodes if n.op == "conv"]

    @property
    def divisor(self) -> int:
        """Input spatial dims must be multiples of this value."""
        if self.kind == "mwcnn" and self.cfg is not None:
            return self.cfg.divisor
        return 1


@dataclass
class Gradients:
    """Result of ``backward``."""

    params: dict[str, Any]
    input: Tensor4


class _GraphBuilder:
    """Appends nodes and initializes their parameters."""

    def __init__(self, rng: np.random.Generator, dtype: Any = DTYPE) -> None:
        self.rng = rng
        self.dtype = dtype
        self.nodes: list[Node] = []
        self.params: dict[str, Any] = {}
        self.buffers: dict[str, Any] = {}

    def add_node(self, node: Node) -> str:
        self.nodes.append(node)
        return node.name

    def conv(
        self,
        name: str,
        src: str,
        in_c: int,
        out_c: int,
        dilation: int = 1,
        zero: bool = False,
    ) -> str:
        shape = (out_c, in_c, 3, 3)
        if zero:
            self.params[f"{name}.weight"] = np.zeros(shape, dtype=self.dtype)
        else:
            self.params[f"{name}.weight"] = he_init(self.rng, shape, self.dtype)
        self.params[f"{name}.bias"] = np.zeros(out_c, dtype=self.dtype)
        return self.add_node(Node(name, "conv", (src,), dilation=dilation))

    def bn(self, name: str, src: str, channels: int) -> str:
        fresh = BNParams.fresh(channels, self.dtype)
        self.params[f"{name}.gamma"] = fresh.gamma
        self.params[f"{name}.beta"] = fresh.beta
        self.buffers[f"{name}.running_mean"] = fresh.running_mean
        self.buffers[f"{name}.running_var"] = fresh.running_var
        return self.add_node(Node(name, "bn", (src,)))

    def conv_bn_relu(
        self, prefix: str, src: str, in_c: int, out_c: int, dilation: int = 1
    ) -> str:
        x = self.conv(f"{prefix}.conv", src, in_c, out_c, dilation)
        x = self.bn(f"{prefix}.bn", x, out_c)
        return self.add_node(Node(f"{prefix}.relu", "relu", (x,)))

    def block(
        self,
        prefix: str,
        src: str,
        in_c: int,
        out_c: int,
        depth: int,
        widen_first: bool,
        last_plain: bool = False,
    ) -> str:
        """CNN block of ``depth`` Conv+BN+ReLU layers.

        With ``widen_first`` the first conv changes the width, otherwise the
        last one does. ``last_plain`` drops BN/ReLU after the last conv and
        zero-initializes it.
        """
        x = src
        for k in range(depth):
            if widen_first:
                ci, co = (in_c if k == 0 else out_c), out_c
            else:
                ci, co = in_c, (out_c if k == depth - 1 else in_c)
            if last_plain and k == depth - 1:
                x = self.conv(f"{prefix}.{k}.conv", x, ci, co, zero=True)
            else:
                x = self.conv_bn_relu(f"{prefix}.{k}", x, ci, co)
        return x


def build(
    cfg: MwcnnConfig,
    rng: np.random.Generator | None = None,
    *,
    identity_blocks: bool = False,
    dtype: Any = DTYPE,
) -> ModelGraph:
    """Instantiate the network described by ``cfg``.

    Args:
        cfg (MwcnnConfig): Architecture description.
        rng (np.random.Generator | None): Initialization stream; seed 0 if None.
        identity_blocks (bool): Test hook. Replace every CNN block by the
            identity and drop the skip sums, leaving a pure multi-level
            decomposition followed by its reconstruction.
        dtype: Parameter dtype.

    Returns:
        ModelGraph: The instantiated graph with initialized parameters.
    """
    rng = rng if rng is not None else new_rng(0)
    if cfg.downsampler == "dilated_chain":
        g = dilated_chain_variant(
            2 * cfg.levels * cfg.block_depth,
            cfg.widths[0] if cfg.widths else 16,
            rng=rng,
            in_channels=cfg.in_channels,
            global_residual=cfg.global_residual,
            dtype=dtype,
        )
        g.cfg = cfg
        return g

    if cfg.bank != cfg.bank_expand:
        logging.warning(
            "Mixed wavelet banks (%s down, %s up): reconstruction is not exact",
            cfg.bank,
            cfg.bank_expand,
        )
    down_op, up_op, factor = _DOWN_OPS[cfg.downsampler]
    widths = list(cfg.widths or ())
    b = _GraphBuilder(rng, dtype)

    src = INPUT
    prev_c = cfg.in_channels
    skips: list[str] = []
    for i in range(cfg.levels):
        src = b.add_node(Node(f"down{i + 1}", down_op, (src,), bank=cfg.bank))
        if not identity_blocks:
            src = b.block(
                f"enc{i + 1}", src, factor * prev_c, widths[i], cfg.block_depth, True
            )
        skips.append(src)
        prev_c = widths[i]

    for i in reversed(range(cfg.levels)):
        target_c = widths[i - 1] if i > 0 else cfg.in_channels
        if not identity_blocks:
            src = b.block(
                f"dec{i + 1}",
                src,
                widths[i],
                factor * target_c,
                cfg.block_depth,
                widen_first=False,
                last_plain=i == 0,
            )
        up = b.add_node(Node(f"up{i + 1}", up_op, (src,), bank=cfg.bank_expand))
        src = up
        if identity_blocks:
            continue
        if i > 0:
            src = b.add_node(Node(f"skip{i}", "add", (up, skips[i - 1])))
        elif cfg.global_residual:
            src = b.add_node(Node("residual", "add", (up, INPUT)))

    g = ModelGraph(
        cfg=cfg,
        nodes=b.nodes,
        output=src,
        params=b.params,
        buffers=b.buffers,
        kind="mwcnn",
        in_channels=cfg.in_channels,
    )
    logging.debug(
        "Built %s MWCNN: %d levels, %d conv layers, %d parameters",
        cfg.downsampler,
        cfg.levels,
        len(g.conv_layers),
        param_count(g),
    )
    return g


def conv_chain(
    dilations: Sequence[int],
    width: int,
    *,
    rng: np.random.Generator | None = None,
    in_channels: int = 1,
    global_residual: bool = True,
    dtype: Any = DTYPE,
) -> ModelGraph:
    """Plain FCN of 3x3 convs, one per entry of ``dilations``.

    Conv+BN+ReLU layers map to ``width`` channels; the last conv has no
    BN/ReLU, maps back to ``in_channels`` and starts at zero.
    """
    if len(dilations) < 1:
        raise ValueError("A conv chain needs at least one layer")
    b = _GraphBuilder(rng if rng is not None else new_rng(0), dtype)
    src, prev_c = INPUT, in_channels
    for k, d in enumerate(dilations[:-1]):
        src = b.conv_bn_relu(f"chain.{k}", src, prev_c, width, dilation=d)
        prev_c = width
    last = len(dilations) - 1
    src = b.conv(
        f"chain.{last}.conv", src, prev_c, in_channels, dilation=dilations[-1], zero=True
    )
    if global_residual:
        src = b.add_node(Node("residual", "add", (src, INPUT)))
    return ModelGraph(
        nodes=b.nodes,
        output=src,
        params=b.params,
        buffers=b.buffers,
        kind="chain",
        in_channels=in_channels,
    )


def dilated_chain_variant(
    depth: int,
    width: int,
    *,
    rng: np.random.Generator | None = None,
    in_channels: int = 1,
    global_residual: bool = True,
    dtype: Any = DTYPE,
) -> ModelGraph:
    """Ablation baseline: ``depth`` convs, all with dilation 2."""
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    return conv_chain(
        [2] * depth,
        width,
        rng=rng,
        in_channels=in_channels,
        global_residual=global_residual,
        dtype=dtype,
    )


def param_count(g: ModelGraph) -> int:
    """Number of trainable scalars in the parameter store."""
    return int(sum(p.size for p in g.params.values()))


def _conv_params(g: ModelGraph, node: Node) -> ConvParams:
    return ConvParams(
        weight=g.params[f"{node.name}.weight"],
        bias=g.params[f"{node.name}.bias"],
        dilation=node.dilation,
    )


def _bn_params(g: ModelGraph, node: Node) -> BNParams:
    return BNParams(
        gamma=g.params[f"{node.name}.gamma"],
        beta=g.params[f"{node.name}.beta"],
        running_mean=g.buffers[f"{node.name}.running_mean"],
        running_var=g.buffers[f"{node.name}.running_var"],
    )


def _forward_node(
    g: ModelGraph, node: Node, args: list[Tensor4], mode: Mode, tape: Tape | None
) -> Tensor4:
    x = args[0]
    match node.op:
        case "conv":
            return conv2d_fwd(x, _conv_params(g, node), tape, node.name)
        case "bn":
            return bn_fwd(x, _bn_params(g, node), mode, tape, node.name)
        case "relu":
            return relu_fwd(x, tape, node.name)
        case "dwt":
            out = dwt2(x, get_bank(node.bank)).stacked()
        case "iwt":
            out = iwt2(SubbandQuad.from_stacked(x), get_bank(node.bank))
        case "sum_pool":
            out = sum_pool2(x)
        case "unpool":
            out = unpool2(x)
        case "add":
            out = ewise("add", x, args[1])
        case _:
            raise ValueError(f"Unknown op {node.op!r} in node {node.name!r}")
    if tape is not None:
        tape.push(TapeRecord(layer_id=node.name, kind=node.op))
    return out


def forward(
    g: ModelGraph, y: Tensor4, mode: Mode = "eval", tape: Tape | None = None
) -> Tensor4:
    """Evaluate F(y; Θ).

    Args:
        g (ModelGraph): The network.
        y (Tensor4): Input batch, spatial dims divisible by 2^levels.
        mode (str): "train" uses batch statistics in BN and updates the
            running statistics; "eval" uses the running statistics.
        tape (Tape | None): Records for ``backward``; None skips recording.

    Returns:
        Tensor4: Output of the same shape as ``y``.
    """
    check_tensor4(y, "network input")
    if y.shape[1] != g.in_channels:
        raise ShapeError(f"Network expects {g.in_channels} channels, got {y.shape[1]}")
    if y.shape[2] % g.divisor or y.shape[3] % g.divisor:
        raise ShapeError(
            f"Input {y.shape[2]}x{y.shape[3]} not divisible by {g.divisor}"
        )
    values: dict[str, Tensor4] = {INPUT: y}
    for node in g.nodes:
        args = [values[name] for name in node.inputs]
        values[node.name] = _forward_node(g, node, args, mode, tape)
    return ensure_finite(values[g.output], "network output")


def _backward_node(
    g: ModelGraph,
    node: Node,
    grad_out: Tensor4,
    record: TapeRecord,
    param_grads: dict[str, Any],
) -> list[Tensor4]:
    match node.op:
        case "conv":
            grad_x, grad_w, grad_b = conv2d_bwd(grad_out, record)
            param_grads[f"{node.name}.weight"] += grad_w
            param_grads[f"{node.name}.bias"] += grad_b
            return [grad_x]
        case "bn":
            grad_x, grad_gamma, grad_beta = bn_bwd(grad_out, record)
            param_grads[f"{node.name}.gamma"] += grad_gamma
            param_grads[f"{node.name}.beta"] += grad_beta
            return [grad_x]
        case "relu":
            return [relu_bwd(grad_out, record)]
        case "dwt":
            quad = SubbandQuad.from_stacked(grad_out)
            return [dwt2_adjoint(quad, get_bank(node.bank))]
        case "iwt":
            return [iwt2_adjoint(grad_out, get_bank(node.bank)).stacked()]
        case "sum_pool":
            return [sum_pool2_adjoint(grad_out)]
        case "unpool":
            return [unpool2_adjoint(grad_out)]
        case "add":
            return [grad_out, grad_out]
        case _:
            raise ValueError(f"Unknown op {node.op!r} in node {node.name!r}")


def backward(g: ModelGraph, tape: Tape | None, grad_out: Tensor4) -> Gradients:
    """Reverse mode through the graph.

    Args:
        g (ModelGraph): The network used for the recorded forward.
        tape (Tape | None): Tape filled by a forward call; it is consumed.
        grad_out (Tensor4): Gradient of the loss with respect to the output.

    Returns:
        Gradients: Gradients for every parameter and for the input.
    """
    if tape is None or len(tape) == 0:
        raise TapeError("backward needs the tape of a recorded forward pass")
    param_grads = {k: np.zeros_like(v) for k, v in g.params.items()}
    pending: dict[str, Tensor4] = {g.output: grad_out}
    for node in reversed(g.nodes):
        record = tape.pop(node.name)
        node_grad = pending.pop(node.name, None)
        if node_grad is None:
            continue
        for src, grad in zip(
            node.inputs, _backward_node(g, node, node_grad, record, param_grads)
        ):
            pending[src] = pending[src] + grad if src in pending else grad
    if len(tape):
        raise TapeError(f"{len(tape)} unconsumed records left on the tape")
    input_grad = pending.get(INPUT)
    if input_grad is None:
        input_grad = np.zeros_like(grad_out)
    return Gradients(params=param_grads, input=input_grad)
