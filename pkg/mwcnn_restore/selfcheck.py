# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Self-check suite: fast paths against the float64 references.

Each check is a ``BaseCheck`` subclass that runs a number of seeded random
cases and reports the worst discrepancy it saw. ``SelfCheckSuite`` runs the
registered checks and renders the report.
"""

from __future__ import annotations

import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .config import MwcnnConfig
from .constants import GRAD_CHECK_RTOL, SELFCHECK_CASES
from .errors import MwcnnError
from .layers import (
    BNParams,
    ConvParams,
    Tape,
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
from .model import ModelGraph, backward, build, dilated_chain_variant, forward
from .oracle import (
    dilated_equiv_check,
    direct_conv2d_ref,
    dwt2_ref,
    finite_diff_grad,
    max_relative_error,
)
from .receptive_field import mask_summary, receptive_field_mask
from .report import ReportContext, report_json, report_text
from .tensor import new_rng
from .train import loss
from .wavelet import (
    SubbandQuad,
    dwt2,
    dwt2_adjoint,
    get_bank,
    iwt2,
    iwt2_adjoint,
    wpt_decompose,
    wpt_reconstruct,
)

FD_STEP = 1e-6
RELU_MARGIN = 1e-3


@dataclass
class CheckResult:
    """Outcome of one check."""

    name: str
    description: str
    passed: bool
    cases: int
    worst: float
    detail: str
    seconds: float = 0.0


class BaseCheck(ABC):
    """Base class for self-checks.

    Subclasses set ``NAME`` and ``DESCRIPTION`` and implement ``run_cases``,
    returning whether every case passed, the worst observed value and a
    one-line detail.
    """

    NAME: str = ""
    DESCRIPTION: str = ""

    def __init__(self, cases: int = SELFCHECK_CASES, seed: int = 0) -> None:
        self.cases = cases
        self.seed = seed

    @abstractmethod
    def run_cases(self, rng: np.random.Generator) -> tuple[bool, float, str]:
        """Run the seeded cases of this check."""
        raise NotImplementedError

    def run(self, index: int = 0) -> CheckResult:
        """Run the check with its own generator and time it."""
        rng = new_rng((self.seed, index))
        start = time.perf_counter()
        try:
            passed, worst, detail = self.run_cases(rng)
        except MwcnnError as exc:
            logging.error("Check %s raised: %s", self.NAME, exc)
            passed, worst, detail = False, float("nan"), f"error: {exc}"
        elapsed = time.perf_counter() - start
        logging.debug("%s: %s in %.2f s", self.NAME, detail, elapsed)
        return CheckResult(
            name=self.NAME,
            description=self.DESCRIPTION,
            passed=passed,
            cases=self.cases,
            worst=worst,
            detail=detail,
            seconds=elapsed,
        )


class ReconstructionCheck(BaseCheck):
    """Multi-level decompose then reconstruct returns the input."""

    NAME = "reconstruction"
    DESCRIPTION = "Wavelet packet perfect reconstruction"

    def run_cases(self, rng: np.random.Generator) -> tuple[bool, float, str]:
        worst = {np.float32: 0.0, np.float64: 0.0}
        tolerance = {np.float32: 1e-5, np.float64: 1e-10}
        for case in range(self.cases):
            bank = get_bank(("haar", "db2")[case % 2])
            levels = 1 + (case // 2) % 3
            top = 64 // 2**levels
            h, w = (2**levels * int(rng.integers(2, top + 1)) for _ in range(2))
            x64 = rng.standard_normal((1, 1, h, w))
            for dtype in worst:
                x = x64.astype(dtype)
                back = wpt_reconstruct(wpt_decompose(x, bank, levels), bank)
                worst[dtype] = max(worst[dtype], float(np.max(np.abs(back - x))))
        passed = all(worst[d] < tolerance[d] for d in worst)
        detail = (
            f"max error f32 {worst[np.float32]:.2e}, f64 {worst[np.float64]:.2e}"
        )
        return passed, worst[np.float32], detail


class SumPoolCheck(BaseCheck):
    """The Haar low-pass subband is a 2x2 sum-pooling."""

    NAME = "sum_pool"
    DESCRIPTION = "Haar LL subband equals 2x2 sum-pooling"

    def run_cases(self, rng: np.random.Generator) -> tuple[bool, float, str]:
        haar = get_bank("haar")
        mismatches = 0
        for _ in range(self.cases):
            h, w = (2 * int(rng.integers(1, 33)) for _ in range(2))
            x = rng.integers(-255, 256, size=(2, 3, h, w)).astype(np.float32)
            if not np.array_equal(dwt2(x, haar).x1, sum_pool2(x)):
                mismatches += 1
        return mismatches == 0, float(mismatches), f"{mismatches} bitwise mismatch(es)"


class DilatedEquivalenceCheck(BaseCheck):
    """Dilation-2 conv equals plain conv on combined subbands, all phases."""

    NAME = "dilated_equivalence"
    DESCRIPTION = "Dilated conv equals conv on subband sums"

    def run_cases(self, rng: np.random.Generator) -> tuple[bool, float, str]:
        worst = 0.0
        passed = True
        for _ in range(self.cases):
            x = rng.standard_normal((1, 1, 12, 12))
            report = dilated_equiv_check(x, rng=rng)
            worst = max(worst, report.max_abs_diff)
            passed = passed and report.passed
        return passed, worst, f"max abs discrepancy {worst:.2e} over 4 phases"


class ConvOracleCheck(BaseCheck):
    """Fast convolution against the literal sum."""

    NAME = "conv_oracle"
    DESCRIPTION = "Convolution matches direct evaluation"

    def run_cases(self, rng: np.random.Generator) -> tuple[bool, float, str]:
        worst = 0.0
        for _ in range(self.cases):
            n, c, oc = (int(v) for v in rng.integers(1, [3, 4, 4]))
            h, w = (int(v) for v in rng.integers(5, 11, size=2))
            d = int(rng.integers(1, 4))
            x = rng.standard_normal((n, c, h, w))
            p = ConvParams(rng.standard_normal((oc, c, 3, 3)), rng.standard_normal(oc), d)
            fast = conv2d_fwd(x, p)
            ref = direct_conv2d_ref(x, p.weight, p.bias, d, p.pad)
            worst = max(worst, float(np.max(np.abs(fast - ref))))
        return worst < 1e-6, worst, f"max abs difference {worst:.2e}"


class HaarOracleCheck(BaseCheck):
    """Fast Haar analysis against the block formulas."""

    NAME = "haar_oracle"
    DESCRIPTION = "Haar DWT matches block formulas"

    def run_cases(self, rng: np.random.Generator) -> tuple[bool, float, str]:
        haar = get_bank("haar")
        worst = 0.0
        for _ in range(self.cases):
            h, w = (2 * int(rng.integers(1, 9)) for _ in range(2))
            x = rng.standard_normal((2, 2, h, w))
            fast, ref = dwt2(x, haar), dwt2_ref(x)
            for a, b in zip(fast.bands, ref.bands):
                worst = max(worst, float(np.max(np.abs(a - b))))
        return worst < 1e-6, worst, f"max abs difference {worst:.2e}"


def _dot_grad_error(
    fn: Callable[[Any], Any], analytic: Any, x: Any, weights: Any
) -> float:
    """Relative error of ``analytic`` against d/dx sum(fn(x) * weights)."""
    numeric = finite_diff_grad(
        lambda v: float(np.sum(fn(v) * weights)), x, step=FD_STEP
    )
    return max_relative_error(analytic, numeric)


def layer_grad_errors(rng: np.random.Generator) -> dict[str, float]:
    """Finite-difference errors of every layer's backward on random inputs."""
    errors: dict[str, float] = {}

    for d in (1, 2):
        x = rng.standard_normal((2, 2, 6, 6))
        w = rng.standard_normal((3, 2, 3, 3))
        b = rng.standard_normal(3)
        tape = Tape()
        out = conv2d_fwd(x, ConvParams(w, b, d), tape)
        r = rng.standard_normal(out.shape)
        gx, gw, gb = conv2d_bwd(r, tape.pop())
        errors[f"conv_d{d}"] = max(
            _dot_grad_error(lambda v: conv2d_fwd(v, ConvParams(w, b, d)), gx, x, r),
            _dot_grad_error(lambda v: conv2d_fwd(x, ConvParams(v, b, d)), gw, w, r),
            _dot_grad_error(lambda v: conv2d_fwd(x, ConvParams(w, v, d)), gb, b, r),
        )

    x = rng.standard_normal((2, 3, 4, 4))
    gamma = rng.uniform(0.5, 1.5, 3)
    beta = rng.standard_normal(3)

    def bn(v: Any, g: Any = gamma, bt: Any = beta, tape: Tape | None = None) -> Any:
        p = BNParams.fresh(3, np.float64)
        p.gamma, p.beta = g, bt
        return bn_fwd(v, p, "train", tape)

    tape = Tape()
    r = rng.standard_normal(x.shape)
    bn(x, tape=tape)
    gx, ggamma, gbeta = bn_bwd(r, tape.pop())
    errors["bn"] = max(
        _dot_grad_error(bn, gx, x, r),
        _dot_grad_error(lambda v: bn(x, g=v), ggamma, gamma, r),
        _dot_grad_error(lambda v: bn(x, bt=v), gbeta, beta, r),
    )

    x = rng.standard_normal((1, 2, 4, 4))
    x += np.sign(x) * 0.1
    tape = Tape()
    relu_fwd(x, tape)
    r = rng.standard_normal(x.shape)
    errors["relu"] = _dot_grad_error(relu_fwd, relu_bwd(r, tape.pop()), x, r)

    for name in ("haar", "db2"):
        bank = get_bank(name)
        x = rng.standard_normal((1, 2, 8, 8))
        r = rng.standard_normal((1, 8, 4, 4))
        analytic = dwt2_adjoint(SubbandQuad.from_stacked(r), bank)
        errors[f"dwt_{name}"] = _dot_grad_error(
            lambda v, b=bank: dwt2(v, b).stacked(), analytic, x, r
        )
        s = rng.standard_normal((1, 8, 4, 4))
        r = rng.standard_normal((1, 2, 8, 8))
        analytic = iwt2_adjoint(r, bank).stacked()
        errors[f"iwt_{name}"] = _dot_grad_error(
            lambda v, b=bank: iwt2(SubbandQuad.from_stacked(v), b), analytic, s, r
        )

    x = rng.standard_normal((1, 2, 6, 6))
    r = rng.standard_normal((1, 2, 3, 3))
    errors["sum_pool"] = _dot_grad_error(sum_pool2, sum_pool2_adjoint(r), x, r)
    x = rng.standard_normal((1, 2, 3, 3))
    r = rng.standard_normal((1, 2, 6, 6))
    errors["unpool"] = _dot_grad_error(unpool2, unpool2_adjoint(r), x, r)
    return errors


def randomize_params(g: ModelGraph, rng: np.random.Generator) -> None:
    """Overwrite every parameter with a random value, in place.

    Conv weights get He initialization (including zero-initialized ones),
    biases and BN shifts small normals, BN scales values in [0.5, 1.5].
    """
    for name, value in g.params.items():
        if name.endswith(".weight"):
            value[...] = he_init(rng, value.shape, value.dtype)
        elif name.endswith(".gamma"):
            value[...] = rng.uniform(0.5, 1.5, value.shape)
        else:
            value[...] = 0.1 * rng.standard_normal(value.shape)


def relu_margin(g: ModelGraph, y: Any) -> float:
    """Smallest |pre-activation| over every ReLU of a train-mode forward."""
    tape = Tape()
    forward(g, y, mode="train", tape=tape)
    margin = float("inf")
    while len(tape):
        record = tape.pop()
        if record.kind == "relu":
            margin = min(margin, float(np.min(np.abs(record.saved["x"]))))
    return margin


def model_grad_error(g: ModelGraph, y: Any, target: Any) -> float:
    """Worst relative error of ``backward`` over all parameters and the input."""
    tape = Tape()
    _, grad_out = loss(forward(g, y, mode="train", tape=tape), target)
    grads = backward(g, tape, grad_out)

    def objective(v: Any) -> float:
        return loss(forward(g, v, mode="train"), target)[0]

    worst = max_relative_error(grads.input, finite_diff_grad(objective, y, FD_STEP))
    for name, param in g.params.items():
        saved = param.copy()

        def objective_param(v: Any, target_param: Any = param) -> float:
            target_param[...] = v
            return loss(forward(g, y, mode="train"), target)[0]

        numeric = finite_diff_grad(objective_param, saved, FD_STEP)
        param[...] = saved
        worst = max(worst, max_relative_error(grads.params[name], numeric))
    return worst


def tiny_model_case(
    rng: np.random.Generator, attempts: int = 50
) -> tuple[ModelGraph, Any, Any]:
    """Float64 one-level model, width 2, with an 8x8 input away from ReLU kinks."""
    cfg = MwcnnConfig(levels=1, widths=(2,), block_depth=2)
    g = build(cfg, rng, dtype=np.float64)
    for _ in range(attempts):
        randomize_params(g, rng)
        y = rng.standard_normal((1, 1, 8, 8))
        if relu_margin(g, y) > RELU_MARGIN:
            return g, y, rng.standard_normal(y.shape)
    raise MwcnnError("No input found away from ReLU kinks")


class GradientCheck(BaseCheck):
    """Every backward against central differences."""

    NAME = "gradients"
    DESCRIPTION = "Backward passes match finite differences"

    def run_cases(self, rng: np.random.Generator) -> tuple[bool, float, str]:
        rounds = max(1, self.cases // 20)
        worst_name, worst = "", 0.0
        for _ in range(rounds):
            errors = layer_grad_errors(rng)
            g, y, target = tiny_model_case(rng)
            errors["tiny_model"] = model_grad_error(g, y, target)
            for name, err in errors.items():
                if err >= worst:
                    worst_name, worst = name, err
        return (
            worst < GRAD_CHECK_RTOL,
            worst,
            f"max relative error {worst:.2e} ({worst_name})",
        )


class DegenerationCheck(BaseCheck):
    """Identity CNN blocks leave a wavelet packet round trip."""

    NAME = "wpt_degeneration"
    DESCRIPTION = "Identity blocks reduce the network to WPT"

    def run_cases(self, rng: np.random.Generator) -> tuple[bool, float, str]:
        worst = 0.0
        for case in range(self.cases):
            levels = 1 + case % 3
            bank = ("haar", "db2")[(case // 3) % 2]
            g = build(MwcnnConfig(levels=levels, bank=bank), identity_blocks=True)
            side = 2**levels * int(rng.integers(2, 5))
            y = rng.standard_normal((1, 1, side, side)).astype(np.float32)
            worst = max(worst, float(np.max(np.abs(forward(g, y) - y))))
        return worst < 1e-5, worst, f"max abs difference {worst:.2e}"


class ArchitectureCheck(BaseCheck):
    """Layer count, shape preservation and identity at initialization."""

    NAME = "architecture"
    DESCRIPTION = "Default depth 24, shapes kept, identity at init"

    def run_cases(self, rng: np.random.Generator) -> tuple[bool, float, str]:
        default = build(MwcnnConfig(), rng)
        convs = len(default.conv_layers)
        ok = convs == 24
        y = rng.uniform(0, 255, (1, 1, 32, 32)).astype(np.float32)
        out = forward(default, y)
        ok = ok and out.shape == y.shape and np.array_equal(out, y)
        for case in range(max(1, self.cases // 10)):
            levels = 1 + case % 3
            downsampler = ("dwt", "sum_pool", "dilated_chain")[case % 3]
            cfg = MwcnnConfig(
                levels=levels,
                widths=tuple(4 * 2**i for i in range(levels)),
                block_depth=2,
                downsampler=downsampler,
            )
            g = build(cfg, rng)
            side = cfg.divisor * int(rng.integers(2, 4))
            y = rng.standard_normal((2, 1, side, side)).astype(np.float32)
            ok = ok and forward(g, y, mode="train").shape == y.shape
        return ok, float(convs), f"{convs} conv layers in the default network"


class GriddingCheck(BaseCheck):
    """Receptive fields: holes for stacked dilations, dense for wavelets."""

    NAME = "gridding"
    DESCRIPTION = "Dilated chain has holes, one-level MWCNN none"

    def run_cases(self, rng: np.random.Generator) -> tuple[bool, float, str]:
        chain = mask_summary(
            receptive_field_mask(dilated_chain_variant(3, 4, rng=rng), (16, 16))
        )
        mwcnn = mask_summary(
            receptive_field_mask(build(MwcnnConfig(levels=1), rng), (16, 16))
        )
        passed = chain.holes > 0 and mwcnn.dense
        detail = (
            f"dilated chain {chain.extent[0]}x{chain.extent[1]} with "
            f"{chain.holes} holes; MWCNN {mwcnn.extent[0]}x{mwcnn.extent[1]} "
            f"with {mwcnn.holes} holes"
        )
        return passed, float(chain.holes), detail


class SelfCheckSuite:
    """Runs the registered checks and renders the results."""

    CHECKS: list[type[BaseCheck]] = [
        ReconstructionCheck,
        SumPoolCheck,
        DilatedEquivalenceCheck,
        ConvOracleCheck,
        HaarOracleCheck,
        GradientCheck,
        DegenerationCheck,
        ArchitectureCheck,
        GriddingCheck,
    ]

    def __init__(
        self,
        cases: int = SELFCHECK_CASES,
        seed: int = 0,
        only: list[str] | None = None,
    ) -> None:
        """
        Run the checks.

        Args:
            cases (int): Random cases per check.
            seed (int): Base seed; each check derives its own stream.
            only (list[str] | None): Restrict the run to these check names.
        """
        if cases < 1:
            raise ValueError(f"cases must be >= 1, got {cases}")
        known = {c.NAME for c in self.CHECKS}
        unknown = sorted(set(only or ()) - known)
        if unknown:
            raise ValueError(f"Unknown check(s): {', '.join(unknown)}")
        self.results: list[CheckResult] = []
        self.errors: list[str] = []
        for index, check in enumerate(self.CHECKS):
            if only and check.NAME not in only:
                continue
            try:
                self.results.append(check(cases, seed).run(index))
            except (ValueError, ArithmeticError, RuntimeError) as exc:
                logging.error("Check %s could not run: %s", check.NAME, exc)
                self.errors.append(f"{check.NAME}: {exc}")
        self.passed = self.check_all()

    def check_all(self) -> bool:
        """True when every check ran and passed."""
        return (
            not self.errors
            and bool(self.results)
            and all(r.passed for r in self.results)
        )

    def _context(self) -> ReportContext:
        return ReportContext(
            title="Self-check",
            passed=self.passed,
            results=self.results,
            errors=self.errors,
        )

    def print_table_output(self, verbose: bool = False) -> None:
        """Print the check-by-check result table."""
        print(report_text(self._context(), verbose))

    def output_json(self) -> dict[str, Any]:
        """JSON-serializable result dict."""
        return report_json(self._context())


def check_names() -> list[str]:
    """Names of the registered checks, in run order."""
    return [c.NAME for c in SelfCheckSuite.CHECKS]
