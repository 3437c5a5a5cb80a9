# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Model and training configuration.

Configuration files are flat ``key=value`` text. Lines starting with ``#``
and blank lines are ignored; keys name fields of ``MwcnnConfig`` or
``TrainConfig``.
"""

from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass
from typing import Any, Callable

from .constants import (
    DEFAULT_BANK,
    DEFAULT_BLOCK_DEPTH,
    DEFAULT_DOWNSAMPLER,
    DEFAULT_LEVELS,
    DEFAULT_LR_END,
    DEFAULT_LR_START,
    DEFAULT_WIDTHS,
    DESK_LR,
    MAX_LEVELS,
    SUPPORTED_BANKS,
    SUPPORTED_DOWNSAMPLERS,
    SUPPORTED_PRESETS,
    THREADS_ENV_VAR,
)
from .errors import ConfigError


# pylint: disable=too-many-instance-attributes
@dataclass
class MwcnnConfig:
    """Declarative description of one network.

    ``widths`` defaults to 16 channels at level 1, doubling per level.
    ``bank_expand`` defaults to ``bank``; differing banks break exact
    inversion and need ``allow_mixed_banks``.
    """

    levels: int = DEFAULT_LEVELS
    block_depth: int = DEFAULT_BLOCK_DEPTH
    widths: tuple[int, ...] | None = None
    bank: str = DEFAULT_BANK
    bank_expand: str | None = None
    downsampler: str = DEFAULT_DOWNSAMPLER
    global_residual: bool = True
    allow_mixed_banks: bool = False
    in_channels: int = 1

    def __post_init__(self) -> None:
        if not 1 <= self.levels <= MAX_LEVELS:
            raise ConfigError(f"levels must be in 1..{MAX_LEVELS}, got {self.levels}")
        if self.block_depth < 1:
            raise ConfigError(f"block_depth must be >= 1, got {self.block_depth}")
        if self.in_channels < 1:
            raise ConfigError(f"in_channels must be >= 1, got {self.in_channels}")
        if self.widths is None:
            if self.levels == len(DEFAULT_WIDTHS):
                self.widths = DEFAULT_WIDTHS
            else:
                self.widths = tuple(16 * 2**i for i in range(self.levels))
        self.widths = tuple(int(w) for w in self.widths)
        if len(self.widths) != self.levels:
            raise ConfigError(
                f"widths has {len(self.widths)} entries for {self.levels} levels"
            )
        if min(self.widths) < 1:
            raise ConfigError(f"widths must be positive, got {self.widths}")
        if self.bank_expand is None:
            self.bank_expand = self.bank
        for bank in (self.bank, self.bank_expand):
            if bank not in SUPPORTED_BANKS:
                raise ConfigError(
                    f"Unsupported wavelet bank: {bank}. "
                    f"Supported: {', '.join(sorted(SUPPORTED_BANKS))}"
                )
        if self.bank != self.bank_expand and not self.allow_mixed_banks:
            raise ConfigError(
                "Mixed wavelet banks are not invertible; set allow_mixed_banks=true"
            )
        if self.downsampler not in SUPPORTED_DOWNSAMPLERS:
            raise ConfigError(
                f"Unsupported downsampler: {self.downsampler}. "
                f"Supported: {', '.join(sorted(SUPPORTED_DOWNSAMPLERS))}"
            )

    @property
    def divisor(self) -> int:
        """Input spatial dims must be multiples of this value."""
        return 2**self.levels


# pylint: disable=too-many-instance-attributes
@dataclass
class TrainConfig:
    """Denoising training protocol at desk scale.

    ``sigma`` is the noise standard deviation on the 0-255 scale. One epoch
    is ``steps_per_epoch`` mini-batches of freshly sampled patches. When
    ``adam_alpha`` is set it replaces the exponential schedule with a
    constant learning rate.
    """

    sigma: float = 25.0
    patch: int = 48
    batch: int = 24
    epochs: int = 40
    steps_per_epoch: int = 25
    lr_start: float = DEFAULT_LR_START
    lr_end: float = DEFAULT_LR_END
    adam_alpha: float | None = None
    augment: bool = True
    seed: int = 0
    val_count: int = 4

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if self.patch < 1 or self.batch < 1:
            raise ConfigError("patch and batch must be positive")
        if self.epochs < 0 or self.steps_per_epoch < 1:
            raise ConfigError("epochs must be >= 0 and steps_per_epoch >= 1")
        if not self.lr_start >= self.lr_end > 0:
            raise ConfigError(
                f"Need lr_start >= lr_end > 0, got {self.lr_start}, {self.lr_end}"
            )
        if self.adam_alpha is not None and self.adam_alpha <= 0:
            raise ConfigError(f"adam_alpha must be positive, got {self.adam_alpha}")
        if self.val_count < 0:
            raise ConfigError(f"val_count must be >= 0, got {self.val_count}")

    def check_model(self, model_cfg: MwcnnConfig) -> None:
        """Raise ConfigError if the patch size does not suit ``model_cfg``."""
        if self.patch % model_cfg.divisor:
            raise ConfigError(
                f"patch {self.patch} not divisible by 2^levels = {model_cfg.divisor}"
            )


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_widths(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.replace(" ", "").split(",") if part)


def _parse_optional_float(text: str) -> float | None:
    return None if text.lower() in {"", "none"} else float(text)


_MODEL_PARSERS: dict[str, Callable[[str], Any]] = {
    "levels": int,
    "block_depth": int,
    "widths": _parse_widths,
    "bank": str,
    "bank_expand": str,
    "downsampler": str,
    "global_residual": _parse_bool,
    "allow_mixed_banks": _parse_bool,
    "in_channels": int,
}

_TRAIN_PARSERS: dict[str, Callable[[str], Any]] = {
    "sigma": float,
    "patch": int,
    "batch": int,
    "epochs": int,
    "steps_per_epoch": int,
    "lr_start": float,
    "lr_end": float,
    "adam_alpha": _parse_optional_float,
    "augment": _parse_bool,
    "seed": int,
    "val_count": int,
}


def parse_config_text(text: str) -> tuple[MwcnnConfig, TrainConfig]:
    """Parse flat ``key=value`` text into model and training configs."""
    model_kwargs: dict[str, Any] = {}
    train_kwargs: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in _MODEL_PARSERS:
            parser, target = _MODEL_PARSERS[key], model_kwargs
        elif key in _TRAIN_PARSERS:
            parser, target = _TRAIN_PARSERS[key], train_kwargs
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            target[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return MwcnnConfig(**model_kwargs), TrainConfig(**train_kwargs)


def load_config(path: str) -> tuple[MwcnnConfig, TrainConfig]:
    """Read a configuration file (UTF-8)."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"Could not read config file {path}: {exc}") from exc
    logging.debug("Loaded config file: %s", path)
    return parse_config_text(text)


# Named key=value texts; "full" is the dataclass defaults.
PRESETS: dict[str, str] = {
    "full": "",
    "desk": (
        "levels=2\n"
        "widths=8,16\n"
        "patch=32\n"
        "batch=8\n"
        "epochs=5\n"
        "steps_per_epoch=100\n"
        f"adam_alpha={DESK_LR!r}\n"
    ),
}


def preset_config(name: str) -> tuple[MwcnnConfig, TrainConfig]:
    """Model and training configs of a named preset."""
    if name not in SUPPORTED_PRESETS:
        raise ConfigError(
            f"Unknown preset: {name}. "
            f"Supported: {', '.join(sorted(SUPPORTED_PRESETS))}"
        )
    return parse_config_text(PRESETS[name])


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(model_cfg: MwcnnConfig, train_cfg: TrainConfig | None = None) -> str:
    """Canonical ``key=value`` text (sorted keys), inverse of parse_config_text."""
    items = asdict(model_cfg)
    if train_cfg is not None:
        items.update(asdict(train_cfg))
    return "".join(f"{k}={_format_value(items[k])}\n" for k in sorted(items))


def get_worker_count() -> int:
    """Worker cap from MWCNN_THREADS; defaults to the CPU count."""
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None:
        return os.cpu_count() or 1
    try:
        count = int(raw)
    except ValueError:
        count = 0
    if count < 1:
        logging.warning("Ignoring invalid %s=%r; using 1 worker", THREADS_ENV_VAR, raw)
        return 1
    return count
