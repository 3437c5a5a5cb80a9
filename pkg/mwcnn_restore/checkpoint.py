# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Binary checkpoint files.

Layout (all integers little-endian)::

    b"MWC1" | u32 version | u32 record count
    record*: u32 name length | name (UTF-8) | u8 kind | payload
        kind 0 (tensor): u8 dtype code | u8 ndim | u32 dims[ndim] | raw data
        kind 1 (bytes):  u64 length | data
    u32 CRC-32 of everything before it

Records are written in a fixed order (metadata first, then tensors sorted by
name within their group) so saving a loaded checkpoint reproduces the file
byte for byte.
"""

from __future__ import annotations

import json
import logging
import os
import struct
import zlib
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .config import MwcnnConfig, TrainConfig, dump_config, parse_config_text
from .constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from .errors import (
    CheckpointError,
    ChecksumError,
    ConfigError,
    IncompatibleCheckpointError,
)
from .layers import AdamState
from .model import ModelGraph, build

_KIND_TENSOR = 0
_KIND_BYTES = 1

_DTYPE_CODES = {np.dtype("<f4"): 0, np.dtype("<f8"): 1}
_CODE_DTYPES = {code: dtype for dtype, code in _DTYPE_CODES.items()}

_PARAM = "param/"
_BUFFER = "buffer/"
_ADAM_M = "adam.m/"
_ADAM_V = "adam.v/"


@dataclass
class Checkpoint:
    """Everything needed to resume training or run inference."""

    model_cfg: MwcnnConfig
    params: dict[str, Any]
    buffers: dict[str, Any]
    train_cfg: TrainConfig = field(default_factory=TrainConfig)
    adam: AdamState | None = None
    epoch: int = 0
    rng_state: dict[str, Any] | None = None
    version: int = CHECKPOINT_VERSION

    @classmethod
    def from_model(
        cls,
        g: ModelGraph,
        train_cfg: TrainConfig | None = None,
        adam: AdamState | None = None,
        epoch: int = 0,
        rng: np.random.Generator | None = None,
    ) -> Checkpoint:
        """Snapshot a built model (and optionally its training state)."""
        if g.cfg is None:
            raise CheckpointError("Only config-built models can be checkpointed")
        return cls(
            model_cfg=g.cfg,
            params=g.params,
            buffers=g.buffers,
            train_cfg=train_cfg or TrainConfig(),
            adam=adam,
            epoch=epoch,
            rng_state=rng.bit_generator.state if rng is not None else None,
        )


def _pack_name(name: str) -> bytes:
    raw = name.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def _pack_bytes(name: str, data: bytes) -> bytes:
    return _pack_name(name) + struct.pack("<BQ", _KIND_BYTES, len(data)) + data


def _pack_tensor(name: str, t: Any) -> bytes:
    arr = np.ascontiguousarray(t)
    dtype = arr.dtype.newbyteorder("<")
    if dtype not in _DTYPE_CODES:
        raise CheckpointError(f"Unsupported dtype {arr.dtype} for {name!r}")
    head = struct.pack("<BBB", _KIND_TENSOR, _DTYPE_CODES[dtype], arr.ndim)
    dims = struct.pack(f"<{arr.ndim}I", *arr.shape)
    return _pack_name(name) + head + dims + arr.astype(dtype, copy=False).tobytes()


def _records(ckpt: Checkpoint) -> list[bytes]:
    records = [
        _pack_bytes("config", dump_config(ckpt.model_cfg, ckpt.train_cfg).encode()),
        _pack_bytes("epoch", str(ckpt.epoch).encode()),
    ]
    if ckpt.rng_state is not None:
        rng_json = json.dumps(ckpt.rng_state, sort_keys=True)
        records.append(_pack_bytes("rng", rng_json.encode()))
    records += [_pack_tensor(_PARAM + k, ckpt.params[k]) for k in sorted(ckpt.params)]
    records += [
        _pack_tensor(_BUFFER + k, ckpt.buffers[k]) for k in sorted(ckpt.buffers)
    ]
    if ckpt.adam is not None:
        records.append(_pack_bytes("adam.t", str(ckpt.adam.t).encode()))
        for prefix, moments in ((_ADAM_M, ckpt.adam.m), (_ADAM_V, ckpt.adam.v)):
            records += [_pack_tensor(prefix + k, moments[k]) for k in sorted(moments)]
    return records


def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    """Serialize ``ckpt`` into the binary layout described above."""
    records = _records(ckpt)
    body = (
        CHECKPOINT_MAGIC
        + struct.pack("<II", ckpt.version, len(records))
        + b"".join(records)
    )
    return body + struct.pack("<I", zlib.crc32(body))


def checkpoint_save(ckpt: Checkpoint, path: str) -> None:
    """Write ``ckpt`` to ``path``."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    data = encode_checkpoint(ckpt)
    try:
        with open(path, "wb") as f:
            f.write(data)
    except OSError as exc:
        raise CheckpointError(f"Could not write checkpoint {path}: {exc}") from exc
    logging.debug("Saved checkpoint %s (%d bytes)", path, len(data))


class _Reader:
    """Bounds-checked cursor over the record section."""

    def __init__(self, data: bytes, pos: int) -> None:
        self.data = data
        self.pos = pos

    def take(self, count: int) -> bytes:
        end = self.pos + count
        if end > len(self.data):
            raise CheckpointError("Truncated checkpoint record")
        chunk = self.data[self.pos : end]
        self.pos = end
        return chunk

    def unpack(self, fmt: str) -> tuple[Any, ...]:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _read_record(reader: _Reader) -> tuple[str, Any]:
    (name_len,) = reader.unpack("<I")
    name = reader.take(name_len).decode("utf-8")
    (kind,) = reader.unpack("<B")
    if kind == _KIND_BYTES:
        (length,) = reader.unpack("<Q")
        return name, reader.take(length)
    if kind != _KIND_TENSOR:
        raise CheckpointError(f"Unknown record kind {kind} for {name!r}")
    code, ndim = reader.unpack("<BB")
    if code not in _CODE_DTYPES:
        raise CheckpointError(f"Unknown dtype code {code} for {name!r}")
    dtype = _CODE_DTYPES[code]
    shape = reader.unpack(f"<{ndim}I")
    size = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    arr = np.frombuffer(reader.take(size), dtype=dtype).reshape(shape)
    return name, arr.astype(dtype.newbyteorder("="))


def decode_checkpoint(data: bytes) -> Checkpoint:
    """Parse checkpoint bytes, verifying magic, version and CRC-32."""
    if len(data) < len(CHECKPOINT_MAGIC) + 12:
        raise CheckpointError("Truncated checkpoint header")
    if not data.startswith(CHECKPOINT_MAGIC):
        raise CheckpointError("Not a checkpoint file (bad magic)")
    (stored_crc,) = struct.unpack("<I", data[-4:])
    if zlib.crc32(data[:-4]) != stored_crc:
        raise ChecksumError("Checkpoint checksum mismatch (corrupted or truncated)")
    version, count = struct.unpack("<II", data[4:12])
    if version != CHECKPOINT_VERSION:
        raise IncompatibleCheckpointError(
            f"Checkpoint version {version} is not supported "
            f"(expected {CHECKPOINT_VERSION})"
        )

    reader = _Reader(data[:-4], 12)
    records = dict(_read_record(reader) for _ in range(count))
    if reader.pos != len(data) - 4:
        raise CheckpointError("Trailing bytes after the last record")

    try:
        model_cfg, train_cfg = parse_config_text(records["config"].decode())
    except KeyError:
        raise CheckpointError("Checkpoint has no config record") from None
    except ConfigError as exc:
        raise CheckpointError(f"Invalid config in checkpoint: {exc}") from exc

    def group(prefix: str) -> dict[str, Any]:
        return {k[len(prefix) :]: v for k, v in records.items() if k.startswith(prefix)}

    adam = None
    if "adam.t" in records:
        adam = AdamState(m=group(_ADAM_M), v=group(_ADAM_V), t=int(records["adam.t"]))
    rng_state = json.loads(records["rng"]) if "rng" in records else None
    return Checkpoint(
        model_cfg=model_cfg,
        params=group(_PARAM),
        buffers=group(_BUFFER),
        train_cfg=train_cfg,
        adam=adam,
        epoch=int(records.get("epoch", b"0")),
        rng_state=rng_state,
        version=version,
    )


def checkpoint_load(path: str, expect: MwcnnConfig | None = None) -> Checkpoint:
    """Read a checkpoint.

    Args:
        path (str): Checkpoint file.
        expect (MwcnnConfig | None): If given, the stored model config must
            equal it.

    Returns:
        Checkpoint: The decoded checkpoint.
    """
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as exc:
        raise CheckpointError(f"Could not read checkpoint {path}: {exc}") from exc
    ckpt = decode_checkpoint(data)
    if expect is not None and ckpt.model_cfg != expect:
        raise IncompatibleCheckpointError(
            f"Checkpoint {path} was written for a different model "
            f"(levels={ckpt.model_cfg.levels}, expected levels={expect.levels})"
        )
    logging.debug("Loaded checkpoint %s at epoch %d", path, ckpt.epoch)
    return ckpt


def load_into(g: ModelGraph, ckpt: Checkpoint) -> None:
    """Copy checkpoint tensors into an already built graph."""
    for store, saved, what in (
        (g.params, ckpt.params, "parameter"),
        (g.buffers, ckpt.buffers, "buffer"),
    ):
        if store.keys() != saved.keys():
            missing = sorted(store.keys() ^ saved.keys())
            raise IncompatibleCheckpointError(
                f"{what} names differ from the model: {', '.join(missing[:5])}"
            )
        for name, value in saved.items():
            if store[name].shape != value.shape:
                raise IncompatibleCheckpointError(
                    f"{what} {name!r} has shape {value.shape}, "
                    f"model expects {store[name].shape}"
                )
            store[name][...] = value


def restore_model(ckpt: Checkpoint) -> ModelGraph:
    """Build the checkpointed architecture and load its tensors."""
    g = build(ckpt.model_cfg)
    load_into(g, ckpt)
    return g
