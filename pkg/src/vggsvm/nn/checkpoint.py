"""Binary network checkpoints.

Layout (little-endian throughout)::

    magic   4 bytes  'HVGG'
    version u32      format version (currently 1)
    meta    u32 length + UTF-8 JSON (architecture, seeds, class names, ...)
    blobs   u32 count, then per parameter: u32 byte length + float32 data
    crc     u32      CRC32 of every preceding byte

Parameters are stored as float32 in the network's layer order (weight then
bias per parameterized layer), so save -> load -> save reproduces the file
byte for byte.
"""

from __future__ import annotations

import json
import os
import struct
import zlib
from pathlib import Path

import numpy as np

from .vgg import VggConfig, VggNet, build_vgg

__all__ = ["CheckpointError", "save_checkpoint", "load_checkpoint"]

MAGIC = b"HVGG"
VERSION = 1


class CheckpointError(ValueError):
    """The checkpoint file is malformed, truncated or corrupted."""


def save_checkpoint(net: VggNet, path: str | Path, extra: dict | None = None) -> None:
    """Write the network (and optional metadata) atomically to ``path``."""
    meta = {
        "config": net.config.to_dict(),
        "init_seed": net.init_seed,
        "extra": extra or {},
    }
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")

    parts = [MAGIC, struct.pack("<I", VERSION), struct.pack("<I", len(meta_bytes)), meta_bytes]
    params = net.parameters()
    parts.append(struct.pack("<I", len(params)))
    for arr in params:
        blob = np.ascontiguousarray(arr, dtype="<f4").tobytes()
        parts.append(struct.pack("<I", len(blob)))
        parts.append(blob)

    body = b"".join(parts)
    payload = body + struct.pack("<I", zlib.crc32(body))

    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


class _Reader:
    def __init__(self, data: bytes, what: str):
        self.data = data
        self.pos = 0
        self.what = what

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError(f"truncated {self.what}")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]


def load_checkpoint(path: str | Path) -> tuple[VggNet, dict]:
    """Load a checkpoint; returns the network and the caller metadata dict."""
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != MAGIC:
        raise CheckpointError(f"not a checkpoint file: {path}")
    if len(data) < 4:
        raise CheckpointError(f"truncated checkpoint: {path}")
    body, crc_bytes = data[:-4], data[-4:]
    if struct.unpack("<I", crc_bytes)[0] != zlib.crc32(body):
        raise CheckpointError(f"checksum mismatch (corrupted checkpoint): {path}")

    reader = _Reader(body, f"checkpoint {path}")
    reader.take(4)  # magic
    version = reader.u32()
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    meta = json.loads(reader.take(reader.u32()).decode("utf-8"))

    config = VggConfig.from_dict(meta["config"])
    net = build_vgg(config, seed=int(meta["init_seed"]), dtype=np.float32)

    params = net.parameters()
    n_blobs = reader.u32()
    if n_blobs != len(params):
        raise CheckpointError(
            f"checkpoint has {n_blobs} parameter blobs, architecture needs {len(params)}"
        )
    for arr in params:
        blob = reader.take(reader.u32())
        if len(blob) != arr.size * 4:
            raise CheckpointError("parameter blob size does not match the architecture")
        arr[...] = np.frombuffer(blob, dtype="<f4").reshape(arr.shape)
    if reader.pos != len(body):
        raise CheckpointError(f"trailing bytes in checkpoint: {path}")

    return net, meta.get("extra", {})
