"""Versioned binary checkpoint files.

Layout: magic "CFCK", u32 format version, u32 JSON-blob length, the JSON
blob (hparams + metadata), then named parameter blocks: u32 name length,
name bytes, u32 ndim, u32 dims..., little-endian float64 data.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import ParseError

CHECKPOINT_MAGIC = b"CFCK"
FORMAT_VERSION = 1


def save_checkpoint(
    path: str | Path, parameters: dict[str, np.ndarray], meta: dict
) -> None:
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(blob)))
        fh.write(blob)
        for name in sorted(parameters):
            arr = np.ascontiguousarray(parameters[name], dtype="<f8")
            name_bytes = name.encode("utf-8")
            fh.write(struct.pack("<I", len(name_bytes)))
            fh.write(name_bytes)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.tobytes())


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    raw = Path(path).read_bytes()
    if raw[:4] != CHECKPOINT_MAGIC:
        raise ParseError(f"checkpoint {path}: bad magic {raw[:4]!r}")
    version, blob_len = struct.unpack_from("<II", raw, 4)
    if version != FORMAT_VERSION:
        raise ParseError(f"checkpoint {path}: unsupported version {version}")
    offset = 12
    meta = json.loads(raw[offset : offset + blob_len].decode("utf-8"))
    offset += blob_len
    parameters: dict[str, np.ndarray] = {}
    while offset < len(raw):
        (name_len,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        name = raw[offset : offset + name_len].decode("utf-8")
        offset += name_len
        (ndim,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        shape = struct.unpack_from(f"<{ndim}I", raw, offset)
        offset += 4 * ndim
        count = int(np.prod(shape)) if ndim else 1
        data = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        offset += 8 * count
        parameters[name] = data.reshape(shape).astype(np.float64)
    return parameters, meta
