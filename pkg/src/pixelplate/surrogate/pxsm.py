"""PXSM weight files.

Layout: magic bytes ``PXSM``, u32 little-endian version (currently 1), u64
little-endian header length, a UTF-8 JSON header (architecture config, target
normalizer, tensor manifest with name/shape/offset), then the raw tensors as
little-endian IEEE-754 binary64 in manifest order. Offsets are relative to the
start of the data section. The loader rejects unknown versions and any
manifest or shape drift from the declared architecture.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..errors import ModelError
from .model import ModelWeights, SurrogateConfig, TargetNormalizer, manifest_shapes

MAGIC = b"PXSM"
VERSION = 1


def model_to_bytes(model: ModelWeights, normalizer: TargetNormalizer) -> bytes:
    manifest = []
    blobs = []
    offset = 0
    for name, tensor in model.tensors.items():
        blob = np.ascontiguousarray(tensor, dtype="<f8").tobytes()
        manifest.append({"name": name, "shape": list(tensor.shape), "offset": offset})
        blobs.append(blob)
        offset += len(blob)
    header = {
        "config": {**asdict(model.config), "stage_channels": list(model.config.stage_channels)},
        "normalizer": asdict(normalizer),
        "manifest": manifest,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    return b"".join(
        [MAGIC, struct.pack("<I", VERSION), struct.pack("<Q", len(header_bytes)), header_bytes]
        + blobs
    )


def model_from_bytes(raw: bytes) -> tuple[ModelWeights, TargetNormalizer]:
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise ModelError("not a PXSM weight file (bad magic)")
    (version,) = struct.unpack("<I", raw[4:8])
    if version != VERSION:
        raise ModelError(f"unsupported PXSM version {version} (expected {VERSION})")
    (header_len,) = struct.unpack("<Q", raw[8:16])
    if len(raw) < 16 + header_len:
        raise ModelError("truncated PXSM header")
    try:
        header = json.loads(raw[16 : 16 + header_len].decode("utf-8"))
        config = SurrogateConfig(**header["config"])
        normalizer = TargetNormalizer(**header["normalizer"])
        manifest = header["manifest"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed PXSM header: {exc}") from exc

    expected = manifest_shapes(config)
    if [entry.get("name") for entry in manifest] != list(expected.keys()):
        raise ModelError("PXSM manifest does not match the declared architecture")

    data = raw[16 + header_len :]
    tensors: dict[str, np.ndarray] = {}
    offset = 0
    for entry in manifest:
        name, shape = entry["name"], tuple(entry["shape"])
        if shape != expected[name]:
            raise ModelError(f"tensor {name}: shape {shape} does not match architecture {expected[name]}")
        if entry["offset"] != offset:
            raise ModelError(f"tensor {name}: non-contiguous data offset")
        count = int(np.prod(shape)) if shape else 1
        nbytes = 8 * count
        chunk = data[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise ModelError(f"tensor {name}: truncated data section")
        tensors[name] = np.frombuffer(chunk, dtype="<f8").reshape(shape).astype(np.float64)
        offset += nbytes
    if offset != len(data):
        raise ModelError("trailing bytes after the declared tensor data")
    return ModelWeights(config, tensors), normalizer


def save_model(path, model: ModelWeights, normalizer: TargetNormalizer) -> None:
    Path(path).write_bytes(model_to_bytes(model, normalizer))


def load_model(path) -> tuple[ModelWeights, TargetNormalizer]:
    path = Path(path)
    if not path.exists():
        raise ModelError(f"weight file not found: {path}")
    return model_from_bytes(path.read_bytes())
