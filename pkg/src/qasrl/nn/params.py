"""Named parameter tensors, initialization, and checkpoint files.

Checkpoint layout: 8-byte magic, 8-byte little-endian manifest length, the
JSON manifest (names, shapes, dtypes, hyperparameters, format version),
then each tensor's raw little-endian payload in manifest order.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .tape import Tensor, default_dtype

MAGIC = b"QASRLNN1"
FORMAT_VERSION = 1


def init_orthonormal(shape, rng) -> np.ndarray:
    """Random matrix with orthonormal columns (rows when wide)."""
    rows, cols = shape
    flat = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return np.ascontiguousarray(q, dtype=default_dtype())


def init_uniform(shape, rng, scale=0.1) -> np.ndarray:
    return rng.uniform(-scale, scale, size=shape).astype(default_dtype())


class ParameterSet:
    """Ordered mapping of unique names to trainable tensors plus a manifest."""

    def __init__(self, manifest: dict | None = None):
        self.tensors: dict[str, Tensor] = {}
        self.manifest: dict = dict(manifest or {})

    def add(self, name: str, value) -> Tensor:
        if name in self.tensors:
            raise ValueError(f"duplicate parameter name {name!r}")
        tensor = Tensor(value, requires_grad=True)
        self.tensors[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def names(self) -> list[str]:
        return list(self.tensors)

    def items(self):
        return self.tensors.items()

    def zero_grad(self) -> None:
        for tensor in self.tensors.values():
            tensor.grad = None

    def astype(self, dtype) -> "ParameterSet":
        """Copy with every tensor cast; used for 64-bit gradient checking."""
        out = ParameterSet(self.manifest)
        for name, tensor in self.tensors.items():
            out.tensors[name] = Tensor(tensor.value.astype(dtype),
                                       requires_grad=True)
        return out

    def count(self) -> int:
        return sum(t.value.size for t in self.tensors.values())


def save_checkpoint(params: ParameterSet, path) -> None:
    entries = []
    for name, tensor in params.items():
        entries.append({"name": name, "shape": list(tensor.value.shape),
                        "dtype": str(tensor.value.dtype)})
    manifest = {"formatVersion": FORMAT_VERSION, "tensors": entries,
                "hyperparameters": params.manifest}
    blob = json.dumps(manifest, ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for _, tensor in params.items():
            payload = np.ascontiguousarray(tensor.value)
            fh.write(payload.astype(payload.dtype.newbyteorder("<")).tobytes())


def load_checkpoint(path) -> ParameterSet:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ValueError(f"not a checkpoint file: bad magic {magic!r}")
        (length,) = struct.unpack("<Q", fh.read(8))
        manifest = json.loads(fh.read(length).decode("utf-8"))
        if manifest.get("formatVersion") != FORMAT_VERSION:
            raise ValueError(f"unsupported format version "
                             f"{manifest.get('formatVersion')!r}")
        params = ParameterSet(manifest.get("hyperparameters", {}))
        for entry in manifest["tensors"]:
            shape = tuple(entry["shape"])
            dtype = np.dtype(entry["dtype"]).newbyteorder("<")
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * dtype.itemsize)
            if len(raw) != count * dtype.itemsize:
                raise ValueError(f"truncated payload for {entry['name']!r}")
            value = np.frombuffer(raw, dtype=dtype).reshape(shape)
            params.add(entry["name"], value.astype(np.dtype(entry["dtype"])
                                                   .newbyteorder("=")))
    return params
