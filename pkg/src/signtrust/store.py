"""Byte-stable on-disk formats for caches, models and checkpoints."""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

MAGIC = "SIGNTRUST"
VERSION = 1


class CacheMismatch(Exception):
    pass


def _atomic_write(path: Path, data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def write_arrays(path, kind: str, header: dict, arrays: dict):
    """Three text lines (magic, JSON header, JSON manifest) then raw little-endian array bytes."""
    manifest = []
    blobs = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        arr = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        manifest.append([name, arr.dtype.str, list(arr.shape)])
        blobs.append(arr.tobytes())
    head = (f"{MAGIC} {kind} v{VERSION}\n"
            + json.dumps(header, sort_keys=True) + "\n"
            + json.dumps(manifest) + "\n").encode()
    _atomic_write(path, head + b"".join(blobs))


def read_header(path, kind: str) -> dict:
    with open(path, "rb") as fh:
        magic = fh.readline().decode().split()
        if magic != [MAGIC, kind, f"v{VERSION}"]:
            raise CacheMismatch(f"{path}: not a {kind} v{VERSION} file")
        return json.loads(fh.readline())


def read_arrays(path, kind: str, expect: dict | None = None) -> tuple[dict, dict]:
    """Load a file written by :func:`write_arrays`; ``expect`` entries must match the header."""
    with open(path, "rb") as fh:
        magic = fh.readline().decode().split()
        if magic != [MAGIC, kind, f"v{VERSION}"]:
            raise CacheMismatch(f"{path}: not a {kind} v{VERSION} file")
        header = json.loads(fh.readline())
        for key, val in (expect or {}).items():
            if header.get(key) != val:
                raise CacheMismatch(f"{path}: header {key}={header.get(key)!r}, expected {val!r}")
        manifest = json.loads(fh.readline())
        arrays = {}
        for name, dtype, shape in manifest:
            dt = np.dtype(dtype)
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(dt.itemsize * count)
            arrays[name] = np.frombuffer(buf, dtype=dt).reshape(shape).astype(dt.newbyteorder("="))
    return header, arrays


def write_text(path, text: str):
    _atomic_write(path, text.encode())
