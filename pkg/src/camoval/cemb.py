"""CEMB binary container for embeddings, token grids, and feature sets.

Layout (little-endian):
  magic "CEMB" | u16 version=1 | u32 count | u16 grid_h | u16 grid_w | u32 dim
  count * grid_h * grid_w * dim float32 values, row-major

Pooled features use grid 1x1. A sidecar text file (<path>.idx) lists one
sample id per record ordinal; lines starting with '#' carry metadata
("# key: value") and do not count as records.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError

MAGIC = b"CEMB"
VERSION = 1
_HEADER = struct.Struct("<4sHIHHI")


@dataclass(frozen=True)
class CembFile:
    data: np.ndarray  # (count, grid_h, grid_w, dim) float32
    ids: tuple[str, ...] = ()
    metadata: dict[str, str] = field(default_factory=dict)

    @property
    def count(self) -> int:
        return self.data.shape[0]

    @property
    def grid_h(self) -> int:
        return self.data.shape[1]

    @property
    def grid_w(self) -> int:
        return self.data.shape[2]

    @property
    def dim(self) -> int:
        return self.data.shape[3]


def index_path(path: str) -> str:
    return path + ".idx"


def write_cemb(path: str, data: np.ndarray, ids: list[str] | None = None,
               metadata: dict[str, str] | None = None) -> None:
    """Write records plus the sidecar index.

    data must be 4-dimensional (count, grid_h, grid_w, dim); pass pooled
    vectors as (count, 1, 1, dim).
    """
    arr = np.ascontiguousarray(data, dtype="<f4")
    if arr.ndim != 4:
        raise ValueError(f"expected (count, grid_h, grid_w, dim), got {arr.shape}")
    count, grid_h, grid_w, dim = arr.shape
    if ids is not None and len(ids) != count:
        raise ValueError(f"{len(ids)} ids for {count} records")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, count, grid_h, grid_w, dim))
        fh.write(arr.tobytes())
    with open(index_path(path), "w", encoding="utf-8") as fh:
        for key, value in (metadata or {}).items():
            fh.write(f"# {key}: {value}\n")
        for rid in ids if ids is not None else (str(i) for i in range(count)):
            fh.write(f"{rid}\n")


def read_cemb(path: str) -> CembFile:
    """Read a CEMB file; the sidecar index is optional."""
    try:
        with open(path, "rb") as fh:
            header = fh.read(_HEADER.size)
            if len(header) < _HEADER.size:
                raise ParseError(f"{path}: truncated header")
            magic, version, count, grid_h, grid_w, dim = _HEADER.unpack(header)
            if magic != MAGIC:
                raise ParseError(f"{path}: bad magic {magic!r}")
            if version != VERSION:
                raise ParseError(f"{path}: unsupported version {version}")
            expected = count * grid_h * grid_w * dim * 4
            payload = fh.read(expected)
            if len(payload) != expected:
                raise ParseError(
                    f"{path}: payload is {len(payload)} bytes, expected {expected}"
                )
    except OSError as exc:
        raise ParseError(f"cannot read {path!r}: {exc}") from exc
    data = np.frombuffer(payload, dtype="<f4").reshape(count, grid_h, grid_w, dim)
    ids: tuple[str, ...] = ()
    metadata: dict[str, str] = {}
    idx = index_path(path)
    if os.path.isfile(idx):
        ids, metadata = read_index(idx)
        if ids and len(ids) != count:
            raise ParseError(
                f"{idx}: {len(ids)} ids for {count} records"
            )
    return CembFile(data=data, ids=ids, metadata=metadata)


def read_index(path: str) -> tuple[tuple[str, ...], dict[str, str]]:
    ids: list[str] = []
    metadata: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, value = body.split(":", 1)
                    key = key.strip()
                    value = value.strip()
                    # repeated keys (e.g. skip markers) accumulate
                    if key in metadata:
                        metadata[key] += "; " + value
                    else:
                        metadata[key] = value
                continue
            ids.append(line)
    return tuple(ids), metadata


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
