"""Bit-exact field persistence.

Binary layout (all integers unsigned 32-bit little-endian, all floats
64-bit little-endian):

    magic "CNSB" | version | d | n per axis (d times) | L (f64)
    | field count | field names, each UTF-8 + NUL | payload

The payload is each field's samples as f64 in row-major axis order, in
the order the names were declared.  Reading back what was written
reproduces every byte, NaN payloads included.
"""
from __future__ import annotations

import struct
from typing import Mapping

import numpy as np

from .grid import GridSpec
from .solver import StateAM, StateUV

__all__ = [
    "SnapshotError",
    "SNAPSHOT_VERSION",
    "write_snapshot",
    "read_snapshot",
    "state_fields",
    "write_state",
    "read_state",
]

MAGIC = b"CNSB"
SNAPSHOT_VERSION = 1


class SnapshotError(ValueError):
    """Snapshot file malformed, truncated, or from an unsupported version."""


def write_snapshot(path: str, grid: GridSpec, fields: Mapping[str, np.ndarray]) -> None:
    """Write named real fields on ``grid``; order of ``fields`` is preserved."""
    names = list(fields)
    if not names:
        raise SnapshotError("a snapshot needs at least one field")
    if len(set(names)) != len(names):
        raise SnapshotError("duplicate field names")
    blobs = []
    for name in names:
        arr = np.ascontiguousarray(fields[name], dtype="<f8")
        if arr.shape != grid.shape:
            raise SnapshotError(
                f"field {name!r} has shape {arr.shape}, grid wants {grid.shape}"
            )
        blobs.append(arr.tobytes())
    head = bytearray()
    head += MAGIC
    head += struct.pack("<III", SNAPSHOT_VERSION, grid.d, grid.n)
    head += struct.pack(f"<{grid.d - 1}I", *([grid.n] * (grid.d - 1)))
    head += struct.pack("<d", grid.L)
    head += struct.pack("<I", len(names))
    for name in names:
        encoded = name.encode("utf-8")
        if not encoded or b"\x00" in encoded:
            raise SnapshotError(f"field name {name!r} not encodable")
        head += encoded + b"\x00"
    with open(path, "wb") as fh:
        fh.write(bytes(head))
        for blob in blobs:
            fh.write(blob)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf, self.pos = buf, 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise SnapshotError(
                f"truncated file: wanted {n} bytes at offset {self.pos}, "
                f"have {len(self.buf) - self.pos}"
            )
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def name(self) -> str:
        end = self.buf.find(b"\x00", self.pos)
        if end < 0:
            raise SnapshotError("truncated file: unterminated field name")
        raw = self.take(end - self.pos)
        self.pos += 1  # the NUL
        if not raw:
            raise SnapshotError("empty field name")
        return raw.decode("utf-8")


def read_snapshot(path: str) -> tuple[GridSpec, dict[str, np.ndarray]]:
    """Read a snapshot back; inverse of :func:`write_snapshot`, bit for bit."""
    with open(path, "rb") as fh:
        r = _Reader(fh.read())
    if r.take(4) != MAGIC:
        raise SnapshotError("bad magic: not a CNSB snapshot")
    version = r.u32()
    if version != SNAPSHOT_VERSION:
        raise SnapshotError(
            f"unsupported snapshot version {version} (this reader handles {SNAPSHOT_VERSION})"
        )
    d = r.u32()
    if d not in (1, 2, 3):
        raise SnapshotError(f"bad dimension {d}")
    per_axis = [r.u32() for _ in range(d)]
    if len(set(per_axis)) != 1:
        raise SnapshotError(f"anisotropic lattice {per_axis} not supported")
    L = r.f64()
    grid = GridSpec(d, per_axis[0], L)
    count = r.u32()
    names = [r.name() for _ in range(count)]
    if len(set(names)) != len(names):
        raise SnapshotError("duplicate field names")
    fields = {}
    nbytes = 8 * grid.n**d
    for name in names:
        flat = np.frombuffer(r.take(nbytes), dtype="<f8")
        fields[name] = flat.reshape(grid.shape).copy()
    if r.pos != len(r.buf):
        raise SnapshotError(f"{len(r.buf) - r.pos} trailing bytes after payload")
    return grid, fields


def state_fields(state: StateUV | StateAM) -> dict[str, np.ndarray]:
    """Flatten a solver state into named scalar fields (a, then u1.. or m1..)."""
    stem = "u" if isinstance(state, StateUV) else "m"
    vec = state.u if isinstance(state, StateUV) else state.m
    out = {"a": np.asarray(state.a, float)}
    for j in range(state.grid.d):
        out[f"{stem}{j + 1}"] = np.asarray(vec[j], float)
    return out


def write_state(path: str, state: StateUV | StateAM) -> None:
    write_snapshot(path, state.grid, state_fields(state))


def read_state(path: str) -> StateUV | StateAM:
    """Rebuild a solver state from a snapshot's field names."""
    grid, fields = read_snapshot(path)
    uv = ["a"] + [f"u{j + 1}" for j in range(grid.d)]
    am = ["a"] + [f"m{j + 1}" for j in range(grid.d)]
    if list(fields) == uv:
        return StateUV(grid, fields["a"], np.stack([fields[k] for k in uv[1:]]))
    if list(fields) == am:
        return StateAM(grid, fields["a"], np.stack([fields[k] for k in am[1:]]))
    raise SnapshotError(
        f"field names {list(fields)} are not a solver state "
        f"(want {uv} or {am})"
    )
