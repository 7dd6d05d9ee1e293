"""Binary checkpoints of a field pair.

Layout (all integers little-endian)::

    8 bytes   magic b"QNLSCKPT"
    4 bytes   uint32 header length H
    H bytes   UTF-8 JSON header: format version, grid, params, time, payload size
    payload   float64 (re, im) pairs: the n samples of u, then the n samples of v

Samples are stored exactly, so a write/read round trip is bitwise.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .model import FieldPair, ModelParams
from .spectral import ComplexField, SpectralGrid, make_grid

MAGIC = b"QNLSCKPT"
FORMAT_VERSION = 1
_LEN = struct.Struct("<I")


class CheckpointError(ValueError):
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


class CheckpointFormatError(CheckpointError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointGridMismatch(CheckpointError):
    pass


def encode_checkpoint(state: FieldPair, time: float = 0.0,
                      params: Optional[ModelParams] = None,
                      meta: Optional[Dict[str, Any]] = None) -> bytes:
    u = state.u.samples
    v = state.v.samples
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise CheckpointError("refusing to checkpoint a non-finite state")
    payload = np.concatenate([u, v]).astype("<c16").tobytes()
    header = {
        "format": "quadnls-checkpoint",
        "version": FORMAT_VERSION,
        "grid": {"L": state.grid.box_length, "n": state.grid.num_points},
        "params": asdict(params) if params is not None else None,
        "time": float(time),
        "payload_bytes": len(payload),
        "meta": meta or {},
    }
    hb = json.dumps(header, sort_keys=True).encode("utf-8")
    return MAGIC + _LEN.pack(len(hb)) + hb + payload


def write_checkpoint(path, state: FieldPair, time: float = 0.0,
                     params: Optional[ModelParams] = None,
                     meta: Optional[Dict[str, Any]] = None) -> None:
    data = encode_checkpoint(state, time, params, meta)
    with open(path, "wb") as fh:
        fh.write(data)


def decode_checkpoint(data: bytes,
                      expected_grid: Optional[SpectralGrid] = None) -> Tuple[FieldPair, Dict[str, Any]]:
    head = len(MAGIC) + _LEN.size
    if len(data) < head:
        raise CheckpointTruncatedError("file ends inside the fixed preamble")
    if data[:len(MAGIC)] != MAGIC:
        raise CheckpointFormatError("bad magic bytes; not a checkpoint")
    (hlen,) = _LEN.unpack(data[len(MAGIC):head])
    if len(data) < head + hlen:
        raise CheckpointTruncatedError("file ends inside the header")
    try:
        header = json.loads(data[head:head + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointFormatError(f"unreadable header: {exc}") from None
    if not isinstance(header, dict) or header.get("format") != "quadnls-checkpoint":
        raise CheckpointFormatError("header does not describe a checkpoint")
    if header.get("version") != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"unsupported checkpoint version {header.get('version')!r} (expected {FORMAT_VERSION})")
    try:
        grid = make_grid(float(header["grid"]["L"]), int(header["grid"]["n"]))
        declared = int(header["payload_bytes"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointFormatError(f"malformed header field: {exc}") from None
    n = grid.num_points
    if declared != 2 * n * 16:
        raise CheckpointFormatError(
            f"header declares {declared} payload bytes but the grid needs {2 * n * 16}")
    payload = data[head + hlen:]
    if len(payload) < declared:
        raise CheckpointTruncatedError(f"payload has {len(payload)} of {declared} bytes")
    if len(payload) > declared:
        raise CheckpointFormatError(f"payload has {len(payload) - declared} trailing bytes")
    if expected_grid is not None and expected_grid != grid:
        raise CheckpointGridMismatch(f"checkpoint grid {grid} does not match {expected_grid}")
    z = np.frombuffer(payload, dtype="<c16").astype(np.complex128)
    if not np.all(np.isfinite(z)):
        raise CheckpointFormatError("payload contains non-finite values")
    state = FieldPair(ComplexField(grid, z[:n]), ComplexField(grid, z[n:]))
    return state, header


def read_checkpoint(path, expected_grid: Optional[SpectralGrid] = None) -> FieldPair:
    return read_checkpoint_with_header(path, expected_grid)[0]


def read_checkpoint_with_header(path, expected_grid: Optional[SpectralGrid] = None):
    with open(path, "rb") as fh:
        return decode_checkpoint(fh.read(), expected_grid)
