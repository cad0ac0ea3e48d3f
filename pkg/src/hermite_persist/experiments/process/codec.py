"""HPTH binary path format.

Layout (little-endian):

    magic    4 bytes   b"HPTH"
    version  u16
    m        u32
    H        f64
    n        u64
    R        u64
    values   R * n f64, row-major (replica-major)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from hermite_persist.core.errors import ValidationError

MAGIC = b"HPTH"
VERSION = 1
HEADER = struct.Struct("<4sHIdQQ")


@dataclass(frozen=True, eq=False)
class HpthBlock:
    """Decoded HPTH payload."""

    version: int
    m: int
    H: float
    values: NDArray[np.float64]

    @property
    def n(self) -> int:
        return int(self.values.shape[1])

    @property
    def replicas(self) -> int:
        return int(self.values.shape[0])


def encode_paths(values: NDArray[np.float64], m: int, H: float) -> bytes:
    """Serialize an R x n path matrix."""
    matrix = np.atleast_2d(np.asarray(values, dtype="<f8"))
    replicas, n = matrix.shape
    header = HEADER.pack(MAGIC, VERSION, m, H, n, replicas)
    return header + np.ascontiguousarray(matrix).tobytes()


def decode_paths(data: bytes) -> HpthBlock:
    """
    Parse an HPTH byte string.

    Raises:
        ValidationError: Bad magic, unsupported version or truncated payload.
    """
    if len(data) < HEADER.size:
        raise ValidationError("HPTH data shorter than its header", code="range")
    magic, version, m, H, n, replicas = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValidationError(f"not an HPTH block (magic {magic!r})", code="range")
    if version != VERSION:
        raise ValidationError(f"unsupported HPTH version {version}", code="range")
    expected = HEADER.size + 8 * n * replicas
    if len(data) != expected:
        raise ValidationError(
            f"HPTH payload is {len(data)} bytes, header implies {expected}", code="range"
        )
    values = np.frombuffer(data, dtype="<f8", offset=HEADER.size).reshape(replicas, n)
    return HpthBlock(version=version, m=m, H=H, values=values.astype(np.float64))


def read_paths(path: Path) -> HpthBlock:
    return decode_paths(path.read_bytes())
