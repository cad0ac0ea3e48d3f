"""Counter-based random streams.

Every Gaussian draw is determined by ``(seed, replica, stream)``: the Philox
key holds the seed and replica index, the high counter word holds the stream
id. Replicas can therefore be generated in any order, on any worker, and in
any chunking without changing a single bit of output.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np
from numpy.typing import NDArray

MASK64 = (1 << 64) - 1


class Stream(IntEnum):
    """Independent sub-streams of one replica."""

    GAUSSIAN = 0
    CHOLESKY = 1
    GCI = 2


def replica_generator(
    seed: int,
    replica: int,
    stream: Stream = Stream.GAUSSIAN,
) -> np.random.Generator:
    """
    Build the generator owning replica ``replica`` of run ``seed``.

    Args:
        seed: 64-bit run key.
        replica: Replica index (0-based).
        stream: Sub-stream id, so different consumers never share draws.

    Returns:
        A Philox-backed generator.
    """
    key = np.array([seed & MASK64, replica & MASK64], dtype=np.uint64)
    counter = np.array([0, 0, 0, int(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def standard_normal_rows(
    seed: int,
    start: int,
    stop: int,
    width: int,
    stream: Stream = Stream.GAUSSIAN,
) -> NDArray[np.float64]:
    """
    Draw a ``(stop - start) x width`` block of standard normals.

    Row ``i`` is a pure function of ``(seed, start + i, stream)``.
    """
    out = np.empty((max(stop - start, 0), width), dtype=np.float64)
    for row, replica in enumerate(range(start, stop)):
        replica_generator(seed, replica, stream).standard_normal(width, out=out[row])
    return out
