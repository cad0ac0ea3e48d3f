"""Tests for the HPTH binary path format."""

from __future__ import annotations

import numpy as np
import pytest

from hermite_persist.core.errors import ValidationError
from hermite_persist.experiments.process.codec import (
    HEADER,
    MAGIC,
    decode_paths,
    encode_paths,
    read_paths,
)


class TestHpth:
    """Tests for encode/decode."""

    def test_round_trip(self, tmp_path):
        values = np.arange(12, dtype=np.float64).reshape(3, 4) / 7.0
        path = tmp_path / "paths.hpth"
        path.write_bytes(encode_paths(values, 2, 0.7))
        block = read_paths(path)
        assert (block.version, block.m, block.H) == (1, 2, 0.7)
        assert (block.replicas, block.n) == (3, 4)
        np.testing.assert_array_equal(block.values, values)

    def test_layout(self):
        data = encode_paths(np.zeros((2, 5)), 3, 0.8)
        assert data[:4] == MAGIC
        assert HEADER.size == 34
        assert len(data) == HEADER.size + 2 * 5 * 8

    def test_bad_magic(self):
        data = bytearray(encode_paths(np.zeros((1, 2)), 2, 0.7))
        data[:4] = b"XXXX"
        with pytest.raises(ValidationError, match="magic"):
            decode_paths(bytes(data))

    def test_bad_version(self):
        data = bytearray(encode_paths(np.zeros((1, 2)), 2, 0.7))
        data[4:6] = (2).to_bytes(2, "little")
        with pytest.raises(ValidationError, match="version"):
            decode_paths(bytes(data))

    def test_truncated(self):
        data = encode_paths(np.zeros((2, 2)), 2, 0.7)
        with pytest.raises(ValidationError):
            decode_paths(data[:-8])
        with pytest.raises(ValidationError):
            decode_paths(data[:10])
