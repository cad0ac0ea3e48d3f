"""Tests for keyed random streams."""

from __future__ import annotations

import numpy as np

from hermite_persist.core.rng import Stream, replica_generator, standard_normal_rows


class TestReplicaGenerator:
    """Draws depend only on (seed, replica, stream)."""

    def test_reproducible(self):
        a = replica_generator(42, 3).standard_normal(16)
        b = replica_generator(42, 3).standard_normal(16)
        np.testing.assert_array_equal(a, b)

    def test_replicas_differ(self):
        a = replica_generator(42, 0).standard_normal(16)
        b = replica_generator(42, 1).standard_normal(16)
        assert not np.array_equal(a, b)

    def test_seeds_differ(self):
        a = replica_generator(1, 0).standard_normal(16)
        b = replica_generator(2, 0).standard_normal(16)
        assert not np.array_equal(a, b)

    def test_streams_differ(self):
        a = replica_generator(42, 0, Stream.GAUSSIAN).standard_normal(16)
        b = replica_generator(42, 0, Stream.CHOLESKY).standard_normal(16)
        c = replica_generator(42, 0, Stream.GCI).standard_normal(16)
        assert not np.array_equal(a, b)
        assert not np.array_equal(b, c)

    def test_full_64_bit_seed(self):
        seed = 2**64 - 1
        a = replica_generator(seed, 0).standard_normal(4)
        assert np.all(np.isfinite(a))


class TestStandardNormalRows:
    """Row blocks are order independent."""

    def test_rows_match_generators(self):
        block = standard_normal_rows(9, 5, 8, 10)
        for i, replica in enumerate(range(5, 8)):
            np.testing.assert_array_equal(
                block[i], replica_generator(9, replica).standard_normal(10)
            )

    def test_split_blocks_concatenate(self):
        whole = standard_normal_rows(9, 0, 6, 4)
        parts = np.vstack([standard_normal_rows(9, 0, 2, 4), standard_normal_rows(9, 2, 6, 4)])
        np.testing.assert_array_equal(whole, parts)

    def test_empty_range(self):
        assert standard_normal_rows(9, 3, 3, 4).shape == (0, 4)
