"""Tests for CacheService."""

from __future__ import annotations

import threading

from hermite_persist.core.cache import CacheService, cache


def counting_factory(value):
    calls = []

    def factory():
        calls.append(1)
        return value

    return factory, calls


class TestCacheService:
    """Tests for CacheService class."""

    def test_get_or_set_with_miss_then_hit(self):
        """Test get_or_set computes once and then serves the cached value."""
        factory, calls = counting_factory("computed-value")
        assert cache.get_or_set(("embedding", 0.3, 64), factory) == "computed-value"
        assert cache.get_or_set(("embedding", 0.3, 64), factory) == "computed-value"
        assert len(calls) == 1

    def test_clear(self):
        """Cleared entries are rebuilt on the next lookup."""
        factory, calls = counting_factory("value")
        cache.get_or_set("key1", factory)
        cache.clear()
        cache.get_or_set("key1", factory)
        assert len(calls) == 2

    def test_lru_eviction(self):
        """Least recently used entries are evicted beyond maxsize."""
        small = CacheService(maxsize=2)
        builds = {key: counting_factory(key) for key in "abc"}
        small.get_or_set("a", builds["a"][0])
        small.get_or_set("b", builds["b"][0])
        small.get_or_set("a", builds["a"][0])
        small.get_or_set("c", builds["c"][0])
        small.get_or_set("a", builds["a"][0])
        small.get_or_set("b", builds["b"][0])
        assert len(builds["a"][1]) == 1
        assert len(builds["b"][1]) == 2

    def test_concurrent_get_or_set_builds_once(self):
        """Threads racing on one key see a single factory call."""
        local = CacheService()
        calls = []
        barrier = threading.Barrier(8)

        def factory():
            calls.append(1)
            return object()

        results = []

        def worker():
            barrier.wait()
            results.append(local.get_or_set("shared", factory))

        threads = [threading.Thread(target=worker) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(calls) == 1
        assert all(r is results[0] for r in results)
