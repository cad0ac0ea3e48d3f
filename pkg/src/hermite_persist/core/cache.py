"""In-memory caching utilities.

Provides an LRU cache for immutable numerical tables (circulant spectra,
quadrature nodes) that are expensive to rebuild and shared across threads.
"""

from __future__ import annotations

import threading
from collections.abc import Callable, Hashable
from typing import Any, TypeVar

from cachetools import LRUCache

T = TypeVar("T")


class CacheService:
    """
    LRU cache keyed by hashable parameter tuples.

    Thread-safe. Cached values must be treated as read-only by callers.
    """

    def __init__(self, maxsize: int = 64) -> None:
        self._cache: LRUCache[Hashable, Any] = LRUCache(maxsize=maxsize)
        self._lock = threading.RLock()

    def get_or_set(self, key: Hashable, factory: Callable[[], T]) -> T:
        """
        Get from cache or compute and cache the value.

        Args:
            key: Cache key.
            factory: Function computing the value on a miss.

        Returns:
            The cached or newly computed value.
        """
        with self._lock:
            if key in self._cache:
                value: T = self._cache[key]
                return value
            value = factory()
            self._cache[key] = value
            return value

    def clear(self) -> None:
        """Clear all cached entries."""
        with self._lock:
            self._cache.clear()


# Global cache instance
cache = CacheService()
