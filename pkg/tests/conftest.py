"""Pytest configuration and fixtures."""

from __future__ import annotations

import os
from collections.abc import Iterator
from pathlib import Path

import pytest

import hermite_persist.experiments  # noqa: F401
from hermite_persist.core.base import RunContext
from hermite_persist.core.cache import cache
from hermite_persist.core.config import Settings, get_settings
from hermite_persist.core.registry import registry


@pytest.fixture(autouse=True)
def clear_cache() -> Iterator[None]:
    """Clear the numerical table cache before and after each test."""
    cache.clear()
    yield
    cache.clear()


@pytest.fixture(autouse=True)
def restore_registry() -> Iterator[None]:
    """Restore the command registry after tests that register or clear commands."""
    saved = dict(registry._commands)
    yield
    registry._commands.clear()
    registry._commands.update(saved)


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    """Drop HERMITE_PERSIST_* variables and the cached settings."""
    for key in list(os.environ):
        if key.startswith("HERMITE_PERSIST_"):
            monkeypatch.delenv(key)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def settings() -> Settings:
    """Default settings with small chunks so tests cross chunk boundaries."""
    return Settings(chunk_size=64)


@pytest.fixture
def run_context(tmp_path: Path, settings: Settings) -> RunContext:
    """Run context writing into a temporary directory."""
    return RunContext.create(settings, output_dir=tmp_path / "out")
