"""Runtime settings and config-file loading.

Settings come from environment variables prefixed ``HERMITE_PERSIST_``;
command-line flags and config files are merged on top by the CLI.
"""

from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from hermite_persist.core.errors import ConfigurationError

# Documented default seed; never time-based.
DEFAULT_SEED = 42


class Settings(BaseSettings):
    """Toolkit-wide defaults, overridable by ``HERMITE_PERSIST_*`` variables."""

    model_config = SettingsConfigDict(env_prefix="HERMITE_PERSIST_", extra="ignore")

    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)
    workers: int = Field(default=1, ge=1, le=256)
    chunk_size: int = Field(default=2048, ge=1)
    clip_tolerance: float = Field(default=1e-8, ge=0.0)
    embedding_max_doublings: int = Field(default=3, ge=0, le=10)
    cholesky_cap: int = Field(default=2048, ge=1)
    quad_order: int = Field(default=80, ge=2, le=400)
    rank_threshold: float = Field(default=1e-8, gt=0.0)
    output_dir: Path = Path("results")
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    log_json: bool = False


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Get the process-wide settings (cached)."""
    return Settings()


def load_config_file(path: Path) -> dict[str, Any]:
    """
    Load a config file as a flat mapping of option names to raw values.

    JSON objects are accepted as-is. Anything else is parsed as flat
    ``key = value`` lines; blank lines and ``#`` comments are skipped and
    values stay strings for the option models to coerce.

    Args:
        path: Config file location.

    Returns:
        Mapping of option name to value.

    Raises:
        ConfigurationError: If the file is missing or malformed.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot read config file {path}: {e}", setting="config") from e

    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigurationError(
                f"Invalid JSON in {path}: {e}", setting="config", code="parameter_domain"
            ) from e
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path} must hold a JSON object", setting="config")
        return {str(k).replace("-", "_"): v for k, v in data.items()}

    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"{path}:{lineno}: expected 'key = value'", setting="config"
            )
        key, value = line.split("=", 1)
        values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values
