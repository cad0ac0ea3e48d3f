"""Hermite Persist Core - Base classes and utilities."""

from hermite_persist.core.base import ExperimentCommand, ExperimentService, RunContext
from hermite_persist.core.cache import cache
from hermite_persist.core.config import Settings, get_settings, load_config_file
from hermite_persist.core.errors import (
    ConfigurationError,
    DegenerateFitError,
    EmbeddingError,
    HermiteError,
    InsufficientDataError,
    NumericalError,
    ValidationError,
    WorkerError,
    handle_error,
)
from hermite_persist.core.models import CommandMetadata, CommandResult, RunManifest
from hermite_persist.core.parallel import parallel_map
from hermite_persist.core.registry import register_command, registry
from hermite_persist.core.rng import Stream, replica_generator, standard_normal_rows

__all__ = [
    # Base classes
    "ExperimentService",
    "ExperimentCommand",
    "RunContext",
    # Cache
    "cache",
    # Settings
    "Settings",
    "get_settings",
    "load_config_file",
    # Models
    "CommandMetadata",
    "CommandResult",
    "RunManifest",
    # Parallelism and randomness
    "parallel_map",
    "Stream",
    "replica_generator",
    "standard_normal_rows",
    # Registry
    "registry",
    "register_command",
    # Errors
    "HermiteError",
    "ValidationError",
    "ConfigurationError",
    "InsufficientDataError",
    "DegenerateFitError",
    "EmbeddingError",
    "NumericalError",
    "WorkerError",
    "handle_error",
]
