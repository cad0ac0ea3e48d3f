"""Hermite process simulation and persistence statistics toolkit."""

from hermite_persist.core.base import ExperimentCommand, ExperimentService, RunContext
from hermite_persist.core.config import Settings, get_settings
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
from hermite_persist.core.registry import register_command, registry

__version__ = "0.1.0"

__all__ = [
    # Base classes
    "ExperimentService",
    "ExperimentCommand",
    "RunContext",
    # Settings
    "Settings",
    "get_settings",
    # Models
    "CommandMetadata",
    "CommandResult",
    "RunManifest",
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
