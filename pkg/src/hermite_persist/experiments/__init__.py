"""Experiment families.

Importing this package registers every command with the global registry.
"""

from hermite_persist.experiments import (
    decorrelation,
    gaussian,
    hermite,
    persistence,
    process,
)

__all__ = [
    "decorrelation",
    "gaussian",
    "hermite",
    "persistence",
    "process",
]
