"""Hermite process path commands."""

from hermite_persist.experiments.process.moments import MomentsCommand
from hermite_persist.experiments.process.simulate import SimulateCommand

__all__ = [
    "MomentsCommand",
    "SimulateCommand",
]
