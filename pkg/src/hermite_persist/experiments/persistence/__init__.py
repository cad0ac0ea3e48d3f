"""Persistence probability commands."""

from hermite_persist.experiments.persistence.boundary import BoundaryCommand
from hermite_persist.experiments.persistence.exponent import ExponentCommand
from hermite_persist.experiments.persistence.gap import GapCommand
from hermite_persist.experiments.persistence.persistence import PersistenceCommand
from hermite_persist.experiments.persistence.switch import SwitchCommand
from hermite_persist.experiments.persistence.tail import TailCommand

__all__ = [
    "BoundaryCommand",
    "ExponentCommand",
    "GapCommand",
    "PersistenceCommand",
    "SwitchCommand",
    "TailCommand",
]
