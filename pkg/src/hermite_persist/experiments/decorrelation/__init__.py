"""Decorrelation and Gaussian correlation commands."""

from hermite_persist.experiments.decorrelation.battery import BatteryCommand
from hermite_persist.experiments.decorrelation.decorrelate import DecorrelateCommand
from hermite_persist.experiments.decorrelation.gci import GciCommand

__all__ = [
    "BatteryCommand",
    "DecorrelateCommand",
    "GciCommand",
]
