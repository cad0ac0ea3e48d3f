"""Stationary Gaussian sequence commands.

Provides sampling and covariance diagnostics for the driving sequence.
"""

from hermite_persist.experiments.gaussian.covariance import CovarianceCommand
from hermite_persist.experiments.gaussian.sample import SampleCommand

__all__ = [
    "CovarianceCommand",
    "SampleCommand",
]
