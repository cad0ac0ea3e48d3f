"""Hermite polynomial commands."""

from hermite_persist.experiments.hermite.rank import RankCommand

__all__ = ["RankCommand"]
