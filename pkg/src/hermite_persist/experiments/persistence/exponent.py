"""Persistence exponent command.

Provides the ``exponent`` command: persistence over a geometric horizon grid
at one barrier followed by the weighted log-log fit of theta.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, Field, field_validator

from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.registry import register_command
from hermite_persist.experiments.options import HorizonOptions
from hermite_persist.experiments.persistence.persistence import PERSISTENCE_HEADER
from hermite_persist.experiments.persistence.service import (
    MIN_SURVIVORS,
    PersistenceService,
    log_correction_metadata,
)
from hermite_persist.experiments.process.service import HermitePathConfig


class ExponentOptions(HorizonOptions):
    """Options for the exponent fit."""

    barrier: float = Field(default=0.0, description="Barrier b.")
    min_survivors: int = Field(
        default=MIN_SURVIVORS, ge=1, description="Survivor floor for a horizon to enter the fit."
    )

    @field_validator("barrier")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("barrier must be finite for an exponent fit")
        return v


@register_command("persistence", "exponent")
class ExponentCommand(ExperimentCommand):
    """Command fitting the persistence exponent theta."""

    @property
    def name(self) -> str:
        return "exponent"

    @property
    def description(self) -> str:
        return (
            "Estimate persistence over a horizon grid and fit theta by weighted least squares "
            "of log p on log T with a delta-method 95% interval (expected 1 - H)."
        )

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(
            default_budget_minutes=10.0, outputs=("persistence.csv", "exponent.json")
        )

    @property
    def options_model(self) -> type[BaseModel]:
        return ExponentOptions

    def execute(self, options: ExponentOptions, context: RunContext) -> CommandResult:
        """Estimate, fit and write."""
        service = PersistenceService(context.settings, workers=context.workers)
        try:
            config = HermitePathConfig(
                options.m, options.H, max(options.horizons), options.normalization, options.driver
            )
            estimates = service.estimate_grid(
                config,
                options.horizons,
                [options.barrier],
                options.replicas,
                options.seed,
                options.oversample,
            )
        except Exception as e:
            raise handle_error(e, context="Exponent estimation") from e

        table = context.writer.write_csv(
            "persistence.csv", PERSISTENCE_HEADER, (e.row() for e in estimates)
        )
        fit = service.fit_exponent(estimates, options.min_survivors)
        expected = 1.0 - options.H if options.driver == "long_memory" else 0.5
        summary = {
            **fit.to_dict(),
            "barrier": options.barrier,
            "expected_theta": expected,
            "log_correction": log_correction_metadata(options.m),
            "config": config.to_dict(),
            "seed": service.resolve_seed(options.seed),
        }
        report = context.writer.write_json("exponent.json", summary)
        return CommandResult(summary=summary, files=[table, report], timings=service.all_timings())
