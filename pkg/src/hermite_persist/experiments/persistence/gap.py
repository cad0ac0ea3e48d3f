"""Discretization gap command.

Provides the ``gap`` command measuring how much persistence changes between
the unit grid and an oversampled grid, and the within-cell excursion rate.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.registry import register_command
from hermite_persist.experiments.options import ProcessOptions
from hermite_persist.experiments.persistence.service import PersistenceService
from hermite_persist.experiments.process.service import HermitePathConfig


class GapOptions(ProcessOptions):
    """Options for the discretization gap."""

    horizon: int = Field(default=1024, ge=1, le=2**20, alias="T", description="Horizon T.")
    oversample: int = Field(default=4, ge=2, le=64, description="Grid points per unit time.")
    barrier: float = Field(default=1.0, description="Barrier b.")


@register_command("persistence", "gap")
class GapCommand(ExperimentCommand):
    """Command measuring the grid-versus-supremum gap."""

    @property
    def name(self) -> str:
        return "gap"

    @property
    def description(self) -> str:
        return (
            "Compare persistence on the unit grid with an oversampled grid on the same "
            "replicas and estimate the probability of a within-cell excursion above 1."
        )

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(default_budget_minutes=5.0, outputs=("gap.json",))

    @property
    def options_model(self) -> type[BaseModel]:
        return GapOptions

    def execute(self, options: GapOptions, context: RunContext) -> CommandResult:
        """Measure the gap."""
        service = PersistenceService(context.settings, workers=context.workers)
        try:
            config = HermitePathConfig(
                options.m, options.H, options.horizon, options.normalization, options.driver
            )
            report = service.discretization_gap(
                config,
                options.horizon,
                options.replicas,
                options.seed,
                options.oversample,
                options.barrier,
            )
        except Exception as e:
            raise handle_error(e, context="Discretization gap") from e

        summary = {
            **report.to_dict(),
            "config": config.to_dict(),
            "seed": service.resolve_seed(options.seed),
        }
        path = context.writer.write_json("gap.json", summary)
        return CommandResult(summary=summary, files=[path], timings=service.all_timings())
