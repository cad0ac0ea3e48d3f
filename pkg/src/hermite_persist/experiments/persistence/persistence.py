"""Persistence probability command.

Provides the ``persistence`` command estimating P(sup_{t<=T} Y_t <= b) over
a horizon grid and a list of barriers on one shared path set.
"""

from __future__ import annotations

from typing import Annotated

from pydantic import BaseModel, BeforeValidator, Field

from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.registry import register_command
from hermite_persist.experiments.options import HorizonOptions, parse_number_list
from hermite_persist.experiments.persistence.service import PersistenceService
from hermite_persist.experiments.process.service import HermitePathConfig

PERSISTENCE_HEADER = ["T", "barrier", "survivors", "replicas", "p_hat", "stderr"]


class PersistenceOptions(HorizonOptions):
    """Options for persistence estimation."""

    barriers: Annotated[list[float], BeforeValidator(parse_number_list)] = Field(
        default=[0.0],
        min_length=1,
        description="Barriers b, e.g. --barriers=-1,0,1 (inf allowed).",
    )


@register_command("persistence", "persistence")
class PersistenceCommand(ExperimentCommand):
    """Command estimating persistence probabilities."""

    @property
    def name(self) -> str:
        return "persistence"

    @property
    def description(self) -> str:
        return (
            "Estimate persistence probabilities P(sup_{t<=T} Y_t <= b) of the Hermite process "
            "for every horizon T and barrier b (strict < for b = 0) from shared replicas."
        )

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(default_budget_minutes=5.0, outputs=("persistence.csv",))

    @property
    def options_model(self) -> type[BaseModel]:
        return PersistenceOptions

    def execute(self, options: PersistenceOptions, context: RunContext) -> CommandResult:
        """Estimate and write the persistence table."""
        service = PersistenceService(context.settings, workers=context.workers)
        try:
            config = HermitePathConfig(
                options.m, options.H, max(options.horizons), options.normalization, options.driver
            )
            estimates = service.estimate_grid(
                config,
                options.horizons,
                options.barriers,
                options.replicas,
                options.seed,
                options.oversample,
            )
        except Exception as e:
            raise handle_error(e, context="Persistence estimation") from e

        path = context.writer.write_csv(
            "persistence.csv", PERSISTENCE_HEADER, (e.row() for e in estimates)
        )
        return CommandResult(
            summary={
                "config": config.to_dict(),
                "seed": service.resolve_seed(options.seed),
                "oversample": options.oversample,
                "estimates": [e.to_dict() for e in estimates],
            },
            files=[path],
            timings=service.all_timings(),
        )
