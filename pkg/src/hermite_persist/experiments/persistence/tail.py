"""Tail decay command.

Provides the ``tail`` command estimating P(max_k |Z_k| > u) on unit-variance
paths and fitting the stretch exponent gamma.
"""

from __future__ import annotations

from typing import Annotated

from pydantic import BaseModel, BeforeValidator, Field

from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.registry import register_command
from hermite_persist.experiments.options import PathOptions, parse_number_list
from hermite_persist.experiments.persistence.service import PersistenceService
from hermite_persist.experiments.process.service import HermitePathConfig


class TailOptions(PathOptions):
    """Options for tail estimation."""

    levels: Annotated[list[float], BeforeValidator(parse_number_list)] = Field(
        default=[1.0, 2.0, 3.0, 4.0, 5.0], min_length=1, description="Increasing levels u."
    )
    replicas: int = Field(default=100_000, ge=1, le=100_000_000, description="Replicas.")


@register_command("persistence", "tail")
class TailCommand(ExperimentCommand):
    """Command fitting the tail stretch exponent."""

    @property
    def name(self) -> str:
        return "tail"

    @property
    def description(self) -> str:
        return (
            "Estimate P(max_k |Z_{k/n}| > u) on unit-variance paths and fit gamma from "
            "log(-log tail) = c + gamma log u (expected 2/m)."
        )

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(default_budget_minutes=10.0, outputs=("tail.csv",))

    @property
    def options_model(self) -> type[BaseModel]:
        return TailOptions

    def execute(self, options: TailOptions, context: RunContext) -> CommandResult:
        """Estimate the tail curve."""
        service = PersistenceService(context.settings, workers=context.workers)
        try:
            config = HermitePathConfig(
                options.m, options.H, options.n, "empirical_unit_variance", options.driver
            )
            curve = service.estimate_tail(config, options.levels, options.replicas, options.seed)
        except Exception as e:
            raise handle_error(e, context="Tail estimation") from e

        path = context.writer.write_csv(
            "tail.csv", ["u", "hits", "replicas", "tail", "stderr"], curve.rows()
        )
        return CommandResult(
            summary={
                **curve.to_dict(),
                "expected_gamma": 2.0 / options.m,
                "config": config.to_dict(),
                "seed": service.resolve_seed(options.seed),
            },
            files=[path],
            timings=service.all_timings(),
        )
