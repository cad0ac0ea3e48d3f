"""Path simulation command.

Provides the ``simulate`` command writing Hermite-process paths as long-format
CSV (replica, k, value) or as an HPTH binary block.
"""

from __future__ import annotations

from collections.abc import Iterator
from typing import Literal

from pydantic import BaseModel, Field

from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.registry import register_command
from hermite_persist.experiments.options import PathOptions
from hermite_persist.experiments.process.codec import encode_paths
from hermite_persist.experiments.process.service import (
    HermitePathConfig,
    PathBatch,
    ProcessService,
)


class SimulateOptions(PathOptions):
    """Options for path simulation."""

    replicas: int = Field(default=100, ge=1, le=1_000_000, description="Paths to write.")
    format: Literal["csv", "binary"] = Field(default="csv", description="Output format.")


def _long_rows(batch: PathBatch) -> Iterator[list[object]]:
    for r, row in enumerate(batch.values):
        for k, value in enumerate(row.tolist(), start=1):
            yield [r, k, value]


@register_command("process", "simulate")
class SimulateCommand(ExperimentCommand):
    """Command writing simulated paths."""

    @property
    def name(self) -> str:
        return "simulate"

    @property
    def description(self) -> str:
        return (
            "Simulate discretized Hermite-process paths Z_{k/n}, k = 1..n, by Gaussian "
            "subordination and write them as CSV (replica, k, value) or HPTH binary."
        )

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(default_budget_minutes=0.5, outputs=("paths.csv", "paths.hpth"))

    @property
    def options_model(self) -> type[BaseModel]:
        return SimulateOptions

    def execute(self, options: SimulateOptions, context: RunContext) -> CommandResult:
        """Simulate and write paths."""
        service = ProcessService(context.settings, workers=context.workers)
        try:
            config = HermitePathConfig(
                options.m, options.H, options.n, options.normalization, options.driver
            )
            batch = service.simulate(config, options.replicas, options.seed)
        except Exception as e:
            raise handle_error(e, context="Path simulation") from e

        if options.format == "binary":
            path = context.writer.write_bytes(
                "paths.hpth", encode_paths(batch.values, config.m, config.H)
            )
        else:
            path = context.writer.write_csv(
                "paths.csv", ["replica", "k", "value"], _long_rows(batch)
            )
        return CommandResult(
            summary={
                "config": config.to_dict(),
                "seed": batch.seed,
                "replicas": batch.replicas,
                "scale": batch.scale,
                "format": options.format,
            },
            files=[path],
            timings=service.all_timings(),
        )
