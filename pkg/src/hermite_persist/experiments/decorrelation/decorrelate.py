"""Decorrelation command.

Provides the ``decorrelate`` command comparing the joint probability of
block-wise increment suprema with the product of the marginals.
"""

from __future__ import annotations

from typing import Annotated, Literal

from pydantic import BaseModel, BeforeValidator, Field

from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.registry import register_command
from hermite_persist.experiments.decorrelation.service import (
    DecorrelationReport,
    DecorrelationService,
    PartitionSpec,
)
from hermite_persist.experiments.options import (
    PathOptions,
    parse_horizon_grid,
    parse_number_list,
)
from hermite_persist.experiments.process.service import HermitePathConfig


class DecorrelateOptions(PathOptions):
    """Options for the decorrelation check."""

    replicas: int = Field(default=100_000, ge=1, le=100_000_000, description="Replicas.")
    times: Annotated[list[float], BeforeValidator(parse_number_list)] = Field(
        default=[0.0, 0.5, 1.0], min_length=2, description="Block boundaries in [0, 1]."
    )
    levels: Annotated[list[float], BeforeValidator(parse_number_list)] = Field(
        default=[0.5, 0.5], min_length=1, description="Level a_i per block (inf allowed)."
    )
    mode: Literal["continuous", "discrete"] = Field(
        default="continuous",
        description="Rescaled paths, or raw partial sums S_k = sum_{i<=k} h_m(X_i).",
    )
    indices: Annotated[list[int] | None, BeforeValidator(parse_horizon_grid)] = Field(
        default=None, description="Discrete mode: indices n_0 < ... < n_d (default from times)."
    )


@register_command("decorrelation", "decorrelate")
class DecorrelateCommand(ExperimentCommand):
    """Command checking the decorrelation inequality."""

    @property
    def name(self) -> str:
        return "decorrelate"

    @property
    def description(self) -> str:
        return (
            "Estimate P(all blocks stay below their levels) and the product of the per-block "
            "probabilities on shared replicas; report margin and one-sided z-score."
        )

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(default_budget_minutes=1.0, outputs=("decorrelation.json",))

    @property
    def options_model(self) -> type[BaseModel]:
        return DecorrelateOptions

    def execute(self, options: DecorrelateOptions, context: RunContext) -> CommandResult:
        """Run the check."""
        service = DecorrelationService(context.settings, workers=context.workers)
        try:
            config = HermitePathConfig(
                options.m, options.H, options.n, options.normalization, options.driver
            )
            report: DecorrelationReport
            if options.mode == "continuous":
                partition = PartitionSpec.from_unit(options.times, options.levels, options.n)
                report = service.check_decorrelation(
                    config, partition, options.replicas, options.seed
                )
            else:
                indices = options.indices or [round(t * (options.n - 1)) for t in options.times]
                spec = service.process.driving_covariance(config)
                sample = service.process.gaussian.sample(spec, options.replicas, options.seed)
                report = service.check_discrete_inequality(
                    indices, options.levels, sample, options.m
                )
        except Exception as e:
            raise handle_error(e, context="Decorrelation check") from e

        summary = {
            **report.to_dict(),
            "mode": options.mode,
            "seed": service.resolve_seed(options.seed),
        }
        path = context.writer.write_json("decorrelation.json", summary)
        return CommandResult(summary=summary, files=[path], timings=service.all_timings())
