"""Moment scaling command.

Provides the ``moments`` command: p-th moments of the running maximum across
grid sizes, together with the exact partial-sum variance at each size.
"""

from __future__ import annotations

from typing import Annotated

from pydantic import BaseModel, BeforeValidator, Field

from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.registry import register_command
from hermite_persist.experiments.options import PathOptions, parse_horizon_grid
from hermite_persist.experiments.process.service import HermitePathConfig, ProcessService


class MomentsOptions(PathOptions):
    """Options for the moment scaling diagnostic."""

    p: float = Field(default=2.0, ge=1.0, le=16.0, description="Moment order.")
    n_grid: Annotated[list[int], BeforeValidator(parse_horizon_grid)] = Field(
        default=[1024, 2048, 4096],
        alias="ngrid",
        description="Increasing grid sizes, e.g. 1024..4096 or 1024,2048.",
    )
    replicas: int = Field(default=10_000, ge=2, le=10_000_000, description="Replicas per size.")
    tolerance: float = Field(
        default=0.15, gt=0.0, lt=1.0, description="Allowed deviation of consecutive ratios from 1."
    )


@register_command("process", "moments")
class MomentsCommand(ExperimentCommand):
    """Command checking moment stabilization of the rescaled running maximum."""

    @property
    def name(self) -> str:
        return "moments"

    @property
    def description(self) -> str:
        return (
            "Estimate E[(max_k Z_k)^p] across grid sizes n and the ratio between consecutive "
            "sizes (stabilizes as the rescaled maximum converges in moments); also reports "
            "the exact Var(S_n)."
        )

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(default_budget_minutes=2.0, outputs=("moments.csv",))

    @property
    def options_model(self) -> type[BaseModel]:
        return MomentsOptions

    def execute(self, options: MomentsOptions, context: RunContext) -> CommandResult:
        """Run the diagnostic."""
        service = ProcessService(context.settings, workers=context.workers)
        try:
            config = HermitePathConfig(
                options.m, options.H, options.n_grid[0], options.normalization, options.driver
            )
            rows = service.moment_scaling_diagnostic(
                config, options.p, options.n_grid, options.replicas, options.seed
            )
            exact = [
                service.exact_partial_sum_variance(
                    service.driving_covariance(config, row.n), config.m, row.n
                )
                for row in rows
            ]
        except Exception as e:
            raise handle_error(e, context="Moment diagnostic") from e

        path = context.writer.write_csv(
            "moments.csv",
            ["n", "moment", "stderr", "ratio", "exact_variance"],
            (
                [row.n, row.moment, row.stderr, "" if row.ratio is None else row.ratio, var]
                for row, var in zip(rows, exact, strict=True)
            ),
        )
        ratios = [row.ratio for row in rows if row.ratio is not None]
        return CommandResult(
            summary={
                "config": config.to_dict(),
                "p": options.p,
                "seed": service.resolve_seed(options.seed),
                "ratios": ratios,
                "stabilized": all(abs(r - 1.0) <= options.tolerance for r in ratios),
            },
            files=[path],
            timings=service.all_timings(),
        )
