"""Decorrelation battery command.

Provides the ``battery`` command running the fixed 20-configuration
decorrelation battery for the Rosenblatt case.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.registry import register_command
from hermite_persist.experiments.decorrelation.service import DecorrelationService
from hermite_persist.experiments.options import SeedOptions


class BatteryOptions(SeedOptions):
    """Options for the decorrelation battery."""

    replicas: int = Field(default=100_000, ge=1, le=10_000_000, description="Replicas per case.")
    n: int = Field(default=1024, ge=4, le=2**20, description="Grid points per path.")
    z_threshold: float = Field(default=-3.0, le=0.0, description="One-sided failure threshold.")


@register_command("decorrelation", "battery")
class BatteryCommand(ExperimentCommand):
    """Command running the decorrelation battery."""

    @property
    def name(self) -> str:
        return "battery"

    @property
    def description(self) -> str:
        return (
            "Run 20 decorrelation configurations (d in {2,3,4}, H in {0.6,0.7,0.8}, mixed "
            "levels, m = 2) and count reports with z-score below the threshold."
        )

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(default_budget_minutes=10.0, outputs=("battery.csv",))

    @property
    def options_model(self) -> type[BaseModel]:
        return BatteryOptions

    def execute(self, options: BatteryOptions, context: RunContext) -> CommandResult:
        """Run the battery."""
        service = DecorrelationService(context.settings, workers=context.workers)
        try:
            result = service.run_battery(
                options.replicas, options.seed, options.n, z_threshold=options.z_threshold
            )
        except Exception as e:
            raise handle_error(e, context="Decorrelation battery") from e

        path = context.writer.write_csv(
            "battery.csv",
            ["case", "H", "times", "levels", "joint", "product", "margin", "stderr", "z_score"],
            (
                [
                    i,
                    r.config["H"],
                    " ".join(str(t) for t in r.partition.times),
                    " ".join(repr(a) for a in r.partition.levels),
                    r.joint[0],
                    r.product,
                    r.margin,
                    r.estimate.margin_stderr,
                    r.z_score,
                ]
                for i, r in enumerate(result.reports)
            ),
        )
        summary = result.to_dict()
        summary["seed"] = service.resolve_seed(options.seed)
        return CommandResult(summary=summary, files=[path], timings=service.all_timings())
