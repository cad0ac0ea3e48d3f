"""Barrier switch command.

Provides the ``switch`` command: the empirical product bound
P(sup_{[1,T]} Y <= -1) >= P(Y_1 <= -2) P(sup_{[0,T-1]} Y <= 1).
"""

from __future__ import annotations

from pydantic import BaseModel

from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.registry import register_command
from hermite_persist.experiments.options import HorizonOptions
from hermite_persist.experiments.persistence.service import PersistenceService
from hermite_persist.experiments.process.service import HermitePathConfig


@register_command("persistence", "switch")
class SwitchCommand(ExperimentCommand):
    """Command checking the barrier-switch product bound."""

    @property
    def name(self) -> str:
        return "switch"

    @property
    def description(self) -> str:
        return (
            "Check P(sup_{[1,T]} Y <= -1) >= P(Y_1 <= -2) * P(sup_{[0,T-1]} Y <= 1) on shared "
            "replicas with a one-sided z-score per horizon."
        )

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(default_budget_minutes=5.0, outputs=("switch.csv",))

    @property
    def options_model(self) -> type[BaseModel]:
        return HorizonOptions

    def execute(self, options: HorizonOptions, context: RunContext) -> CommandResult:
        """Run the check."""
        service = PersistenceService(context.settings, workers=context.workers)
        try:
            config = HermitePathConfig(
                options.m, options.H, max(options.horizons), options.normalization, options.driver
            )
            rows = service.barrier_switch_check(
                config, options.horizons, options.replicas, options.seed, options.oversample
            )
        except Exception as e:
            raise handle_error(e, context="Barrier switch check") from e

        path = context.writer.write_csv(
            "switch.csv",
            ["T", "left", "right", "margin", "stderr", "z_score"],
            (
                [
                    r.horizon,
                    r.margin.joint[0],
                    r.margin.product,
                    r.margin.margin,
                    r.margin.margin_stderr,
                    r.margin.z_score,
                ]
                for r in rows
            ),
        )
        return CommandResult(
            summary={
                "rows": [r.to_dict() for r in rows],
                "min_z_score": min(r.margin.z_score for r in rows),
                "config": config.to_dict(),
                "seed": service.resolve_seed(options.seed),
            },
            files=[path],
            timings=service.all_timings(),
        )
