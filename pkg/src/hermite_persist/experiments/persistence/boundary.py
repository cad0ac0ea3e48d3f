"""Barrier comparison command.

Provides the ``boundary`` command comparing barriers -1, 0, +1 and the
late-start event sup_{[1,T]} Y <= -1 on shared replicas.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.registry import register_command
from hermite_persist.experiments.options import HorizonOptions
from hermite_persist.experiments.persistence.service import PersistenceService
from hermite_persist.experiments.process.service import HermitePathConfig


class BoundaryOptions(HorizonOptions):
    """Options for the barrier comparison."""

    slack: float = Field(
        default=0.0, ge=0.0, description="Extra width when checking mutual CI overlap."
    )


@register_command("persistence", "boundary")
class BoundaryCommand(ExperimentCommand):
    """Command comparing persistence across barriers."""

    @property
    def name(self) -> str:
        return "boundary"

    @property
    def description(self) -> str:
        return (
            "Estimate persistence at barriers -1, 0, +1 and the late-start event on the same "
            "replicas, report p(-1)/p(0) and p(0)/p(+1), and fit an exponent per barrier."
        )

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(default_budget_minutes=15.0, outputs=("boundary.csv",))

    @property
    def options_model(self) -> type[BaseModel]:
        return BoundaryOptions

    def execute(self, options: BoundaryOptions, context: RunContext) -> CommandResult:
        """Compare barriers."""
        service = PersistenceService(context.settings, workers=context.workers)
        try:
            config = HermitePathConfig(
                options.m, options.H, max(options.horizons), options.normalization, options.driver
            )
            table = service.boundary_comparison(
                config, options.horizons, options.replicas, options.seed, options.oversample
            )
        except Exception as e:
            raise handle_error(e, context="Barrier comparison") from e

        path = context.writer.write_csv(
            "boundary.csv",
            ["T", "barrier", "event", "survivors", "replicas", "p_hat", "stderr"],
            (
                [e.horizon, e.barrier, e.event, e.survivors, e.replicas, e.p_hat, e.stderr]
                for e in table.estimates
            ),
        )
        fits = {k: (f.to_dict() if f is not None else None) for k, f in table.fits.items()}
        sup_fits = [table.fits[k] for k in ("-1", "0", "+1")]
        overlap = None
        if all(f is not None for f in sup_fits):
            overlap = all(
                a.covers(b.theta, options.slack)
                for a in sup_fits
                for b in sup_fits
                if a is not None and b is not None
            )
        return CommandResult(
            summary={
                "ratios": table.ratios(),
                "fits": fits,
                "mutual_overlap": overlap,
                "normalization": config.normalization,
                "config": config.to_dict(),
                "seed": service.resolve_seed(options.seed),
            },
            files=[path],
            timings=service.all_timings(),
        )
