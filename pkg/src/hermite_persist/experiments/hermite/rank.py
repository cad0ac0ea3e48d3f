"""Hermite rank command.

Provides the ``rank`` command: expansion coefficients, Hermite rank and the
convexity audit of a built-in function, or of the whole convexity battery.
"""

from __future__ import annotations

from typing import Annotated, Any

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field

from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.registry import register_command
from hermite_persist.experiments.hermite.functions import CONVEXITY_BATTERY, get_function
from hermite_persist.experiments.hermite.service import HermiteService
from hermite_persist.experiments.options import parse_number_list


class RankOptions(BaseModel):
    """Options for the rank command."""

    model_config = ConfigDict(populate_by_name=True)

    function: str = Field(default="abs-centered", description="Built-in function name.")
    coefficients: Annotated[list[float] | None, BeforeValidator(parse_number_list)] = Field(
        default=None, description="Monomial coefficients a0,a1,... for 'polynomial'."
    )
    max_order: int = Field(default=8, ge=0, le=60, description="Highest expansion order J.")
    quad_order: int | None = Field(
        default=None, ge=1, le=400, description="Gauss-Hermite nodes (default from settings)."
    )
    threshold: float | None = Field(
        default=None, gt=0.0, description="Relative rank threshold (default 1e-8)."
    )
    battery: bool = Field(default=False, description="Audit the five-function convexity battery.")
    grid_min: float = Field(default=-6.0, description="Convexity grid lower end.")
    grid_max: float = Field(default=6.0, description="Convexity grid upper end.")
    grid_points: int = Field(default=241, ge=3, le=100_000, description="Convexity grid size.")


@register_command("hermite", "rank")
class RankCommand(ExperimentCommand):
    """Command reporting Hermite coefficients and rank."""

    @property
    def name(self) -> str:
        return "rank"

    @property
    def description(self) -> str:
        return (
            "Expand a built-in function in probabilists' Hermite polynomials, report the "
            "Hermite rank, and check that grid-convex functions have rank at most 2."
        )

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(
            monte_carlo=False, default_budget_minutes=0.1, outputs=("coefficients.csv",)
        )

    @property
    def options_model(self) -> type[BaseModel]:
        return RankOptions

    def execute(self, options: RankOptions, context: RunContext) -> CommandResult:
        """Expand, rank and audit."""
        service = HermiteService(context.settings, workers=context.workers)
        grid = np.linspace(options.grid_min, options.grid_max, options.grid_points)
        names = list(CONVEXITY_BATTERY) if options.battery else [options.function]

        reports: list[dict[str, Any]] = []
        rows: list[list[Any]] = []
        try:
            with service.timed("hermite_poly"):
                for name in names:
                    fn = get_function(name, options.coefficients)
                    expansion = service.expansion_coeffs(
                        fn, options.max_order, options.quad_order, kinks=fn.kinks
                    )
                    rank = service.hermite_rank(expansion, options.threshold)
                    audit = service.convexity_rank_audit(
                        fn,
                        grid,
                        max_order=options.max_order,
                        kinks=fn.kinks,
                        threshold=options.threshold,
                    )
                    reports.append(
                        {
                            "function": name,
                            "rank": rank.rank if rank.found else "not found",
                            "threshold": rank.threshold,
                            "coefficients": expansion.coeffs.tolist(),
                            "residual": expansion.residual,
                            "method": expansion.method,
                            "is_convex_on_grid": audit.is_convex_on_grid,
                            "violation": audit.violation,
                        }
                    )
                    rows.extend(
                        [name, j, c, s]
                        for j, (c, s) in enumerate(
                            zip(expansion.coeffs, expansion.normalized, strict=True)
                        )
                    )
        except Exception as e:
            raise handle_error(e, context="Hermite rank") from e

        path = context.writer.write_csv(
            "coefficients.csv", ["function", "j", "c_j", "normalized"], rows
        )
        summary: dict[str, Any] = (
            {"functions": reports, "violations": sum(r["violation"] for r in reports)}
            if options.battery
            else reports[0]
        )
        return CommandResult(summary=summary, files=[path], timings=service.all_timings())
