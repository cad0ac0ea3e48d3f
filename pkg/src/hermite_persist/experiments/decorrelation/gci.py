"""Gaussian correlation inequality command.

Provides the ``gci`` command. Sets are given as ``box:w1,w2,...`` (half-widths,
``inf`` allowed) or ``ball:r`` / ``ball:r@i,j`` (radius over coordinates).
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, Field, field_validator

from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.registry import register_command
from hermite_persist.experiments.decorrelation.service import DecorrelationService, SetSpec
from hermite_persist.experiments.options import SeedOptions


def parse_set(text: str) -> SetSpec:
    """Parse a set descriptor such as ``box:1,inf`` or ``ball:1.5@0,2``."""
    kind, _, body = text.strip().partition(":")
    if kind == "box":
        return SetSpec.box(*(float(w) for w in body.split(",") if w.strip()))
    if kind == "ball":
        radius, _, coords = body.partition("@")
        return SetSpec.ball(float(radius), [int(c) for c in coords.split(",") if c.strip()])
    raise ValueError(f"unknown set '{text}' (expected box:... or ball:...)")


def correlation_matrix(
    dimension: int, correlation: float, structure: Literal["ar", "equicorrelated"]
) -> NDArray[np.float64]:
    """rho^|i-j| (ar) or 1 on the diagonal and rho elsewhere (equicorrelated)."""
    i = np.arange(dimension)
    lag = np.abs(i[:, None] - i[None, :])
    if structure == "ar":
        out: NDArray[np.float64] = np.power(correlation, lag).astype(np.float64)
        return out
    return np.where(lag == 0, 1.0, correlation)


class GciOptions(SeedOptions):
    """Options for the Gaussian correlation check."""

    replicas: int = Field(default=1_000_000, ge=2, le=100_000_000, description="Replicas.")
    dimension: int = Field(default=2, ge=1, le=4, description="Gaussian dimension.")
    correlation: float = Field(default=0.8, gt=-1.0, lt=1.0, description="Correlation rho.")
    structure: Literal["ar", "equicorrelated"] = Field(
        default="ar", description="Covariance structure."
    )
    first: str = Field(default="box:1,inf", description="First set descriptor.")
    second: str = Field(default="box:inf,1", description="Second set descriptor.")

    @field_validator("first", "second")
    @classmethod
    def _parsable(cls, v: str) -> str:
        parse_set(v)
        return v


@register_command("decorrelation", "gci")
class GciCommand(ExperimentCommand):
    """Command checking P(C1 and C2) >= P(C1) P(C2)."""

    @property
    def name(self) -> str:
        return "gci"

    @property
    def description(self) -> str:
        return (
            "Monte Carlo check of the Gaussian correlation inequality for two centered "
            "symmetric convex sets (boxes or balls), with an exact oracle for two boxes."
        )

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(default_budget_minutes=1.0, outputs=("gci.json",))

    @property
    def options_model(self) -> type[BaseModel]:
        return GciOptions

    def execute(self, options: GciOptions, context: RunContext) -> CommandResult:
        """Run the check."""
        service = DecorrelationService(context.settings, workers=context.workers)
        try:
            cov = correlation_matrix(options.dimension, options.correlation, options.structure)
            report = service.gci_sanity(
                cov,
                (parse_set(options.first), parse_set(options.second)),
                options.replicas,
                options.seed,
            )
        except Exception as e:
            raise handle_error(e, context="Gaussian correlation check") from e

        summary = {
            **report.to_dict(),
            "covariance": cov.tolist(),
            "seed": service.resolve_seed(options.seed),
        }
        path = context.writer.write_json("gci.json", summary)
        return CommandResult(summary=summary, files=[path], timings=service.all_timings())
