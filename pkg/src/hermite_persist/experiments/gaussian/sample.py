"""Gaussian sample dump command.

Provides the ``sample`` command writing raw stationary Gaussian replicas.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.registry import register_command
from hermite_persist.experiments.gaussian.service import GaussianService
from hermite_persist.experiments.options import SeedOptions


class SampleOptions(SeedOptions):
    """Options for dumping raw Gaussian samples."""

    alpha: float = Field(default=0.3, gt=0.0, lt=1.0, description="Covariance decay exponent.")
    length: int = Field(default=64, ge=1, le=2**20, description="Points per replica.")
    replicas: int = Field(default=100, ge=1, le=1_000_000, description="Replicas to write.")
    method: Literal["auto", "circulant", "cholesky"] = Field(
        default="auto", description="Sampler; auto falls back to Cholesky on embedding failure."
    )


@register_command("gaussian", "sample")
class SampleCommand(ExperimentCommand):
    """Command writing raw samples as headerless CSV."""

    @property
    def name(self) -> str:
        return "sample"

    @property
    def description(self) -> str:
        return (
            "Draw stationary Gaussian sequences with covariance (1+j^2)^(-alpha/2) and "
            "write them as headerless CSV, one replica per row."
        )

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(default_budget_minutes=0.1, outputs=("samples.csv",))

    @property
    def options_model(self) -> type[BaseModel]:
        return SampleOptions

    def execute(self, options: SampleOptions, context: RunContext) -> CommandResult:
        """Draw and write the samples."""
        service = GaussianService(context.settings, workers=context.workers)
        try:
            spec = service.make_covariance(options.alpha, options.length)
            sample = service.sample(spec, options.replicas, options.seed, options.method)
        except Exception as e:
            raise handle_error(e, context="Gaussian sampling") from e

        path = context.writer.write_matrix_csv("samples.csv", sample.data)
        return CommandResult(
            summary={
                "method": sample.method,
                "seed": sample.seed,
                "replicas": sample.replicas,
                "length": sample.length,
                "alpha": options.alpha,
            },
            files=[path],
            timings=service.all_timings(),
        )
