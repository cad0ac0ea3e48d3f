"""Covariance fidelity command.

Provides the ``covariance`` command comparing empirical and exact lag
covariances, optionally against the Cholesky oracle sampler.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.registry import register_command
from hermite_persist.experiments.gaussian.service import GaussianService
from hermite_persist.experiments.options import SeedOptions


class CovarianceOptions(SeedOptions):
    """Options for the covariance fidelity check."""

    alpha: float = Field(default=0.3, gt=0.0, lt=1.0, description="Covariance decay exponent.")
    length: int = Field(default=64, ge=2, le=2**16, description="Points per replica.")
    replicas: int = Field(default=100_000, ge=2, le=10_000_000, description="Replicas.")
    max_lag: int | None = Field(default=None, ge=0, description="Largest lag (default n-1-origin).")
    origin: int = Field(
        default=0, ge=0, description="Start position i of the products X_i X_{i+j}."
    )
    oracle: bool = Field(default=False, description="Also compare against the Cholesky sampler.")


@register_command("gaussian", "covariance")
class CovarianceCommand(ExperimentCommand):
    """Command checking sampled covariances against (1+j^2)^(-alpha/2)."""

    @property
    def name(self) -> str:
        return "covariance"

    @property
    def description(self) -> str:
        return (
            "Estimate lag covariances of circulant-embedded samples with replica standard "
            "errors, report z-scores against the exact covariance, and optionally compare "
            "with the Cholesky oracle (entrywise z and Kolmogorov-Smirnov distance)."
        )

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(default_budget_minutes=1.0, outputs=("covariance.csv",))

    @property
    def options_model(self) -> type[BaseModel]:
        return CovarianceOptions

    def execute(self, options: CovarianceOptions, context: RunContext) -> CommandResult:
        """Run the covariance check."""
        service = GaussianService(context.settings, workers=context.workers)
        try:
            spec = service.make_covariance(options.alpha, options.length)
            embedding = service.circulant_embed(spec)
            sample = service.sample_paths(embedding, options.replicas, options.seed)
            max_lag = (
                options.max_lag
                if options.max_lag is not None
                else options.length - 1 - options.origin
            )
            estimates = service.empirical_covariance(sample, max_lag, options.origin)
            oracle = (
                service.compare_samplers(spec, options.replicas, options.seed)
                if options.oracle
                else None
            )
        except Exception as e:
            raise handle_error(e, context="Covariance check") from e

        path = context.writer.write_csv(
            "covariance.csv",
            ["lag", "estimate", "stderr", "exact", "z"],
            ([e.lag, e.estimate, e.stderr, e.exact, e.z_score] for e in estimates),
        )
        worst = max(abs(e.z_score or 0.0) for e in estimates)
        summary: dict[str, object] = {
            "seed": sample.seed,
            "embedding": embedding.to_dict(),
            "max_abs_z": worst,
            "within_5_stderr": worst <= 5.0,
        }
        if oracle is not None:
            summary["oracle"] = oracle
        return CommandResult(summary=summary, files=[path], timings=service.all_timings())
