"""Hermite process path builder.

Discretized Hermite-process paths from Gaussian subordination: the driving
stationary sequence X has covariance decay exponent alpha = 2(1-H)/m, the
partial sums S_k = sum_{i<k} h_m(X_i) are formed per replica, and the path is
Z_{k/n} = c * n^(-H) * S_k for k = 1..n.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Literal

import numpy as np
import structlog
from numpy.typing import NDArray

from hermite_persist.core.base import ExperimentService
from hermite_persist.core.config import Settings
from hermite_persist.core.errors import ConfigurationError, EmbeddingError, ValidationError
from hermite_persist.core.parallel import concat_chunks
from hermite_persist.experiments.gaussian.service import (
    CovarianceSpec,
    GaussianSample,
    GaussianService,
)
from hermite_persist.experiments.hermite.service import RealFunction, hermite_eval

logger = structlog.get_logger()

Normalization = Literal["paper_sigma", "empirical_unit_variance", "raw"]
Driver = Literal["long_memory", "white_noise"]

RowSampler = Callable[[int, int, int], NDArray[np.float64]]


def alpha_for(m: int, H: float) -> float:
    """
    Covariance decay exponent alpha = 2(1-H)/m for a rank-m limit of index H.

    Raises:
        ValidationError: m < 1 or H outside (1/2, 1).
    """
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m}", field="m", code="parameter_domain")
    if not (0.5 < H < 1.0) or not math.isfinite(H):
        raise ValidationError(
            f"H must lie in (1/2, 1), got {H}", field="H", code="parameter_domain"
        )
    return 2.0 * (1.0 - H) / m


def paper_sigma(H: float) -> float:
    """sqrt(H^2 - H/2), the Rosenblatt normalization."""
    return math.sqrt(H * H - H / 2.0)


@dataclass(frozen=True)
class HermitePathConfig:
    """
    Path parameters.

    Attributes:
        m: Hermite order (1 = fractional Brownian motion, 2 = Rosenblatt).
        H: Self-similarity index in (1/2, 1).
        n: Grid points per path.
        normalization: How the constant c is chosen.
        driver: ``white_noise`` swaps the long-memory sequence for iid
            normals and rescales by n^(-1/2) instead of n^(-H).
    """

    m: int
    H: float
    n: int
    normalization: Normalization = "empirical_unit_variance"
    driver: Driver = "long_memory"

    def __post_init__(self) -> None:
        alpha_for(self.m, self.H)
        if self.n < 1:
            raise ValidationError("n must be >= 1", field="n", code="parameter_domain")
        if self.normalization == "paper_sigma" and self.m != 2:
            raise ConfigurationError(
                f"paper_sigma normalization is defined only for m = 2, got m = {self.m}",
                setting="normalization",
                code="parameter_domain",
            )

    @property
    def alpha(self) -> float:
        return alpha_for(self.m, self.H)

    @property
    def scaling_index(self) -> float:
        """Exponent of the n^(-s) rescaling."""
        return 0.5 if self.driver == "white_noise" else self.H

    def with_length(self, n: int) -> HermitePathConfig:
        return HermitePathConfig(self.m, self.H, n, self.normalization, self.driver)

    def to_dict(self) -> dict[str, object]:
        return {
            "m": self.m,
            "H": self.H,
            "n": self.n,
            "alpha": self.alpha,
            "normalization": self.normalization,
            "driver": self.driver,
        }


@dataclass(frozen=True, eq=False)
class DiscretePath:
    """One path Z_{k/n}, k = 1..n."""

    values: NDArray[np.float64]
    config: HermitePathConfig
    seed: int
    replica: int


@dataclass(frozen=True, eq=False)
class PathBatch:
    """
    R paths sharing one configuration and seed.

    Attributes:
        values: R x n matrix, row r is replica r.
        config: Path configuration.
        seed: Run key.
        scale: The constant c.
    """

    values: NDArray[np.float64]
    config: HermitePathConfig
    seed: int
    scale: float

    @property
    def replicas(self) -> int:
        return int(self.values.shape[0])

    def path(self, replica: int) -> DiscretePath:
        return DiscretePath(self.values[replica], self.config, self.seed, replica)

    def increments(self) -> NDArray[np.float64]:
        """Z_{k/n} - Z_{(k-1)/n} with Z_0 = 0."""
        out: NDArray[np.float64] = np.diff(self.values, axis=1, prepend=0.0)
        return out

    def reconstruct_terms(self) -> NDArray[np.float64]:
        """Increments times n^s / c, i.e. the subordinated terms h_m(X_k)."""
        n = self.config.n
        return self.increments() * (n**self.config.scaling_index / self.scale)


@dataclass(frozen=True)
class MomentRow:
    """E[(max_k Z_k)^p] at one grid size, with the ratio to the previous size."""

    n: int
    moment: float
    stderr: float
    ratio: float | None


class ProcessService(ExperimentService):
    """Service building Hermite-process paths."""

    def __init__(self, settings: Settings | None = None, workers: int | None = None) -> None:
        super().__init__(settings, workers)
        self.gaussian = self.nest(GaussianService(settings, workers))

    def driving_covariance(
        self, config: HermitePathConfig, length: int | None = None
    ) -> CovarianceSpec:
        """Covariance of the driving Gaussian sequence of ``length`` points."""
        size = config.n if length is None else length
        if config.driver == "white_noise":
            return CovarianceSpec.white_noise(size)
        return self.gaussian.make_covariance(config.alpha, size)

    def row_sampler(self, config: HermitePathConfig, length: int | None = None) -> RowSampler:
        """
        Function (seed, start, stop) -> Gaussian rows for replicas [start, stop).

        The embedding is built once; Cholesky is used when it fails and the
        length is within the Cholesky cap.
        """
        spec = self.driving_covariance(config, length)
        try:
            embedding = self.gaussian.circulant_embed(spec)
        except EmbeddingError:
            if spec.length > self.settings.cholesky_cap:
                raise
            logger.warning("Falling back to Cholesky sampler", length=spec.length)
            factor = self.gaussian.cholesky_factor(spec)
            return lambda seed, a, b: self.gaussian.cholesky_rows(factor, seed, a, b)
        return lambda seed, a, b: self.gaussian.circulant_rows(embedding, seed, a, b)

    def subordinate(
        self,
        sample: GaussianSample | NDArray[np.float64],
        m: int,
        f: RealFunction | None = None,
    ) -> NDArray[np.float64]:
        """
        Per-replica cumulative sums of h_m(X_i) (or f(X_i)), i = 0..n-1.

        Column k-1 holds S_k = sum_{i<k} term_i.
        """
        data = sample.data if isinstance(sample, GaussianSample) else np.asarray(sample)
        terms = hermite_eval(m, data) if f is None else np.asarray(f(data), dtype=np.float64)
        out: NDArray[np.float64] = np.cumsum(terms, axis=-1)
        return out

    def partial_sum_rows(
        self,
        config: HermitePathConfig,
        sampler: RowSampler,
        seed: int,
        start: int,
        stop: int,
        f: RealFunction | None = None,
    ) -> NDArray[np.float64]:
        """Partial sums for replicas [start, stop)."""
        return self.subordinate(sampler(seed, start, stop), config.m, f)

    def simulate_sums(
        self,
        config: HermitePathConfig,
        replicas: int,
        seed: int | None = None,
        f: RealFunction | None = None,
    ) -> NDArray[np.float64]:
        """R x n partial-sum matrix; row r depends only on (seed, r)."""
        if replicas < 0:
            raise ValidationError("replicas must be >= 0", field="replicas")
        key = self.resolve_seed(seed)
        sampler = self.row_sampler(config)
        with self.timed("process_builder"):
            chunks = self.map_replicas(
                replicas, lambda a, b: self.partial_sum_rows(config, sampler, key, a, b, f)
            )
        if not chunks:
            return np.empty((0, config.n))
        sums: NDArray[np.float64] = concat_chunks(chunks)
        return sums

    def exact_partial_sum_variance(self, spec: CovarianceSpec, m: int, n: int) -> float:
        """
        Var(S_n) = m! * sum_{i,j<n} r(i-j)^m, evaluated in O(n).

        Exact for the subordinated sums of h_m by the diagram formula.
        """
        if n < 1:
            raise ValidationError("n must be >= 1", field="n")
        r = spec.covariance_at(np.arange(n)) ** m
        k = np.arange(1, n)
        total = n * r[0] + 2.0 * float(np.sum((n - k) * r[1:]))
        return math.factorial(m) * total

    def variance_ratio(self, config: HermitePathConfig, n: int | None = None) -> float:
        """Exact Var(S_{2n}) / Var(S_n); tends to 2^(2H)."""
        size = config.n if n is None else n
        spec = self.driving_covariance(config, 2 * size)
        return self.exact_partial_sum_variance(spec, config.m, 2 * size) / (
            self.exact_partial_sum_variance(spec, config.m, size)
        )

    def scale_constant(
        self,
        config: HermitePathConfig,
        terminal: NDArray[np.float64] | None = None,
    ) -> float:
        """
        The constant c for ``config``.

        ``terminal`` holds S_n per replica; empirical normalization uses its
        standard deviation and falls back to the exact variance below two
        replicas.
        """
        if config.normalization == "raw":
            return 1.0
        if config.normalization == "paper_sigma":
            return paper_sigma(config.H)
        n_power = config.n**config.scaling_index
        if terminal is not None and terminal.size >= 2:
            sd = float(np.std(terminal, ddof=1))
            if sd > 0.0:
                return n_power / sd
        logger.warning(
            "Empirical normalization falling back to exact variance",
            replicas=0 if terminal is None else terminal.size,
        )
        exact = self.exact_partial_sum_variance(self.driving_covariance(config), config.m, config.n)
        return n_power / math.sqrt(exact)

    def rescale(
        self,
        sums: NDArray[np.float64],
        config: HermitePathConfig,
        seed: int = 0,
    ) -> PathBatch:
        """
        Z_{k/n} = c * n^(-H) * S_k.

        Raises:
            ValidationError: sums width differs from config.n.
        """
        sums = np.atleast_2d(np.asarray(sums, dtype=np.float64))
        if sums.shape[1] != config.n:
            raise ValidationError(
                f"partial sums have {sums.shape[1]} points, config expects {config.n}",
                field="n",
                code="range",
            )
        c = self.scale_constant(config, sums[:, -1])
        values = sums * (c / config.n**config.scaling_index)
        return PathBatch(values=values, config=config, seed=seed, scale=c)

    def simulate(
        self,
        config: HermitePathConfig,
        replicas: int,
        seed: int | None = None,
        f: RealFunction | None = None,
    ) -> PathBatch:
        """Simulate and rescale ``replicas`` paths."""
        key = self.resolve_seed(seed)
        sums = self.simulate_sums(config, replicas, key, f)
        return self.rescale(sums, config, key)

    def moment_scaling_diagnostic(
        self,
        config: HermitePathConfig,
        p: float,
        n_grid: list[int],
        replicas: int,
        seed: int | None = None,
    ) -> list[MomentRow]:
        """
        E[(max_k Z_k)^p] at each n of an increasing grid.

        The running maximum includes Z_0 = 0, so it is nonnegative and
        non-integer p is well defined.

        Raises:
            ValidationError: p < 1, empty or non-increasing grid.
        """
        if p < 1:
            raise ValidationError("p must be >= 1", field="p", code="parameter_domain")
        if not n_grid or any(b <= a for a, b in zip(n_grid, n_grid[1:], strict=False)):
            raise ValidationError(
                "n grid must be nonempty and increasing", field="n_grid", code="range"
            )
        if replicas < 2:
            raise ValidationError("moment diagnostic needs >= 2 replicas", field="replicas")

        rows: list[MomentRow] = []
        previous: float | None = None
        for n in n_grid:
            batch = self.simulate(config.with_length(n), replicas, seed)
            running = np.maximum(batch.values.max(axis=1), 0.0) ** p
            moment = float(running.mean())
            stderr = float(running.std(ddof=1) / math.sqrt(replicas))
            ratio = moment / previous if previous else None
            rows.append(MomentRow(n=n, moment=moment, stderr=stderr, ratio=ratio))
            previous = moment
        return rows
