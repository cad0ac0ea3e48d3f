"""Decorrelation service.

Empirical joint-versus-product checks for increment suprema over disjoint
blocks, for the rescaled paths and for the raw discrete partial sums, and a
Gaussian correlation inequality harness for symmetric convex sets.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import structlog
from numpy.typing import NDArray
from scipy import stats

from hermite_persist.core.base import ExperimentService
from hermite_persist.core.config import Settings
from hermite_persist.core.errors import NumericalError, ValidationError
from hermite_persist.core.parallel import concat_chunks
from hermite_persist.core.rng import Stream, standard_normal_rows
from hermite_persist.experiments.gaussian.service import GaussianSample
from hermite_persist.experiments.process.service import HermitePathConfig, ProcessService
from hermite_persist.experiments.stats import ProductMargin, product_margin

logger = structlog.get_logger()

_BLOCK_ROWS = 256
MAX_GCI_DIMENSION = 4


@dataclass(frozen=True)
class PartitionSpec:
    """
    Block boundaries t_0 < ... < t_d on the path grid and levels a_1..a_d.

    Block i covers grid indices [t_{i-1}, t_i).
    """

    times: tuple[int, ...]
    levels: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.times) < 2:
            raise ValidationError("a partition needs at least one block", code="partition")
        if len(self.levels) != len(self.times) - 1:
            raise ValidationError(
                f"{len(self.times) - 1} blocks but {len(self.levels)} levels",
                field="levels",
                code="partition",
            )
        if any(b <= a for a, b in itertools.pairwise(self.times)):
            raise ValidationError(
                f"partition times {list(self.times)} leave an empty block",
                field="times",
                code="partition",
            )
        if self.times[0] < 0:
            raise ValidationError("partition times must be >= 0", field="times", code="partition")

    @classmethod
    def from_unit(cls, times: Sequence[float], levels: Sequence[float], n: int) -> PartitionSpec:
        """Map times in [0, 1] to grid indices round(t n)."""
        if any(t < 0.0 or t > 1.0 for t in times):
            raise ValidationError("unit times must lie in [0, 1]", field="times", code="partition")
        return cls(tuple(round(t * n) for t in times), tuple(float(a) for a in levels))

    @property
    def blocks(self) -> int:
        return len(self.levels)

    def check_within(self, last: int) -> None:
        if self.times[-1] > last:
            raise ValidationError(
                f"partition end {self.times[-1]} exceeds grid end {last}",
                field="times",
                code="partition",
            )

    def to_dict(self) -> dict[str, object]:
        return {"times": list(self.times), "levels": list(self.levels)}


@dataclass(frozen=True)
class DecorrelationReport:
    """Joint probability of all block events against the product of marginals."""

    partition: PartitionSpec
    estimate: ProductMargin
    replicas: int
    exploratory: bool = False
    config: dict[str, object] = field(default_factory=dict)

    @property
    def joint(self) -> tuple[float, float]:
        return self.estimate.joint

    @property
    def marginals(self) -> list[tuple[float, float]]:
        return self.estimate.marginals

    @property
    def product(self) -> float:
        return self.estimate.product

    @property
    def margin(self) -> float:
        return self.estimate.margin

    @property
    def z_score(self) -> float:
        return self.estimate.z_score

    def to_dict(self) -> dict[str, object]:
        return {
            **self.estimate.to_dict(),
            "partition": self.partition.to_dict(),
            "replicas": self.replicas,
            "exploratory": self.exploratory,
            "config": self.config,
        }


def block_statistics(
    paths: NDArray[np.float64],
    partition: PartitionSpec,
    first: Literal["closed", "open"],
) -> NDArray[np.float64]:
    """
    max over each block of path - path[block start], per replica.

    ``paths`` has column j = value at grid index j. ``closed`` blocks are
    [t_{i-1}, t_i) (statistic >= 0); ``open`` blocks are (t_{i-1}, t_i].
    """
    out = np.empty((paths.shape[0], partition.blocks), dtype=np.float64)
    for i, (a, b) in enumerate(itertools.pairwise(partition.times)):
        window = paths[:, a:b] if first == "closed" else paths[:, a + 1 : b + 1]
        out[:, i] = window.max(axis=1) - paths[:, a]
    return out


@dataclass(frozen=True)
class SetSpec:
    """
    Centered symmetric convex set.

    ``box``: |x_i| <= half_widths[i] (inf allowed). ``ball``: ||x_I|| <= radius
    over coordinates I (all when empty).
    """

    kind: Literal["box", "ball"]
    half_widths: tuple[float, ...] = ()
    radius: float = 1.0
    coords: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind == "box" and any(w <= 0 for w in self.half_widths):
            raise ValidationError("box half-widths must be > 0", field="half_widths")
        if self.kind == "ball" and self.radius <= 0:
            raise ValidationError("ball radius must be > 0", field="radius")

    @classmethod
    def box(cls, *half_widths: float) -> SetSpec:
        return cls("box", half_widths=tuple(float(w) for w in half_widths))

    @classmethod
    def ball(cls, radius: float, coords: Sequence[int] = ()) -> SetSpec:
        return cls("ball", radius=float(radius), coords=tuple(coords))

    def check_dimension(self, dimension: int) -> None:
        if self.kind == "box" and len(self.half_widths) != dimension:
            raise ValidationError(
                f"box has {len(self.half_widths)} half-widths for dimension {dimension}",
                field="sets",
            )
        if any(c < 0 or c >= dimension for c in self.coords):
            raise ValidationError("ball coordinates out of range", field="sets")

    def contains(self, x: NDArray[np.float64]) -> NDArray[np.bool_]:
        if self.kind == "box":
            out: NDArray[np.bool_] = np.all(np.abs(x) <= np.array(self.half_widths), axis=1)
            return out
        sub = x[:, list(self.coords)] if self.coords else x
        inside: NDArray[np.bool_] = np.sum(sub * sub, axis=1) <= self.radius**2
        return inside

    def to_dict(self) -> dict[str, object]:
        if self.kind == "box":
            return {"kind": "box", "half_widths": list(self.half_widths)}
        return {"kind": "ball", "radius": self.radius, "coords": list(self.coords)}


@dataclass(frozen=True)
class GciReport:
    """Monte Carlo margin P(C1 and C2) - P(C1) P(C2), with an optional oracle."""

    estimate: ProductMargin
    sets: tuple[SetSpec, SetSpec]
    replicas: int
    oracle_margin: float | None = None
    oracle_z: float | None = None

    def to_dict(self) -> dict[str, object]:
        return {
            **self.estimate.to_dict(),
            "sets": [s.to_dict() for s in self.sets],
            "replicas": self.replicas,
            "oracle_margin": self.oracle_margin,
            "oracle_z": self.oracle_z,
        }


@dataclass(frozen=True)
class BatteryConfig:
    """One decorrelation configuration: H, unit-time partition and levels."""

    H: float
    times: tuple[float, ...]
    levels: tuple[float, ...]

    @property
    def blocks(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class BatteryResult:
    """Outcome of the decorrelation battery."""

    reports: list[DecorrelationReport]
    single_block: list[DecorrelationReport]
    z_threshold: float

    @property
    def violations(self) -> int:
        return sum(r.z_score < self.z_threshold for r in self.reports)

    @property
    def single_block_exact(self) -> bool:
        return all(r.margin == 0.0 for r in self.single_block)

    def to_dict(self) -> dict[str, object]:
        return {
            "violations": self.violations,
            "z_threshold": self.z_threshold,
            "single_block_exact": self.single_block_exact,
            "min_z_score": min((r.z_score for r in self.reports), default=None),
            "reports": [r.to_dict() for r in self.reports],
        }


def default_battery() -> list[BatteryConfig]:
    """
    The fixed 20-configuration battery for m = 2.

    Equal blocks for d in {2, 3, 4} at H in {0.6, 0.7, 0.8}, each with equal
    and with mixed levels, plus two unequal partitions at H = 0.7.
    """
    mixed = {2: (0.2, 1.0), 3: (0.0, 0.5, 1.0), 4: (1.0, 0.25, 0.0, 0.75)}
    configs: list[BatteryConfig] = []
    for H, d in itertools.product((0.6, 0.7, 0.8), (2, 3, 4)):
        times = tuple(float(t) for t in np.linspace(0.0, 1.0, d + 1))
        configs.append(BatteryConfig(H, times, (0.5,) * d))
        configs.append(BatteryConfig(H, times, mixed[d]))
    configs.append(BatteryConfig(0.7, (0.0, 0.3, 1.0), (0.3, 0.8)))
    configs.append(BatteryConfig(0.7, (0.0, 0.2, 0.5, 1.0), (0.5, 0.0, 1.0)))
    return configs


class DecorrelationService(ExperimentService):
    """Service for decorrelation and Gaussian correlation checks."""

    def __init__(self, settings: Settings | None = None, workers: int | None = None) -> None:
        super().__init__(settings, workers)
        self.process = self.nest(ProcessService(settings, workers))

    def check_decorrelation(
        self,
        config: HermitePathConfig,
        partition: PartitionSpec,
        replicas: int,
        seed: int | None = None,
    ) -> DecorrelationReport:
        """
        Joint versus product for sup_{[t_{i-1}, t_i)} (Z_t - Z_{t_{i-1}}) <= a_i.

        Times index the grid k/n with Z_0 = 0. Orders other than 2 are
        computed but flagged exploratory.
        """
        if replicas < 1:
            raise ValidationError(
                "replicas must be >= 1", field="replicas", code="parameter_domain"
            )
        partition.check_within(config.n)
        exploratory = config.m != 2
        if exploratory:
            logger.warning("Decorrelation run outside m = 2 is exploratory", m=config.m)
        key = self.resolve_seed(seed)
        sampler = self.process.row_sampler(config)

        def task(start: int, stop: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
            parts: list[tuple[NDArray[np.float64], NDArray[np.float64]]] = []
            for a in range(start, stop, _BLOCK_ROWS):
                sums = self.process.partial_sum_rows(
                    config, sampler, key, a, min(a + _BLOCK_ROWS, stop)
                )
                padded = np.concatenate([np.zeros((sums.shape[0], 1)), sums], axis=1)
                parts.append((block_statistics(padded, partition, "closed"), sums[:, -1]))
            return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])

        with self.timed("decorrelation"):
            block_stats, terminal = concat_chunks(self.map_replicas(replicas, task))
        c = self.process.scale_constant(config, terminal)
        unit = config.n**config.scaling_index / c
        events = block_stats <= np.array(partition.levels) * unit
        return DecorrelationReport(
            partition=partition,
            estimate=product_margin(np.all(events, axis=1), list(events.T)),
            replicas=replicas,
            exploratory=exploratory,
            config=config.to_dict(),
        )

    def check_discrete_inequality(
        self,
        n_partition: Sequence[int],
        levels: Sequence[float],
        sample: GaussianSample,
        m: int = 2,
    ) -> DecorrelationReport:
        """
        Joint versus product for max_{n_{i-1} < k <= n_i} (S_k - S_{n_{i-1}}) <= a_i
        on raw sums S_k = sum_{i=0}^{k} h_m(X_i).
        """
        partition = PartitionSpec(tuple(int(t) for t in n_partition), tuple(levels))
        partition.check_within(sample.length - 1)
        if m != 2:
            logger.warning("Decorrelation run outside m = 2 is exploratory", m=m)
        with self.timed("decorrelation"):
            sums = self.process.subordinate(sample, m)
            block_stats = block_statistics(sums, partition, "open")
        events = block_stats <= np.array(partition.levels)
        return DecorrelationReport(
            partition=partition,
            estimate=product_margin(np.all(events, axis=1), list(events.T)),
            replicas=sample.replicas,
            exploratory=m != 2,
            config={"m": m, "alpha": sample.spec.alpha, "length": sample.length},
        )

    def gci_sanity(
        self,
        covariance: Sequence[Sequence[float]] | NDArray[np.float64],
        sets: tuple[SetSpec, SetSpec],
        replicas: int,
        seed: int | None = None,
    ) -> GciReport:
        """
        P(X in C1 and C2) against P(X in C1) P(X in C2) for centered Gaussian X.

        When both sets are boxes the exact margin is computed by multivariate
        normal rectangle probabilities.

        Raises:
            ValidationError: Dimension above 4, non-square or asymmetric matrix.
            NumericalError: Covariance not positive definite.
        """
        cov = np.atleast_2d(np.asarray(covariance, dtype=np.float64))
        d = cov.shape[0]
        if cov.shape != (d, d) or not 1 <= d <= MAX_GCI_DIMENSION:
            raise ValidationError(
                f"covariance must be square of dimension 1..{MAX_GCI_DIMENSION}",
                field="covariance",
                code="range",
            )
        if not np.allclose(cov, cov.T):
            raise ValidationError("covariance must be symmetric", field="covariance")
        if replicas < 2:
            raise ValidationError("replicas must be >= 2", field="replicas")
        for s in sets:
            s.check_dimension(d)
        try:
            factor = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as e:
            pivot = float(np.linalg.eigvalsh(cov).min())
            raise NumericalError(
                f"covariance is not positive definite (smallest eigenvalue {pivot:.3e})",
                pivot=pivot,
                code="not_positive_definite",
            ) from e
        key = self.resolve_seed(seed)

        def task(start: int, stop: int) -> tuple[NDArray[np.bool_], NDArray[np.bool_]]:
            x = standard_normal_rows(key, start, stop, d, Stream.GCI) @ factor.T
            return sets[0].contains(x), sets[1].contains(x)

        with self.timed("decorrelation"):
            first, second = concat_chunks(self.map_replicas(replicas, task))
        estimate = product_margin(first & second, [first, second])

        oracle = self.box_oracle(cov, sets) if all(s.kind == "box" for s in sets) else None
        oracle_z = None
        if oracle is not None and estimate.margin_stderr > 0:
            oracle_z = (estimate.margin - oracle) / estimate.margin_stderr
        return GciReport(
            estimate=estimate,
            sets=sets,
            replicas=replicas,
            oracle_margin=oracle,
            oracle_z=oracle_z,
        )

    def box_oracle(self, cov: NDArray[np.float64], sets: tuple[SetSpec, SetSpec]) -> float:
        """Exact P(B1 and B2) - P(B1) P(B2) for centered boxes."""

        def box_probability(widths: NDArray[np.float64]) -> float:
            finite = np.isfinite(widths)
            if not np.any(finite):
                return 1.0
            if np.count_nonzero(finite) == 1:
                i = int(np.argmax(finite))
                sd = math.sqrt(cov[i, i])
                return float(2.0 * stats.norm.cdf(widths[i] / sd) - 1.0)
            sub = np.ix_(finite, finite)
            w = widths[finite]
            return float(
                stats.multivariate_normal.cdf(
                    w,
                    mean=np.zeros(np.count_nonzero(finite)),
                    cov=cov[sub],
                    abseps=1e-10,
                    releps=1e-10,
                    lower_limit=-w,
                )
            )

        a = np.array(sets[0].half_widths)
        b = np.array(sets[1].half_widths)
        return box_probability(np.minimum(a, b)) - box_probability(a) * box_probability(b)

    def run_battery(
        self,
        replicas: int,
        seed: int | None = None,
        n: int = 1024,
        configs: Sequence[BatteryConfig] | None = None,
        z_threshold: float = -3.0,
    ) -> BatteryResult:
        """
        Run every battery configuration, plus a single-block check per H
        whose margin must vanish exactly.
        """
        battery = list(configs) if configs is not None else default_battery()
        reports: list[DecorrelationReport] = []
        for item in battery:
            config = HermitePathConfig(2, item.H, n)
            partition = PartitionSpec.from_unit(item.times, item.levels, n)
            report = self.check_decorrelation(config, partition, replicas, seed)
            logger.info(
                "Battery configuration done",
                H=item.H,
                blocks=item.blocks,
                margin=report.margin,
                z_score=report.z_score,
            )
            reports.append(report)
        singles = [
            self.check_decorrelation(
                HermitePathConfig(2, H, n),
                PartitionSpec.from_unit((0.0, 1.0), (0.5,), n),
                replicas,
                seed,
            )
            for H in sorted({item.H for item in battery})
        ]
        return BatteryResult(reports=reports, single_block=singles, z_threshold=z_threshold)
