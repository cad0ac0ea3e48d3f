"""Persistence probability service.

Monte Carlo estimation of P(sup_{t<=T} Y_t <= b) for the Hermite process Y,
exponent fitting over horizon grids, tail decay, and the barrier-switch and
discretization diagnostics.

Horizons are expressed in unit time by self-similarity. With an oversampling
factor q a single path of N = T_max * q points is simulated per replica and
read as Y_{j/q} = c * q^(-H) * S_j; every horizon T <= T_max uses the prefix
j <= T q of that same path, so grids are nested and share replicas.
"""

from __future__ import annotations

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
from hermite_persist.core.errors import (
    DegenerateFitError,
    InsufficientDataError,
    ValidationError,
)
from hermite_persist.core.parallel import concat_chunks
from hermite_persist.experiments.process.service import HermitePathConfig, ProcessService
from hermite_persist.experiments.stats import ProductMargin, product_margin, proportion_stderr

logger = structlog.get_logger()

Event = Literal["sup", "late_start"]

MIN_SURVIVORS = 10
MIN_TAIL_HITS = 20
# rows simulated at once inside a replica chunk
_BLOCK_ROWS = 256


def log_correction_metadata(m: int) -> dict[str, object]:
    """
    Power of the (log T) factor in the persistence lower bound.

    For m = 2 the Laplace-transform bound holds with beta = 2, giving power
    1/2. For general m only beta in (0, 2/m) is available, giving a power
    1/beta above m/2. Recorded, never fitted.
    """
    if m == 2:
        return {"beta": 2.0, "log_power": 0.5}
    return {"beta_upper": 2.0 / m, "log_power_lower": m / 2.0}


@dataclass(frozen=True)
class PersistenceEstimate:
    """
    Survivor count at one horizon and barrier.

    Attributes:
        horizon: T in unit steps.
        barrier: b.
        survivors: Replicas with sup_{t<=T} Y_t <= b (< 0 when b = 0).
        replicas: R.
        event: ``sup`` over [0, T] or ``late_start`` over [1, T].
    """

    horizon: int
    barrier: float
    survivors: int
    replicas: int
    event: Event = "sup"

    def __post_init__(self) -> None:
        if not 0 <= self.survivors <= self.replicas:
            raise ValidationError(
                f"survivors {self.survivors} outside [0, {self.replicas}]", field="survivors"
            )

    @classmethod
    def from_indicators(
        cls, horizon: int, barrier: float, indicators: NDArray[np.bool_], event: Event = "sup"
    ) -> PersistenceEstimate:
        return cls(horizon, barrier, int(np.count_nonzero(indicators)), int(indicators.size), event)

    @property
    def p_hat(self) -> float:
        return self.survivors / self.replicas if self.replicas else 0.0

    @property
    def stderr(self) -> float:
        return proportion_stderr(self.p_hat, self.replicas)

    def row(self) -> list[object]:
        return [self.horizon, self.barrier, self.survivors, self.replicas, self.p_hat, self.stderr]

    def to_dict(self) -> dict[str, object]:
        return {
            "T": self.horizon,
            "barrier": self.barrier,
            "event": self.event,
            "survivors": self.survivors,
            "replicas": self.replicas,
            "p_hat": self.p_hat,
            "stderr": self.stderr,
        }


@dataclass(frozen=True)
class ExponentFit:
    """
    Weighted least-squares fit of log p on log T.

    Attributes:
        theta: Minus the fitted slope.
        ci_low: Lower end of the 95% interval.
        ci_high: Upper end of the 95% interval.
        grid: (T, p_hat, stderr) of the points used.
        method: Fit description.
        intercept: Fitted log p at T = 1.
        slope_stderr: Standard error of the slope.
        residuals: log p - fitted, per grid point.
        excluded: Horizons dropped for too few survivors.
    """

    theta: float
    ci_low: float
    ci_high: float
    grid: list[tuple[int, float, float]]
    method: str = "weighted least squares on log-log"
    intercept: float = 0.0
    slope_stderr: float = 0.0
    residuals: list[float] = field(default_factory=list)
    excluded: list[int] = field(default_factory=list)

    def covers(self, value: float, slack: float = 0.0) -> bool:
        return self.ci_low - slack <= value <= self.ci_high + slack

    def to_dict(self) -> dict[str, object]:
        return {
            "theta": self.theta,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "grid": [{"T": t, "p_hat": p, "stderr": s} for t, p, s in self.grid],
            "method": self.method,
            "intercept": self.intercept,
            "slope_stderr": self.slope_stderr,
            "residuals": self.residuals,
            "excluded": self.excluded,
        }


@dataclass(frozen=True, eq=False)
class TailCurve:
    """P(max_k |Z_k| > u) at increasing levels, and the fitted stretch exponent."""

    levels: NDArray[np.float64]
    tails: NDArray[np.float64]
    stderrs: NDArray[np.float64]
    hits: NDArray[np.int64]
    replicas: int
    gamma: float
    gamma_stderr: float
    intercept: float
    fitted_levels: list[float]

    def rows(self) -> list[list[object]]:
        return [
            [float(u), int(h), self.replicas, float(t), float(s)]
            for u, h, t, s in zip(self.levels, self.hits, self.tails, self.stderrs, strict=True)
        ]

    def to_dict(self) -> dict[str, object]:
        return {
            "levels": self.levels.tolist(),
            "tails": self.tails.tolist(),
            "stderrs": self.stderrs.tolist(),
            "gamma": self.gamma,
            "gamma_stderr": self.gamma_stderr,
            "fitted_levels": self.fitted_levels,
        }


@dataclass(frozen=True, eq=False)
class RunningMaxima:
    """
    Per-replica statistics of one shared path set, in partial-sum units.

    Attributes:
        horizons: Unit-time horizons T.
        oversample: Grid points per unit time q.
        maxima: R x K, max_{1<=j<=Tq} S_j.
        late: R x K, max_{q<=j<=Tq} S_j (supremum over [1, T]).
        anchor: S_q, i.e. the path at unit time.
        terminal: S_N with N = T_max q.
        unit: Partial-sum value of one unit of Y.
    """

    config: HermitePathConfig
    seed: int
    horizons: list[int]
    oversample: int
    maxima: NDArray[np.float64]
    late: NDArray[np.float64]
    anchor: NDArray[np.float64]
    terminal: NDArray[np.float64]
    unit: float

    @property
    def replicas(self) -> int:
        return int(self.maxima.shape[0])

    def column(self, horizon: int) -> int:
        try:
            return self.horizons.index(horizon)
        except ValueError:
            raise ValidationError(f"horizon {horizon} was not simulated", field="horizon") from None

    def survives(self, barrier: float, horizon: int, event: Event = "sup") -> NDArray[np.bool_]:
        """Indicator of the persistence event per replica."""
        source = self.late if event == "late_start" else self.maxima
        values = source[:, self.column(horizon)]
        if barrier == 0.0:
            return values < 0.0
        out: NDArray[np.bool_] = values <= barrier * self.unit
        return out

    def estimate(self, barrier: float, horizon: int, event: Event = "sup") -> PersistenceEstimate:
        return PersistenceEstimate.from_indicators(
            horizon, barrier, self.survives(barrier, horizon, event), event
        )


def weighted_loglog_fit(
    horizons: Sequence[float],
    p_hat: Sequence[float],
    stderr: Sequence[float],
    level: float = 0.95,
) -> ExponentFit:
    """
    Fit log p = a + slope * log T with weights 1 / Var(log p).

    Var(log p) is taken as (stderr / p)^2. When every stderr is zero the fit
    is unweighted with a residual-based interval; isolated zeros borrow the
    smallest positive variance.

    Raises:
        InsufficientDataError: Fewer than 3 points, or a nonpositive p.
    """
    t = np.asarray(horizons, dtype=np.float64)
    p = np.asarray(p_hat, dtype=np.float64)
    se = np.asarray(stderr, dtype=np.float64)
    if t.size < 3:
        raise InsufficientDataError(
            f"exponent fit needs >= 3 horizons, got {t.size}", code="insufficient_data"
        )
    if np.any(p <= 0.0) or np.any(t <= 0.0):
        raise InsufficientDataError("log-log fit needs positive p and T", code="insufficient_data")

    x = np.log(t)
    y = np.log(p)
    design = np.column_stack([np.ones_like(x), x])
    var = (se / p) ** 2
    known_variance = bool(np.any(var > 0.0))
    if known_variance:
        var = np.where(var > 0.0, var, var[var > 0.0].min())
        w = 1.0 / var
    else:
        w = np.ones_like(x)

    normal = design.T @ (design * w[:, None])
    coef = np.linalg.solve(normal, design.T @ (w * y))
    fitted = design @ coef
    residuals = y - fitted
    cov = np.linalg.inv(normal)
    if not known_variance:
        dof = max(t.size - 2, 1)
        cov = cov * float(np.sum(residuals**2)) / dof

    slope_se = math.sqrt(max(float(cov[1, 1]), 0.0))
    z = float(stats.norm.ppf(0.5 + level / 2.0))
    theta = -float(coef[1])
    return ExponentFit(
        theta=theta,
        ci_low=theta - z * slope_se,
        ci_high=theta + z * slope_se,
        grid=[(int(a), float(b), float(c)) for a, b, c in zip(t, p, se, strict=True)],
        intercept=float(coef[0]),
        slope_stderr=slope_se,
        residuals=residuals.tolist(),
    )


@dataclass(frozen=True)
class BoundaryTable:
    """Persistence at barriers -1, 0, +1 (and the late-start event) on shared paths."""

    estimates: list[PersistenceEstimate]
    fits: dict[str, ExponentFit | None]

    def at(self, barrier: float, horizon: int, event: Event = "sup") -> PersistenceEstimate:
        return next(
            e
            for e in self.estimates
            if e.barrier == barrier and e.horizon == horizon and e.event == event
        )

    def ratios(self) -> list[dict[str, object]]:
        """p(-1)/p(0) and p(0)/p(+1) per horizon."""
        out: list[dict[str, object]] = []
        for horizon in sorted({e.horizon for e in self.estimates}):
            low, mid, high = (self.at(b, horizon).p_hat for b in (-1.0, 0.0, 1.0))
            out.append(
                {
                    "T": horizon,
                    "minus_over_zero": low / mid if mid > 0 else None,
                    "zero_over_plus": mid / high if high > 0 else None,
                }
            )
        return out


@dataclass(frozen=True)
class SwitchRow:
    """P(sup_{[1,T]} Y <= -1) against P(Y_1 <= -2) * P(sup_{[0,T-1]} Y <= 1)."""

    horizon: int
    left: PersistenceEstimate
    margin: ProductMargin

    def to_dict(self) -> dict[str, object]:
        return {"T": self.horizon, "left": self.left.p_hat, **self.margin.to_dict()}


@dataclass(frozen=True)
class GapReport:
    """Effect of evaluating the supremum on a coarse versus an oversampled grid."""

    horizon: int
    oversample: int
    barrier: float
    coarse: PersistenceEstimate
    fine: PersistenceEstimate
    gap: float
    gap_stderr: float
    excursion: float
    excursion_stderr: float

    def to_dict(self) -> dict[str, object]:
        return {
            "T": self.horizon,
            "oversample": self.oversample,
            "barrier": self.barrier,
            "coarse": self.coarse.to_dict(),
            "fine": self.fine.to_dict(),
            "gap": self.gap,
            "gap_stderr": self.gap_stderr,
            "excursion": self.excursion,
            "excursion_stderr": self.excursion_stderr,
        }


class PersistenceService(ExperimentService):
    """Service for persistence, exponent and tail estimation."""

    def __init__(self, settings: Settings | None = None, workers: int | None = None) -> None:
        super().__init__(settings, workers)
        self.process = self.nest(ProcessService(settings, workers))

    def _check_horizons(self, horizons: Sequence[int]) -> list[int]:
        grid = sorted({int(h) for h in horizons})
        if not grid or grid[0] < 1:
            raise ValidationError(
                "horizons must be positive integers", field="horizons", code="range"
            )
        return grid

    def _check_replicas(self, replicas: int) -> None:
        if replicas < 1:
            raise ValidationError(
                f"replicas must be >= 1, got {replicas}", field="replicas", code="parameter_domain"
            )

    def simulate_maxima(
        self,
        config: HermitePathConfig,
        horizons: Sequence[int],
        replicas: int,
        seed: int | None = None,
        oversample: int = 1,
    ) -> RunningMaxima:
        """
        Simulate N = T_max * q points per replica and keep prefix maxima.

        ``config.n`` is ignored; the path length follows from the grid.
        """
        self._check_replicas(replicas)
        if oversample < 1:
            raise ValidationError("oversample must be >= 1", field="oversample", code="range")
        grid = self._check_horizons(horizons)
        key = self.resolve_seed(seed)
        q = oversample
        length = grid[-1] * q
        path_config = config.with_length(length)
        sampler = self.process.row_sampler(path_config)
        ends = np.array(grid) * q - 1

        def task(start: int, stop: int) -> tuple[NDArray[np.float64], ...]:
            parts: list[tuple[NDArray[np.float64], ...]] = []
            for a in range(start, stop, _BLOCK_ROWS):
                sums = self.process.partial_sum_rows(
                    path_config, sampler, key, a, min(a + _BLOCK_ROWS, stop)
                )
                running = np.maximum.accumulate(sums, axis=1)
                late = np.maximum.accumulate(sums[:, q - 1 :], axis=1)
                parts.append(
                    (running[:, ends], late[:, ends - (q - 1)], sums[:, q - 1], sums[:, -1])
                )
            return tuple(np.concatenate(col) for col in zip(*parts, strict=True))

        with self.timed("persistence"):
            maxima, late, anchor, terminal = concat_chunks(self.map_replicas(replicas, task))

        c = self.process.scale_constant(path_config, terminal)
        unit = q**path_config.scaling_index / c
        return RunningMaxima(
            config=path_config,
            seed=key,
            horizons=grid,
            oversample=q,
            maxima=maxima,
            late=late,
            anchor=anchor,
            terminal=terminal,
            unit=unit,
        )

    def estimate_persistence(
        self,
        config: HermitePathConfig,
        barrier: float,
        replicas: int,
        seed: int | None = None,
        oversample: int = 1,
    ) -> PersistenceEstimate:
        """P(sup_{t <= n} Y_t <= barrier) with horizon T = config.n."""
        maxima = self.simulate_maxima(config, [config.n], replicas, seed, oversample)
        return maxima.estimate(barrier, config.n)

    def estimate_grid(
        self,
        config: HermitePathConfig,
        horizons: Sequence[int],
        barriers: Sequence[float],
        replicas: int,
        seed: int | None = None,
        oversample: int = 1,
    ) -> list[PersistenceEstimate]:
        """Estimates for every (T, barrier) from one shared path set."""
        if not barriers:
            raise ValidationError("at least one barrier is required", field="barriers")
        maxima = self.simulate_maxima(config, horizons, replicas, seed, oversample)
        return [maxima.estimate(b, t) for t in maxima.horizons for b in barriers]

    def fit_exponent(
        self,
        estimates: Sequence[PersistenceEstimate],
        min_survivors: int = MIN_SURVIVORS,
    ) -> ExponentFit:
        """
        Fit theta from persistence estimates at several horizons.

        Horizons with fewer than ``min_survivors`` survivors are excluded
        with a warning.

        Raises:
            InsufficientDataError: Fewer than 3 usable horizons.
        """
        usable = sorted(
            (e for e in estimates if e.survivors >= min_survivors), key=lambda e: e.horizon
        )
        excluded = sorted(e.horizon for e in estimates if e.survivors < min_survivors)
        if excluded:
            logger.warning(
                "Excluded horizons with too few survivors",
                horizons=excluded,
                min_survivors=min_survivors,
            )
        if len(usable) < 3:
            raise InsufficientDataError(
                f"only {len(usable)} horizons have >= {min_survivors} survivors; need 3",
                code="insufficient_data",
                details={"excluded": excluded},
            )
        fit = weighted_loglog_fit(
            [e.horizon for e in usable], [e.p_hat for e in usable], [e.stderr for e in usable]
        )
        return ExponentFit(
            theta=fit.theta,
            ci_low=fit.ci_low,
            ci_high=fit.ci_high,
            grid=fit.grid,
            method=fit.method,
            intercept=fit.intercept,
            slope_stderr=fit.slope_stderr,
            residuals=fit.residuals,
            excluded=excluded,
        )

    def estimate_tail(
        self,
        config: HermitePathConfig,
        levels: Sequence[float],
        replicas: int,
        seed: int | None = None,
    ) -> TailCurve:
        """
        P(max_k |Z_{k/n}| > u) on unit-variance paths and the stretch exponent.

        gamma is the least-squares slope of log(-log tail) on log u over
        positive levels with at least 20 hits and tail below 1.

        Raises:
            ValidationError: Levels negative or not increasing.
            DegenerateFitError: Every tail estimate is zero.
            InsufficientDataError: Fewer than 2 levels usable for the fit.
        """
        self._check_replicas(replicas)
        u = np.asarray(levels, dtype=np.float64)
        if u.size == 0 or np.any(u < 0) or np.any(np.diff(u) <= 0):
            raise ValidationError(
                "levels must be nonnegative and increasing", field="levels", code="range"
            )
        key = self.resolve_seed(seed)
        path_config = HermitePathConfig(
            config.m, config.H, config.n, "empirical_unit_variance", config.driver
        )
        sampler = self.process.row_sampler(path_config)

        def task(start: int, stop: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
            parts: list[tuple[NDArray[np.float64], NDArray[np.float64]]] = []
            for a in range(start, stop, _BLOCK_ROWS):
                sums = self.process.partial_sum_rows(
                    path_config, sampler, key, a, min(a + _BLOCK_ROWS, stop)
                )
                parts.append((np.abs(sums).max(axis=1), sums[:, -1]))
            return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])

        with self.timed("persistence"):
            peaks, terminal = concat_chunks(self.map_replicas(replicas, task))
        c = self.process.scale_constant(path_config, terminal)
        scaled = peaks * (c / path_config.n**path_config.scaling_index)

        hits = np.array([int(np.count_nonzero(scaled > level)) for level in u], dtype=np.int64)
        tails = hits / replicas
        stderrs = np.array([proportion_stderr(float(t), replicas) for t in tails])
        if np.all(hits == 0):
            raise DegenerateFitError("every tail estimate is zero", code="degenerate_fit")
        if hits[-1] < MIN_TAIL_HITS:
            logger.warning(
                "Tail level has too few hits",
                level=float(u[-1]),
                hits=int(hits[-1]),
                minimum=MIN_TAIL_HITS,
            )

        usable = (u > 0) & (hits >= MIN_TAIL_HITS) & (tails < 1.0)
        if np.count_nonzero(usable) < 2:
            raise InsufficientDataError(
                "tail fit needs >= 2 levels with enough hits", code="insufficient_data"
            )
        fit = stats.linregress(np.log(u[usable]), np.log(-np.log(tails[usable])))
        return TailCurve(
            levels=u,
            tails=tails,
            stderrs=stderrs,
            hits=hits,
            replicas=replicas,
            gamma=float(fit.slope),
            gamma_stderr=float(fit.stderr),
            intercept=float(fit.intercept),
            fitted_levels=u[usable].tolist(),
        )

    def boundary_comparison(
        self,
        config: HermitePathConfig,
        horizons: Sequence[int],
        replicas: int,
        seed: int | None = None,
        oversample: int = 1,
    ) -> BoundaryTable:
        """
        Barriers -1, 0, +1 and the late-start event sup_{[1,T]} <= -1 on
        shared paths, with an exponent fit per barrier when possible.
        """
        maxima = self.simulate_maxima(config, horizons, replicas, seed, oversample)
        estimates = [maxima.estimate(b, t) for t in maxima.horizons for b in (-1.0, 0.0, 1.0)]
        estimates += [maxima.estimate(-1.0, t, "late_start") for t in maxima.horizons]

        fits: dict[str, ExponentFit | None] = {}
        for label, barrier, event in (
            ("-1", -1.0, "sup"),
            ("0", 0.0, "sup"),
            ("+1", 1.0, "sup"),
            ("late-1", -1.0, "late_start"),
        ):
            chosen = [e for e in estimates if e.barrier == barrier and e.event == event]
            try:
                fits[label] = self.fit_exponent(chosen)
            except InsufficientDataError:
                fits[label] = None
        return BoundaryTable(estimates=estimates, fits=fits)

    def barrier_switch_check(
        self,
        config: HermitePathConfig,
        horizons: Sequence[int],
        replicas: int,
        seed: int | None = None,
        oversample: int = 1,
    ) -> list[SwitchRow]:
        """
        Empirical P(sup_{[1,T]} Y <= -1) >= P(Y_1 <= -2) P(sup_{[0,T-1]} Y <= 1).

        The left event starts at unit time. On the integer grid it is the
        plain supremum; with oversampling the points inside (0, 1) are not
        controlled by the right-hand events.

        Raises:
            ValidationError: A horizon below 2.
        """
        grid = self._check_horizons(horizons)
        if grid[0] < 2:
            raise ValidationError(
                "barrier switch needs horizons >= 2", field="horizons", code="range"
            )
        shorter = [t - 1 for t in grid]
        maxima = self.simulate_maxima(config, sorted({*grid, *shorter}), replicas, seed, oversample)
        start_low = maxima.anchor <= -2.0 * maxima.unit
        rows = []
        for t in grid:
            left = maxima.survives(-1.0, t, "late_start")
            rest = maxima.survives(1.0, t - 1)
            rows.append(
                SwitchRow(
                    horizon=t,
                    left=PersistenceEstimate.from_indicators(t, -1.0, left, "late_start"),
                    margin=product_margin(left, [start_low, rest]),
                )
            )
        return rows

    def discretization_gap(
        self,
        config: HermitePathConfig,
        horizon: int,
        replicas: int,
        seed: int | None = None,
        oversample: int = 4,
        barrier: float = 1.0,
    ) -> GapReport:
        """
        Compare persistence on the integer grid with the oversampled grid.

        Also estimates the within-cell excursion probability
        P(max_k sup_{t in [k-1,k]} (Y_t - Y_{k-1}) > 1), which bounds how far
        the continuous supremum can exceed the grid maximum.
        """
        self._check_replicas(replicas)
        if oversample < 2:
            raise ValidationError(
                "oversample must be >= 2 to measure a gap", field="oversample", code="range"
            )
        grid = self._check_horizons([horizon])
        key = self.resolve_seed(seed)
        q = oversample
        path_config = config.with_length(grid[0] * q)
        sampler = self.process.row_sampler(path_config)

        def task(start: int, stop: int) -> tuple[NDArray[np.float64], ...]:
            parts: list[tuple[NDArray[np.float64], ...]] = []
            for a in range(start, stop, _BLOCK_ROWS):
                sums = self.process.partial_sum_rows(
                    path_config, sampler, key, a, min(a + _BLOCK_ROWS, stop)
                )
                cells = sums.reshape(sums.shape[0], -1, q)
                starts = np.concatenate(
                    [np.zeros((sums.shape[0], 1)), cells[:, :-1, -1]], axis=1
                )
                excursion = (cells - starts[:, :, None]).max(axis=(1, 2))
                grid_max = cells[:, :, -1].max(axis=1)
                parts.append((grid_max, sums.max(axis=1), excursion, sums[:, -1]))
            return tuple(np.concatenate(col) for col in zip(*parts, strict=True))

        with self.timed("persistence"):
            coarse, fine, excursion, terminal = concat_chunks(self.map_replicas(replicas, task))
        c = self.process.scale_constant(path_config, terminal)
        unit = q**path_config.scaling_index / c

        def below(values: NDArray[np.float64]) -> NDArray[np.bool_]:
            out: NDArray[np.bool_] = values < 0.0 if barrier == 0.0 else values <= barrier * unit
            return out

        coarse_ok, fine_ok = below(coarse), below(fine)
        gap_ind = coarse_ok & ~fine_ok
        gap = float(gap_ind.mean())
        exc = float(np.mean(excursion > unit))
        return GapReport(
            horizon=grid[0],
            oversample=q,
            barrier=barrier,
            coarse=PersistenceEstimate.from_indicators(grid[0], barrier, coarse_ok),
            fine=PersistenceEstimate.from_indicators(grid[0], barrier, fine_ok),
            gap=gap,
            gap_stderr=proportion_stderr(gap, replicas),
            excursion=exc,
            excursion_stderr=proportion_stderr(exc, replicas),
        )
