"""Hermite polynomial service.

Probabilists' Hermite polynomials, Hermite series expansion under the
standard Gaussian measure, Hermite rank, and the convex-function rank audit.

Coefficients follow f = sum_j c_j h_j with c_j = E[f(X) h_j(X)] / j!.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray
from scipy import integrate
from scipy.special import factorial

from hermite_persist.core.base import ExperimentService
from hermite_persist.core.cache import cache
from hermite_persist.core.errors import NumericalError, ValidationError

logger = structlog.get_logger()

RealFunction = Callable[[NDArray[np.float64]], NDArray[np.float64]]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def hermite_eval(m: int, x: ArrayLike) -> NDArray[np.float64]:
    """
    Probabilists' Hermite polynomial h_m at ``x``.

    Uses h_{k+1}(x) = x h_k(x) - k h_{k-1}(x), h_0 = 1, h_1 = x.
    """
    if m < 0:
        raise ValidationError(f"order must be >= 0, got {m}", field="m", code="parameter_domain")
    x = np.asarray(x, dtype=np.float64)
    prev = np.ones_like(x)
    if m == 0:
        return prev
    cur = x.copy()
    for k in range(1, m):
        prev, cur = cur, x * cur - k * prev
    return cur


def hermite_table(max_order: int, x: NDArray[np.float64]) -> NDArray[np.float64]:
    """Rows h_0(x), ..., h_J(x)."""
    table = np.empty((max_order + 1, x.size), dtype=np.float64)
    table[0] = 1.0
    if max_order >= 1:
        table[1] = x
    for k in range(1, max_order):
        table[k + 1] = x * table[k] - k * table[k - 1]
    return table


@dataclass(frozen=True, eq=False)
class ExpansionCoefficients:
    """
    Hermite series coefficients c_0..c_J of a function.

    Attributes:
        coeffs: c_j with f = sum c_j h_j.
        quadrature_order: Gauss-Hermite nodes used (0 for adaptive integration).
        residual: E[f^2] - sum c_j^2 j! (clipped at 0).
        second_moment: E[f(X)^2].
        method: "gauss-hermite" or "piecewise".
    """

    coeffs: NDArray[np.float64]
    quadrature_order: int
    residual: float
    second_moment: float
    method: Literal["gauss-hermite", "piecewise"] = "gauss-hermite"

    @property
    def max_order(self) -> int:
        return int(self.coeffs.size - 1)

    @property
    def normalized(self) -> NDArray[np.float64]:
        """|c_j| sqrt(j!), the L2 mass carried by order j."""
        j = np.arange(self.coeffs.size)
        out: NDArray[np.float64] = np.abs(self.coeffs) * np.sqrt(factorial(j))
        return out

    @property
    def l2_norm(self) -> float:
        return math.sqrt(max(self.second_moment, 0.0))

    def to_dict(self) -> dict[str, object]:
        return {
            "coeffs": self.coeffs.tolist(),
            "quadrature_order": self.quadrature_order,
            "residual": self.residual,
            "second_moment": self.second_moment,
            "method": self.method,
        }


@dataclass(frozen=True)
class HermiteRank:
    """Smallest order j with |c_j| sqrt(j!) > threshold; None if none <= J."""

    rank: int | None
    threshold: float

    @property
    def found(self) -> bool:
        return self.rank is not None

    def to_dict(self) -> dict[str, object]:
        rank = self.rank if self.rank is not None else "not found"
        return {"rank": rank, "threshold": self.threshold}


@dataclass(frozen=True)
class ConvexityAudit:
    """Outcome of checking the at-most-rank-2 property of a convex function."""

    is_convex_on_grid: bool
    nonzero: bool
    rank: HermiteRank
    violation: bool

    def to_dict(self) -> dict[str, object]:
        return {
            "is_convex_on_grid": self.is_convex_on_grid,
            "nonzero": self.nonzero,
            "rank": self.rank.to_dict(),
            "violation": self.violation,
        }


class HermiteService(ExperimentService):
    """Service for Hermite expansions and rank determination."""

    def hermite_eval(self, m: int, x: ArrayLike) -> NDArray[np.float64]:
        """Evaluate h_m at x."""
        return hermite_eval(m, x)

    def gauss_hermite(self, order: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """
        Nodes and weights for expectations under N(0, 1).

        Physicists' nodes t are mapped to x = sqrt(2) t and weights divided by
        sqrt(pi), so sum w f(x) approximates E[f(X)].
        """

        def build() -> tuple[NDArray[np.float64], NDArray[np.float64]]:
            t, w = np.polynomial.hermite.hermgauss(order)
            x = t * math.sqrt(2.0)
            weights = w / math.sqrt(math.pi)
            x.setflags(write=False)
            weights.setflags(write=False)
            return x, weights

        return cache.get_or_set(("gauss-hermite", order), build)

    def orthogonality_matrix(
        self, max_order: int, quad_order: int | None = None
    ) -> NDArray[np.float64]:
        """Quadrature estimate of E[h_i h_j], i, j <= max_order."""
        x, w = self.gauss_hermite(quad_order or self.settings.quad_order)
        table = hermite_table(max_order, x)
        gram: NDArray[np.float64] = (table * w) @ table.T
        return gram

    def expansion_coeffs(
        self,
        f: RealFunction,
        max_order: int,
        quad_order: int | None = None,
        kinks: Sequence[float] = (),
    ) -> ExpansionCoefficients:
        """
        Hermite coefficients c_0..c_J of ``f``.

        Smooth functions use Gauss-Hermite quadrature. Functions with declared
        kinks are integrated piecewise between kinks by adaptive quadrature,
        where Gauss-Hermite converges only algebraically.

        Raises:
            ValidationError: quad_order < max_order + 1.
            NumericalError: f is not finite at a node.
        """
        order = quad_order or self.settings.quad_order
        if max_order < 0:
            raise ValidationError("max_order must be >= 0", field="max_order")
        if order < max_order + 1:
            raise ValidationError(
                f"quadrature order {order} cannot resolve orders up to {max_order}",
                field="quad_order",
                code="undersampled_quadrature",
            )
        if kinks:
            moments, second = self._piecewise_moments(f, max_order, sorted(kinks))
            method: Literal["gauss-hermite", "piecewise"] = "piecewise"
            used_order = 0
        else:
            x, w = self.gauss_hermite(order)
            fx = np.asarray(f(x), dtype=np.float64)
            if not np.all(np.isfinite(fx)):
                bad = float(x[~np.isfinite(fx)][0])
                raise NumericalError(
                    f"function is not finite at quadrature node {bad:.6g}", code="non_finite"
                )
            moments = hermite_table(max_order, x) @ (w * fx)
            second = float(np.dot(w, fx * fx))
            method = "gauss-hermite"
            used_order = order

        j = np.arange(max_order + 1)
        fact = factorial(j)
        coeffs = moments / fact
        explained = float(np.sum(coeffs * coeffs * fact))
        return ExpansionCoefficients(
            coeffs=coeffs,
            quadrature_order=used_order,
            residual=max(second - explained, 0.0),
            second_moment=second,
            method=method,
        )

    def _piecewise_moments(
        self,
        f: RealFunction,
        max_order: int,
        kinks: list[float],
    ) -> tuple[NDArray[np.float64], float]:
        edges = [-math.inf, *kinks, math.inf]

        def scalar(x: float) -> float:
            value = float(np.asarray(f(np.array([x], dtype=np.float64)))[0])
            if not math.isfinite(value):
                raise NumericalError(f"function is not finite at {x:.6g}", code="non_finite")
            return value

        def expect(g: Callable[[float], float]) -> float:
            total = 0.0
            for a, b in zip(edges[:-1], edges[1:], strict=True):
                value, _ = integrate.quad(
                    lambda x: g(x) * _INV_SQRT_2PI * math.exp(-0.5 * x * x),
                    a,
                    b,
                    epsabs=1e-14,
                    epsrel=1e-12,
                    limit=200,
                )
                total += value
            return total

        moments = np.array(
            [
                expect(lambda x, k=k: scalar(x) * float(hermite_eval(k, x)))
                for k in range(max_order + 1)
            ]
        )
        second = expect(lambda x: scalar(x) ** 2)
        return moments, second

    def hermite_rank(
        self,
        coeffs: ExpansionCoefficients,
        threshold: float | None = None,
    ) -> HermiteRank:
        """
        Smallest j with |c_j| sqrt(j!) above ``threshold * ||f||``.

        The threshold is relative to the L2 norm, so rank is invariant under
        positive scaling of f. A zero function has no rank.
        """
        rel = self.settings.rank_threshold if threshold is None else threshold
        if rel <= 0:
            raise ValidationError("threshold must be > 0", field="threshold")
        absolute = rel * coeffs.l2_norm
        if coeffs.l2_norm == 0.0:
            return HermiteRank(rank=None, threshold=absolute)
        above = np.nonzero(coeffs.normalized > absolute)[0]
        return HermiteRank(rank=int(above[0]) if above.size else None, threshold=absolute)

    def convexity_rank_audit(
        self,
        f: RealFunction,
        convex_witness: ArrayLike,
        max_order: int = 8,
        kinks: Sequence[float] = (),
        threshold: float | None = None,
    ) -> ConvexityAudit:
        """
        Check that a grid-convex, nonzero f has Hermite rank at most 2.

        Convexity is tested by the chord inequality on consecutive grid
        triples (the midpoint test on uniform grids).
        """
        grid = np.unique(np.asarray(convex_witness, dtype=np.float64))
        if grid.size < 3:
            raise ValidationError("convexity grid needs >= 3 distinct points", field="grid")
        values = np.asarray(f(grid), dtype=np.float64)
        left, mid, right = grid[:-2], grid[1:-1], grid[2:]
        chord = ((right - mid) * values[:-2] + (mid - left) * values[2:]) / (right - left)
        slack = 1e-12 * max(1.0, float(np.max(np.abs(values))))
        is_convex = bool(np.all(values[1:-1] <= chord + slack))

        expansion = self.expansion_coeffs(f, max_order, kinks=kinks)
        rank = self.hermite_rank(expansion, threshold)
        nonzero = expansion.l2_norm > 0.0 and bool(np.any(values != 0.0))
        violation = is_convex and nonzero and (rank.rank is None or rank.rank >= 3)
        if violation:
            logger.warning("Convex function with Hermite rank above 2", rank=rank.rank)
        return ConvexityAudit(
            is_convex_on_grid=is_convex, nonzero=nonzero, rank=rank, violation=violation
        )
