"""Stationary Gaussian sequence service.

Exact simulation of centered stationary Gaussian sequences with covariance
r(j) = (1 + j^2)^(-alpha/2) by circulant embedding, a Toeplitz/Cholesky
oracle sampler, and empirical covariance diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg
import structlog
from numpy.typing import NDArray
from scipy import stats

from hermite_persist.core.base import ExperimentService
from hermite_persist.core.cache import cache
from hermite_persist.core.errors import EmbeddingError, NumericalError, ValidationError
from hermite_persist.core.parallel import concat_chunks
from hermite_persist.core.rng import Stream, standard_normal_rows

logger = structlog.get_logger()

_DRAW_ROWS = 256

SamplingMethod = Literal["circulant", "cholesky"]


def _frozen(values: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.array(values, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class CovarianceSpec:
    """
    Stationary covariance r(0..n-1) of the driving Gaussian sequence.

    ``alpha`` is None for hand-made specs built with :meth:`custom`; those
    cannot be evaluated past their stored lags (embedding pads with zeros).
    """

    alpha: float | None
    length: int
    values: NDArray[np.float64]

    @classmethod
    def custom(cls, values: list[float] | NDArray[np.float64]) -> CovarianceSpec:
        """Spec from explicit lag values (white noise, injected defects)."""
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("Covariance needs at least one lag", code="empty_spec")
        return cls(alpha=None, length=int(arr.size), values=_frozen(arr))

    @classmethod
    def white_noise(cls, length: int) -> CovarianceSpec:
        values = np.zeros(length)
        values[:1] = 1.0
        return cls.custom(values)

    def covariance_at(self, lags: NDArray[np.int64]) -> NDArray[np.float64]:
        """r at arbitrary nonnegative lags."""
        lags = np.asarray(lags)
        if self.alpha is not None:
            return polynomial_covariance(self.alpha, lags)
        out = np.zeros(lags.shape, dtype=np.float64)
        inside = lags < self.length
        out[inside] = self.values[lags[inside]]
        return out

    def to_dict(self) -> dict[str, object]:
        return {"alpha": self.alpha, "length": self.length}


@dataclass(frozen=True, eq=False)
class SpectralEmbedding:
    """
    Spectrum of the even circulant extension of a covariance.

    Attributes:
        size: Embedding length M.
        eigenvalues: M nonnegative eigenvalues (after clipping).
        clip_mass: Negative eigenvalue mass removed.
        total_mass: Sum of |eigenvalues| before clipping.
        spec: Covariance being embedded.
    """

    size: int
    eigenvalues: NDArray[np.float64]
    clip_mass: float
    total_mass: float
    spec: CovarianceSpec
    scale: NDArray[np.float64] = field(repr=False)

    @property
    def relative_clip_mass(self) -> float:
        return self.clip_mass / self.total_mass if self.total_mass > 0 else 0.0

    def to_dict(self) -> dict[str, object]:
        return {
            "size": self.size,
            "clip_mass": self.clip_mass,
            "relative_clip_mass": self.relative_clip_mass,
            "spec": self.spec.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class GaussianSample:
    """R replicas x n points of a stationary Gaussian sequence."""

    data: NDArray[np.float64]
    seed: int
    method: SamplingMethod
    spec: CovarianceSpec

    @property
    def replicas(self) -> int:
        return int(self.data.shape[0])

    @property
    def length(self) -> int:
        return int(self.data.shape[1])


@dataclass(frozen=True)
class CovarianceEstimate:
    """Cross-replica estimate of E[X_i X_{i+lag}]."""

    lag: int
    estimate: float
    stderr: float
    exact: float | None = None

    @property
    def z_score(self) -> float | None:
        if self.exact is None:
            return None
        if self.stderr == 0:
            return 0.0 if self.estimate == self.exact else math.inf
        return (self.estimate - self.exact) / self.stderr


def polynomial_covariance(alpha: float, lags: NDArray[np.int64] | int) -> NDArray[np.float64]:
    """r(j) = (1 + j^2)^(-alpha/2)."""
    j = np.asarray(lags, dtype=np.float64)
    return np.power(1.0 + j * j, -alpha / 2.0)


def embedding_size(length: int) -> int:
    """Smallest power of two >= 2(n-1) (at least 1)."""
    target = max(2 * (length - 1), 1)
    return 1 << (target - 1).bit_length()


def _spectrum(spec: CovarianceSpec, size: int) -> NDArray[np.float64]:
    if size == 1:
        row = spec.covariance_at(np.array([0]))
    else:
        half = size // 2
        r = spec.covariance_at(np.arange(half + 1))
        row = np.concatenate([r, r[half - 1 : 0 : -1]])
    eig: NDArray[np.float64] = np.fft.fft(row).real
    return eig


class GaussianService(ExperimentService):
    """Service for stationary Gaussian sampling and covariance diagnostics."""

    def make_covariance(self, alpha: float, length: int) -> CovarianceSpec:
        """
        Build the polynomially decaying covariance.

        Args:
            alpha: Decay exponent in (0, 1).
            length: Number of lags n.

        Raises:
            ValidationError: alpha outside (0, 1) or length < 1.
        """
        if not 0.0 < alpha < 1.0:
            raise ValidationError(
                f"alpha must lie in (0, 1), got {alpha}", field="alpha", code="parameter_domain"
            )
        if length < 1:
            raise ValidationError("length must be >= 1", field="length", code="empty_spec")
        values = polynomial_covariance(alpha, np.arange(length))
        return CovarianceSpec(alpha=float(alpha), length=int(length), values=_frozen(values))

    def circulant_embed(
        self,
        spec: CovarianceSpec,
        tolerance: float | None = None,
    ) -> SpectralEmbedding:
        """
        Spectrum of the circulant extension of ``spec``.

        Negative eigenvalues whose aggregate mass is within ``tolerance`` of the
        total absolute mass are clipped to zero. Larger negative mass triggers
        doubling of the embedding length (analytic specs only) up to
        ``embedding_max_doublings`` times.

        Raises:
            EmbeddingError: Negative mass still above tolerance.
        """
        tol = self.settings.clip_tolerance if tolerance is None else tolerance
        if tol < 0:
            raise ValidationError("tolerance must be >= 0", field="tolerance")
        doublings = self.settings.embedding_max_doublings

        def build() -> SpectralEmbedding:
            return self._embed(spec, tol, doublings)

        if spec.alpha is None:
            return build()
        return cache.get_or_set(("embedding", spec.alpha, spec.length, tol, doublings), build)

    def _embed(self, spec: CovarianceSpec, tol: float, doublings: int) -> SpectralEmbedding:
        size = embedding_size(spec.length)
        for attempt in range(doublings + 1):
            eig = _spectrum(spec, size)
            negative = float(-eig[eig < 0].sum())
            total = float(np.abs(eig).sum())
            if negative <= tol * total:
                clipped = np.clip(eig, 0.0, None)
                if negative > 0:
                    logger.info("Clipped negative eigenvalues", size=size, clip_mass=negative)
                return SpectralEmbedding(
                    size=size,
                    eigenvalues=_frozen(clipped),
                    clip_mass=negative,
                    total_mass=total,
                    spec=spec,
                    scale=_frozen(np.sqrt(clipped / size)),
                )
            if spec.alpha is None or attempt == doublings:
                raise EmbeddingError(
                    f"Circulant embedding of size {size} has relative negative mass "
                    f"{negative / total:.3e} above tolerance {tol:.1e}",
                    clip_mass=negative,
                    details={"size": size, "total_mass": total},
                )
            logger.warning("Growing circulant embedding", size=size, clip_mass=negative)
            size *= 2
        raise AssertionError("unreachable")

    def circulant_rows(
        self,
        embedding: SpectralEmbedding,
        seed: int,
        start: int,
        stop: int,
    ) -> NDArray[np.float64]:
        """Replicas ``[start, stop)`` of the circulant sampler."""
        size = embedding.size
        n = embedding.spec.length
        out = np.empty((max(stop - start, 0), n), dtype=np.float64)
        for a in range(start, stop, _DRAW_ROWS):
            z = standard_normal_rows(seed, a, min(a + _DRAW_ROWS, stop), 2 * size)
            for i, row in enumerate(z, start=a - start):
                w = embedding.scale * (row[:size] + 1j * row[size:])
                out[i] = np.fft.fft(w)[:n].real
        return out

    def sample_paths(
        self,
        embedding: SpectralEmbedding,
        replicas: int,
        seed: int | None = None,
    ) -> GaussianSample:
        """
        Draw ``replicas`` sequences from a circulant embedding.

        Row r depends only on ``(seed, r)``.
        """
        if replicas < 1:
            raise ValidationError("replicas must be >= 1", field="replicas")
        key = self.resolve_seed(seed)
        with self.timed("stationary_gaussian"):
            chunks = self.map_replicas(
                replicas, lambda a, b: self.circulant_rows(embedding, key, a, b)
            )
        return GaussianSample(
            data=concat_chunks(chunks), seed=key, method="circulant", spec=embedding.spec
        )

    def cholesky_factor(self, spec: CovarianceSpec) -> NDArray[np.float64]:
        """
        Lower Cholesky factor of the Toeplitz covariance.

        Raises:
            ValidationError: n above the configured cap.
            NumericalError: Matrix not positive definite; smallest pivot reported.
        """
        cap = self.settings.cholesky_cap
        if spec.length > cap:
            raise ValidationError(
                f"Cholesky sampler is capped at n={cap}, got {spec.length}",
                field="length",
                code="range",
            )

        def build() -> NDArray[np.float64]:
            matrix = scipy.linalg.toeplitz(spec.values)
            try:
                return _frozen(np.linalg.cholesky(matrix))
            except np.linalg.LinAlgError as e:
                _, d, _ = scipy.linalg.ldl(matrix)
                pivot = float(np.linalg.eigvalsh(d).min())
                raise NumericalError(
                    f"Toeplitz covariance is not positive definite (smallest pivot {pivot:.3e})",
                    pivot=pivot,
                    code="not_positive_definite",
                ) from e

        if spec.alpha is None:
            return build()
        return cache.get_or_set(("cholesky", spec.alpha, spec.length), build)

    def cholesky_rows(
        self,
        factor: NDArray[np.float64],
        seed: int,
        start: int,
        stop: int,
    ) -> NDArray[np.float64]:
        """Replicas ``[start, stop)`` of the Cholesky sampler."""
        xi = standard_normal_rows(seed, start, stop, factor.shape[0], Stream.CHOLESKY)
        out = np.empty_like(xi)
        for row, x in enumerate(xi):
            out[row] = factor @ x
        return out

    def cholesky_sample(
        self,
        spec: CovarianceSpec,
        replicas: int,
        seed: int | None = None,
    ) -> GaussianSample:
        """Exact-covariance sample via triangular factorization."""
        if replicas < 1:
            raise ValidationError("replicas must be >= 1", field="replicas")
        key = self.resolve_seed(seed)
        factor = self.cholesky_factor(spec)
        with self.timed("stationary_gaussian"):
            chunks = self.map_replicas(
                replicas, lambda a, b: self.cholesky_rows(factor, key, a, b)
            )
        return GaussianSample(data=concat_chunks(chunks), seed=key, method="cholesky", spec=spec)

    def sample(
        self,
        spec: CovarianceSpec,
        replicas: int,
        seed: int | None = None,
        method: SamplingMethod | Literal["auto"] = "auto",
    ) -> GaussianSample:
        """
        Sample with the requested method; ``auto`` prefers circulant and
        falls back to Cholesky when the embedding fails and n is small enough.
        """
        if method == "cholesky":
            return self.cholesky_sample(spec, replicas, seed)
        try:
            embedding = self.circulant_embed(spec)
        except EmbeddingError:
            if method == "auto" and spec.length <= self.settings.cholesky_cap:
                logger.warning("Falling back to Cholesky sampler", length=spec.length)
                return self.cholesky_sample(spec, replicas, seed)
            raise
        return self.sample_paths(embedding, replicas, seed)

    def empirical_covariance(
        self,
        sample: GaussianSample,
        max_lag: int,
        origin: int = 0,
    ) -> list[CovarianceEstimate]:
        """
        Cross-replica averages of X_origin * X_{origin+j}, j = 0..max_lag.

        Raises:
            ValidationError: origin + max_lag >= n.
        """
        if max_lag < 0 or origin < 0 or origin + max_lag >= sample.length:
            raise ValidationError(
                f"lags up to {max_lag} from position {origin} exceed length {sample.length}",
                field="max_lag",
                code="range",
            )
        data = sample.data
        products = data[:, origin : origin + 1] * data[:, origin : origin + max_lag + 1]
        means = products.mean(axis=0)
        if sample.replicas > 1:
            stderrs = products.std(axis=0, ddof=1) / math.sqrt(sample.replicas)
        else:
            stderrs = np.full(max_lag + 1, math.inf)
        exact = sample.spec.covariance_at(np.arange(max_lag + 1))
        return [
            CovarianceEstimate(
                lag=j, estimate=float(means[j]), stderr=float(stderrs[j]), exact=float(exact[j])
            )
            for j in range(max_lag + 1)
        ]

    def compare_samplers(
        self,
        spec: CovarianceSpec,
        replicas: int,
        seed: int | None = None,
    ) -> dict[str, float]:
        """
        Circulant versus Cholesky: worst entrywise covariance z-score and the
        two-sample Kolmogorov-Smirnov distance of the first marginal.
        """
        if replicas < 2:
            raise ValidationError("sampler comparison needs >= 2 replicas", field="replicas")
        key = self.resolve_seed(seed)
        circ = self.sample_paths(self.circulant_embed(spec), replicas, key)
        chol = self.cholesky_sample(spec, replicas, key)
        a, b = circ.data, chol.data
        worst = 0.0
        for i in range(spec.length):
            pa = a[:, i : i + 1] * a[:, i:]
            pb = b[:, i : i + 1] * b[:, i:]
            se = np.sqrt((pa.var(axis=0, ddof=1) + pb.var(axis=0, ddof=1)) / replicas)
            diff = np.abs(pa.mean(axis=0) - pb.mean(axis=0))
            with np.errstate(divide="ignore", invalid="ignore"):
                z = np.where(se > 0, diff / se, 0.0)
            worst = max(worst, float(z.max()))
        ks = stats.ks_2samp(circ.data[:, 0], chol.data[:, 0])
        return {"max_z": worst, "ks_distance": float(ks.statistic), "ks_pvalue": float(ks.pvalue)}
