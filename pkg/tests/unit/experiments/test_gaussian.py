"""Tests for the stationary Gaussian service."""

from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.linalg

from hermite_persist.core.config import Settings
from hermite_persist.core.errors import EmbeddingError, NumericalError, ValidationError
from hermite_persist.core.rng import Stream, replica_generator
from hermite_persist.experiments.gaussian.service import (
    CovarianceSpec,
    GaussianService,
    embedding_size,
    polynomial_covariance,
)


@pytest.fixture
def service(settings):
    return GaussianService(settings)


class TestCovariance:
    """Tests for the polynomial covariance."""

    @pytest.mark.parametrize(
        ("alpha", "lag", "expected"),
        [(0.3, 1, 2**-0.15), (0.5, 3, 10**-0.25), (0.3, 5, 26**-0.15), (0.3, 0, 1.0)],
    )
    def test_values(self, alpha, lag, expected):
        assert polynomial_covariance(alpha, lag) == pytest.approx(expected, rel=1e-12)

    def test_asymptotic_power_law(self):
        j = 1000
        assert polynomial_covariance(0.3, j) * j**0.3 == pytest.approx(1.0, rel=0.01)

    def test_make_covariance(self, service):
        spec = service.make_covariance(0.3, 8)
        assert spec.length == 8
        assert spec.values[0] == 1.0
        assert spec.values[1] == pytest.approx(0.901250, abs=1e-6)
        assert not spec.values.flags.writeable

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
    def test_alpha_domain(self, service, alpha):
        with pytest.raises(ValidationError) as info:
            service.make_covariance(alpha, 8)
        assert info.value.field == "alpha"

    def test_empty_length(self, service):
        with pytest.raises(ValidationError):
            service.make_covariance(0.3, 0)

    def test_custom_spec_pads_with_zeros(self):
        spec = CovarianceSpec.custom([1.0, 0.5])
        assert spec.covariance_at(np.array([0, 1, 2, 5])).tolist() == [1.0, 0.5, 0.0, 0.0]


class TestCirculantEmbedding:
    """Tests for circulant embedding."""

    @pytest.mark.parametrize(("n", "size"), [(1, 1), (2, 2), (5, 8), (6, 16), (64, 128)])
    def test_embedding_size(self, n, size):
        assert embedding_size(n) == size

    def test_white_noise_spectrum_is_flat(self, service):
        embedding = service.circulant_embed(CovarianceSpec.white_noise(8))
        np.testing.assert_allclose(embedding.eigenvalues, 1.0)
        assert embedding.clip_mass == 0.0

    def test_polynomial_embedding_nonnegative(self, service):
        embedding = service.circulant_embed(service.make_covariance(0.3, 64))
        assert np.all(embedding.eigenvalues >= 0.0)
        assert embedding.relative_clip_mass <= 1e-8

    def test_two_point_spectrum(self, service):
        embedding = service.circulant_embed(service.make_covariance(0.3, 2), tolerance=0.0)
        assert embedding.size == 2
        assert embedding.clip_mass == 0.0
        assert sorted(embedding.eigenvalues) == pytest.approx([0.098750, 1.901250], abs=1e-6)

    @pytest.mark.parametrize(
        ("spec", "tolerance"),
        [
            (CovarianceSpec.white_noise(8), None),
            (CovarianceSpec.custom([1.0, 1.0, 1.0, 1.0]), 0.5),
        ],
    )
    def test_spectrum_mean_is_unit_variance(self, service, spec, tolerance):
        embedding = service.circulant_embed(spec, tolerance=tolerance)
        unclipped = float(embedding.eigenvalues.sum()) - embedding.clip_mass
        assert unclipped / embedding.size == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("length", [16, 64, 256])
    def test_polynomial_spectrum_mean(self, service, length):
        embedding = service.circulant_embed(service.make_covariance(0.3, length))
        unclipped = float(embedding.eigenvalues.sum()) - embedding.clip_mass
        assert unclipped / embedding.size == pytest.approx(1.0, abs=1e-12)

    def test_embedding_cached(self, service):
        spec = service.make_covariance(0.3, 64)
        assert service.circulant_embed(spec) is service.circulant_embed(spec)

    def test_negative_mass_raises(self, service):
        # all-ones lags truncated at n: eigenvalues -1 at even nonzero frequencies
        spec = CovarianceSpec.custom([1.0, 1.0, 1.0, 1.0])
        with pytest.raises(EmbeddingError) as info:
            service.circulant_embed(spec)
        assert info.value.clip_mass == pytest.approx(3.0)

    def test_large_tolerance_clips(self, service):
        spec = CovarianceSpec.custom([1.0, 1.0, 1.0, 1.0])
        embedding = service.circulant_embed(spec, tolerance=0.5)
        assert embedding.clip_mass == pytest.approx(3.0)
        assert np.all(embedding.eigenvalues >= 0.0)

    def test_negative_tolerance(self, service):
        with pytest.raises(ValidationError):
            service.circulant_embed(CovarianceSpec.white_noise(4), tolerance=-1.0)


class TestSampling:
    """Tests for sample reproducibility and fidelity."""

    def test_shape_and_method(self, service):
        spec = service.make_covariance(0.3, 16)
        sample = service.sample(spec, 10, seed=1)
        assert sample.data.shape == (10, 16)
        assert sample.method == "circulant"
        assert sample.seed == 1

    def test_default_seed(self, service):
        spec = service.make_covariance(0.3, 8)
        assert service.sample(spec, 2).seed == 42

    def test_reproducible(self, service):
        spec = service.make_covariance(0.3, 16)
        a = service.sample(spec, 50, seed=3).data
        b = service.sample(spec, 50, seed=3).data
        np.testing.assert_array_equal(a, b)

    def test_replica_prefix_stable(self, service):
        """Row r depends only on (seed, r), not on the replica count."""
        spec = service.make_covariance(0.3, 16)
        small = service.sample(spec, 10, seed=3).data
        large = service.sample(spec, 200, seed=3).data
        np.testing.assert_array_equal(small, large[:10])

    def test_rows_span_draw_blocks(self, service):
        embedding = service.circulant_embed(service.make_covariance(0.3, 8))
        whole = service.circulant_rows(embedding, 7, 0, 600)
        parts = np.vstack(
            [
                service.circulant_rows(embedding, 7, 0, 300),
                service.circulant_rows(embedding, 7, 300, 600),
            ]
        )
        np.testing.assert_array_equal(whole, parts)

    @pytest.mark.parametrize("workers", [2, 8])
    def test_worker_invariance(self, workers):
        spec_service = GaussianService(Settings(chunk_size=16), workers=1)
        spec = spec_service.make_covariance(0.3, 32)
        reference = spec_service.sample(spec, 100, seed=5).data
        parallel = GaussianService(Settings(chunk_size=16), workers=workers).sample(
            spec, 100, seed=5
        )
        np.testing.assert_array_equal(reference, parallel.data)

    def test_zero_replicas(self, service):
        spec = service.make_covariance(0.3, 8)
        with pytest.raises(ValidationError):
            service.sample_paths(service.circulant_embed(spec), 0)

    def test_white_noise_lag_one_uncorrelated(self, service):
        sample = service.sample(CovarianceSpec.white_noise(8), 20_000, seed=2)
        lag1 = service.empirical_covariance(sample, 2)[1]
        assert abs(lag1.estimate) <= 4.0 * lag1.stderr

    def test_covariance_fidelity(self, service):
        spec = service.make_covariance(0.3, 16)
        sample = service.sample(spec, 20_000, seed=7)
        for estimate in service.empirical_covariance(sample, 15):
            assert abs(estimate.z_score) < 5.0

    def test_stationarity(self, service):
        spec = service.make_covariance(0.3, 16)
        sample = service.sample(spec, 20_000, seed=8)
        start = service.empirical_covariance(sample, 5, origin=0)
        middle = service.empirical_covariance(sample, 5, origin=8)
        for a, b in zip(start, middle, strict=True):
            combined = math.hypot(a.stderr, b.stderr)
            assert abs(a.estimate - b.estimate) < 5.0 * combined

    def test_lag_out_of_range(self, service):
        sample = service.sample(service.make_covariance(0.3, 8), 4, seed=1)
        with pytest.raises(ValidationError) as info:
            service.empirical_covariance(sample, 5, origin=4)
        assert info.value.code == "range"


class TestCholesky:
    """Tests for the Cholesky oracle sampler."""

    def test_exact_factor(self, service):
        spec = service.make_covariance(0.3, 8)
        factor = service.cholesky_factor(spec)
        expected = scipy.linalg.toeplitz(spec.values)
        np.testing.assert_allclose(factor @ factor.T, expected, atol=1e-12)

    def test_cap(self):
        service = GaussianService(Settings(cholesky_cap=8))
        with pytest.raises(ValidationError) as info:
            service.cholesky_factor(service.make_covariance(0.3, 16))
        assert info.value.code == "range"

    def test_not_positive_definite(self, service):
        with pytest.raises(NumericalError) as info:
            service.cholesky_factor(CovarianceSpec.custom([1.0, 1.0, 1.0, 1.0]))
        assert info.value.code == "not_positive_definite"

    def test_auto_falls_back_then_fails(self, service):
        """auto tries Cholesky after an embedding failure; a singular matrix still fails."""
        with pytest.raises(NumericalError):
            service.sample(CovarianceSpec.custom([1.0, 1.0, 1.0, 1.0]), 4, seed=1)

    def test_circulant_method_does_not_fall_back(self, service):
        with pytest.raises(EmbeddingError):
            service.sample(CovarianceSpec.custom([1.0, 1.0, 1.0, 1.0]), 4, 1, "circulant")

    def test_rows_use_their_own_stream(self, service):
        factor = service.cholesky_factor(service.make_covariance(0.3, 8))
        rows = service.cholesky_rows(factor, 3, 5, 7)
        xi = replica_generator(3, 6, Stream.CHOLESKY).standard_normal(8)
        np.testing.assert_allclose(rows[1], factor @ xi, rtol=0, atol=1e-14)

    def test_cholesky_sample(self, service):
        spec = service.make_covariance(0.3, 8)
        sample = service.sample(spec, 20, seed=1, method="cholesky")
        assert sample.method == "cholesky"
        assert sample.data.shape == (20, 8)

    def test_compare_samplers(self, service):
        spec = service.make_covariance(0.3, 8)
        report = service.compare_samplers(spec, 5_000, seed=11)
        assert report["max_z"] < 6.0
        assert 0.0 <= report["ks_distance"] < 0.05
