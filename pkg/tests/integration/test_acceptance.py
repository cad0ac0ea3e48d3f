"""Full-scale Monte Carlo acceptance runs.

Each test uses the default seed and takes seconds to minutes. Deselected by
default; run with ``pytest -m slow``.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from hermite_persist.cli import run
from hermite_persist.core.config import Settings
from hermite_persist.experiments.decorrelation.gci import correlation_matrix, parse_set
from hermite_persist.experiments.decorrelation.service import DecorrelationService
from hermite_persist.experiments.gaussian.service import GaussianService
from hermite_persist.experiments.hermite.functions import CONVEXITY_BATTERY, get_function
from hermite_persist.experiments.hermite.service import HermiteService
from hermite_persist.experiments.persistence.service import (
    PersistenceService,
    weighted_loglog_fit,
)
from hermite_persist.experiments.process.service import HermitePathConfig, ProcessService

pytestmark = pytest.mark.slow

HORIZONS = [2**k for k in range(6, 13)]


@pytest.fixture
def full_settings():
    return Settings(workers=4)


class TestGaussianLayer:
    def test_covariance_fidelity(self, full_settings):
        service = GaussianService(full_settings)
        sample = service.sample(service.make_covariance(0.3, 64), 100_000)
        estimates = service.empirical_covariance(sample, 63)
        assert estimates[5].exact == pytest.approx((1 + 25) ** -0.15)
        assert max(abs(e.z_score) for e in estimates) < 5.0

    def test_sampler_oracle(self, full_settings):
        service = GaussianService(full_settings)
        result = service.compare_samplers(service.make_covariance(0.3, 32), 100_000)
        assert result["max_z"] < 5.0
        assert result["ks_distance"] < 0.01


class TestProcessLayer:
    def test_rank_two_variance(self, full_settings):
        service = ProcessService(full_settings)
        config = HermitePathConfig(2, 0.7, 256, "raw")
        terminal = service.simulate_sums(config, 100_000)[:, -1]
        exact = service.exact_partial_sum_variance(service.driving_covariance(config), 2, 256)
        centered = terminal - terminal.mean()
        stderr = float(np.std(centered**2, ddof=1)) / math.sqrt(terminal.size)
        assert abs(float(np.var(terminal, ddof=1)) - exact) < 5.0 * stderr

    def test_self_similar_scaling(self, full_settings):
        ratio = ProcessService(full_settings).variance_ratio(HermitePathConfig(2, 0.7, 2**10))
        assert abs(ratio / 2**1.4 - 1.0) < 0.10

    def test_moment_stabilization(self, full_settings):
        rows = ProcessService(full_settings).moment_scaling_diagnostic(
            HermitePathConfig(2, 0.7, 2**12), 2.0, [2**11, 2**12], 10_000
        )
        assert rows[1].ratio is not None
        assert 0.85 <= rows[1].ratio <= 1.15


class TestPersistenceExponent:
    def test_window_on_log_corrected_input(self):
        p = [t**-0.3 * math.log(t) ** -0.5 for t in HORIZONS]
        fit = weighted_loglog_fit(HORIZONS, p, [0.0] * len(HORIZONS))
        assert 0.2 <= fit.theta <= 0.45
        assert fit.covers(0.3, slack=0.1)

    def test_rosenblatt(self, full_settings):
        service = PersistenceService(full_settings)
        config = HermitePathConfig(2, 0.7, HORIZONS[-1])
        fit = service.fit_exponent(service.estimate_grid(config, HORIZONS, [0.0], 20_000))
        assert 0.2 <= fit.theta <= 0.45
        assert fit.covers(0.3, slack=0.1)

    def test_gaussian_control(self, full_settings):
        service = PersistenceService(full_settings)
        config = HermitePathConfig(1, 0.75, HORIZONS[-1])
        fit = service.fit_exponent(service.estimate_grid(config, HORIZONS, [0.0], 20_000))
        assert abs(fit.theta - 0.25) <= 0.08

    def test_barrier_insensitivity(self, full_settings):
        service = PersistenceService(full_settings)
        config = HermitePathConfig(2, 0.7, HORIZONS[-1])
        table = service.boundary_comparison(config, HORIZONS, 20_000)
        fits = [table.fits[label] for label in ("-1", "0", "+1")]
        assert all(fit is not None for fit in fits)
        assert max(f.ci_low for f in fits) <= min(f.ci_high for f in fits)


class TestDecorrelation:
    def test_battery(self, full_settings):
        result = DecorrelationService(full_settings).run_battery(100_000)
        assert len(result.reports) == 20
        assert result.violations == 0
        assert result.single_block_exact

    def test_discrete_equal_blocks(self, full_settings):
        gaussian = GaussianService(full_settings)
        sample = gaussian.sample(gaussian.make_covariance(0.3, 65), 100_000)
        report = DecorrelationService(full_settings).check_discrete_inequality(
            [0, 16, 32, 48, 64], [2.0] * 4, sample
        )
        assert report.z_score >= -3.0

    def test_gci_correlated_boxes(self, full_settings):
        report = DecorrelationService(full_settings).gci_sanity(
            correlation_matrix(2, 0.8, "ar"),
            (parse_set("box:1,inf"), parse_set("box:inf,1")),
            1_000_000,
        )
        assert report.estimate.z_score >= 3.0
        assert report.oracle_z is not None
        assert abs(report.oracle_z) <= 3.0


class TestTailExponents:
    def test_gaussian_tail(self, full_settings):
        curve = PersistenceService(full_settings).estimate_tail(
            HermitePathConfig(1, 0.75, 256), [1.5, 2.0, 2.5, 3.0, 3.5, 4.0], 1_000_000
        )
        assert 1.7 <= curve.gamma <= 2.3

    def test_rosenblatt_tail(self, full_settings):
        # {2, .., 5} sits where the fitted slope is still biased low.
        curve = PersistenceService(full_settings).estimate_tail(
            HermitePathConfig(2, 0.7, 256), [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], 1_000_000
        )
        assert 0.7 <= curve.gamma <= 1.3


class TestHermiteMachinery:
    def test_orthogonality(self):
        service = HermiteService()
        gram = service.orthogonality_matrix(8)
        norms = np.array([math.factorial(j) for j in range(9)], dtype=np.float64)
        np.testing.assert_allclose(
            gram / np.sqrt(np.outer(norms, norms)), np.eye(9), rtol=0, atol=1e-10
        )

    def test_abs_coefficients(self):
        service = HermiteService()
        fn = get_function("abs")
        coeffs = service.expansion_coeffs(fn, 4, kinks=fn.kinks).coeffs
        c0 = math.sqrt(2.0 / math.pi)
        np.testing.assert_allclose(coeffs[:3], [c0, 0.0, c0 / 2.0], rtol=0, atol=1e-8)

    def test_convexity_battery_and_h3(self):
        service = HermiteService()
        grid = np.linspace(-6.0, 6.0, 241)
        for name in CONVEXITY_BATTERY:
            fn = get_function(name)
            audit = service.convexity_rank_audit(fn, grid, kinks=fn.kinks)
            assert not audit.violation, name
            assert audit.rank.rank is not None and audit.rank.rank <= 2
        h3 = service.expansion_coeffs(get_function("h3"), 6)
        assert service.hermite_rank(h3).rank == 3


class TestReproducibility:
    def test_workers_do_not_change_outputs(self, tmp_path, capsys):
        outputs = []
        for workers in ("1", "8"):
            target = tmp_path / workers
            argv = ["exponent", "--Tgrid", "64..4096", "--replicas", "20000"]
            assert run([*argv, "--workers", workers, "--output", str(target)]) == 0
            outputs.append(
                [(target / name).read_bytes() for name in ("persistence.csv", "exponent.json")]
            )
        capsys.readouterr()
        assert outputs[0] == outputs[1]
