"""Tests for decorrelation and Gaussian correlation checks."""

from __future__ import annotations

import math

import numpy as np
import pytest

from hermite_persist.core.errors import NumericalError, ValidationError
from hermite_persist.experiments.decorrelation.gci import correlation_matrix, parse_set
from hermite_persist.experiments.decorrelation.service import (
    BatteryConfig,
    DecorrelationService,
    PartitionSpec,
    SetSpec,
    block_statistics,
    default_battery,
)
from hermite_persist.experiments.gaussian.service import GaussianService
from hermite_persist.experiments.process.service import HermitePathConfig, alpha_for


@pytest.fixture
def service(settings):
    return DecorrelationService(settings)


class TestPartitionSpec:
    """Tests for block partitions."""

    def test_from_unit(self):
        spec = PartitionSpec.from_unit([0.0, 0.5, 1.0], [1, 2], 64)
        assert spec.times == (0, 32, 64)
        assert spec.levels == (1.0, 2.0)
        assert spec.blocks == 2

    @pytest.mark.parametrize(
        ("times", "levels"),
        [((0,), ()), ((0, 4, 8), (1.0,)), ((0, 4, 4), (1.0, 1.0)), ((-1, 4), (1.0,))],
    )
    def test_invalid(self, times, levels):
        with pytest.raises(ValidationError):
            PartitionSpec(times, levels)

    def test_unit_range(self):
        with pytest.raises(ValidationError):
            PartitionSpec.from_unit([0.0, 1.5], [1.0], 64)

    def test_check_within(self):
        with pytest.raises(ValidationError):
            PartitionSpec((0, 65), (1.0,)).check_within(64)

    def test_block_statistics(self):
        paths = np.array([[0.0, 1.0, -1.0, 2.0, 0.5]])
        spec = PartitionSpec((0, 2, 4), (0.0, 0.0))
        closed = block_statistics(paths, spec, "closed")
        opened = block_statistics(paths, spec, "open")
        np.testing.assert_array_equal(closed, [[1.0, 3.0]])
        np.testing.assert_array_equal(opened, [[1.0, 3.0]])
        shifted = PartitionSpec((1, 3), (0.0,))
        np.testing.assert_array_equal(block_statistics(paths, shifted, "closed"), [[0.0]])
        np.testing.assert_array_equal(block_statistics(paths, shifted, "open"), [[1.0]])


class TestCheckDecorrelation:
    """Tests for joint versus product on simulated paths."""

    def test_single_block_margin_is_zero(self, service):
        config = HermitePathConfig(2, 0.7, 64)
        report = service.check_decorrelation(
            config, PartitionSpec.from_unit([0.0, 1.0], [0.5], 64), 500, seed=1
        )
        assert report.margin == 0.0
        assert report.z_score == 0.0
        assert not report.exploratory

    def test_independent_blocks(self, service):
        config = HermitePathConfig(1, 0.7, 64, driver="white_noise")
        partition = PartitionSpec.from_unit([0.0, 0.5, 1.0], [0.5, 0.5], 64)
        report = service.check_decorrelation(config, partition, 20_000, seed=2)
        assert abs(report.margin) < 4.0 * report.estimate.margin_stderr
        assert report.exploratory

    def test_rosenblatt_blocks(self, service):
        config = HermitePathConfig(2, 0.7, 64)
        partition = PartitionSpec.from_unit([0.0, 0.5, 1.0], [0.5, 0.5], 64)
        report = service.check_decorrelation(config, partition, 5_000, seed=3)
        assert report.z_score > -4.0
        assert report.product <= min(p for p, _ in report.marginals)
        assert report.to_dict()["partition"] == {"times": [0, 32, 64], "levels": [0.5, 0.5]}

    def test_partition_beyond_grid(self, service):
        with pytest.raises(ValidationError):
            service.check_decorrelation(
                HermitePathConfig(2, 0.7, 16), PartitionSpec((0, 8, 32), (1.0, 1.0)), 10
            )

    def test_replicas(self, service):
        with pytest.raises(ValidationError):
            service.check_decorrelation(
                HermitePathConfig(2, 0.7, 16), PartitionSpec((0, 16), (1.0,)), 0
            )


class TestDiscreteInequality:
    """Tests on raw partial sums of a shared Gaussian sample."""

    @pytest.fixture
    def sample(self, settings):
        gaussian = GaussianService(settings)
        return gaussian.sample(gaussian.make_covariance(alpha_for(2, 0.7), 33), 400, seed=4)

    def test_infinite_levels(self, service, sample):
        report = service.check_discrete_inequality([0, 16, 32], [math.inf, math.inf], sample)
        assert report.joint[0] == 1.0
        assert report.product == 1.0
        assert report.margin == 0.0

    def test_single_block_margin_is_zero(self, service, sample):
        report = service.check_discrete_inequality([0, 32], [2.0], sample)
        assert report.margin == 0.0
        assert report.z_score == 0.0
        assert report.product == report.joint[0]

    def test_equal_blocks_hold(self, service, settings):
        gaussian = GaussianService(settings)
        sample = gaussian.sample(gaussian.make_covariance(0.3, 65), 20_000, seed=6)
        report = service.check_discrete_inequality([0, 16, 32, 48, 64], [2.0] * 4, sample)
        assert len(report.marginals) == 4
        assert 0.0 < report.product < 1.0
        assert report.z_score >= -3.0

    def test_exploratory_order(self, service, sample):
        report = service.check_discrete_inequality([0, 16, 32], [1.0, 1.0], sample, m=3)
        assert report.exploratory
        assert report.config["m"] == 3

    def test_partition_beyond_sample(self, service, sample):
        with pytest.raises(ValidationError):
            service.check_discrete_inequality([0, 16, 33], [1.0, 1.0], sample)


class TestGci:
    """Tests for the Gaussian correlation harness."""

    def test_independent_coordinates(self, service):
        report = service.gci_sanity(
            np.eye(2), (SetSpec.box(1.0, math.inf), SetSpec.box(math.inf, 1.0)), 20_000, seed=5
        )
        assert report.oracle_margin == pytest.approx(0.0, abs=1e-6)
        assert abs(report.estimate.z_score) < 4.0

    def test_correlated_boxes(self, service):
        cov = correlation_matrix(2, 0.8, "ar")
        report = service.gci_sanity(
            cov, (parse_set("box:1,inf"), parse_set("box:inf,1")), 50_000, seed=6
        )
        assert report.oracle_margin is not None
        assert report.oracle_margin > 0.05
        assert report.estimate.margin > 0.0
        assert report.oracle_z is not None
        assert abs(report.oracle_z) < 4.0

    def test_ball_has_no_oracle(self, service):
        report = service.gci_sanity(
            np.eye(3), (SetSpec.ball(1.0, [0, 1]), SetSpec.ball(1.0, [2])), 2_000, seed=7
        )
        assert report.oracle_margin is None
        assert report.oracle_z is None

    def test_not_positive_definite(self, service):
        with pytest.raises(NumericalError) as info:
            service.gci_sanity(
                [[1.0, 2.0], [2.0, 1.0]], (SetSpec.box(1.0, 1.0), SetSpec.box(1.0, 1.0)), 100
            )
        assert info.value.pivot == pytest.approx(-1.0)

    def test_dimension_limit(self, service):
        sets = (SetSpec.box(*[1.0] * 5), SetSpec.box(*[1.0] * 5))
        with pytest.raises(ValidationError):
            service.gci_sanity(np.eye(5), sets, 100)

    def test_set_dimension_mismatch(self, service):
        with pytest.raises(ValidationError):
            service.gci_sanity(np.eye(2), (SetSpec.box(1.0), SetSpec.box(1.0, 1.0)), 100)

    def test_too_few_replicas(self, service):
        with pytest.raises(ValidationError):
            service.gci_sanity(np.eye(2), (SetSpec.box(1.0, 1.0), SetSpec.box(1.0, 1.0)), 1)


class TestSetParsing:
    def test_box(self):
        spec = parse_set("box:1,inf")
        assert spec.kind == "box"
        assert spec.half_widths == (1.0, math.inf)

    def test_ball(self):
        spec = parse_set("ball:1.5@0,2")
        assert spec.radius == 1.5
        assert spec.coords == (0, 2)

    def test_unknown(self):
        with pytest.raises(ValueError):
            parse_set("cube:1")

    def test_nonpositive_width(self):
        with pytest.raises(ValidationError):
            parse_set("box:0,1")

    def test_correlation_matrices(self):
        np.testing.assert_allclose(
            correlation_matrix(3, 0.5, "ar"),
            [[1.0, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 1.0]],
        )
        np.testing.assert_allclose(
            correlation_matrix(3, 0.2, "equicorrelated"),
            [[1.0, 0.2, 0.2], [0.2, 1.0, 0.2], [0.2, 0.2, 1.0]],
        )


class TestBattery:
    """Tests for the decorrelation battery."""

    def test_default_battery(self):
        battery = default_battery()
        assert len(battery) == 20
        assert {c.H for c in battery} == {0.6, 0.7, 0.8}
        assert {c.blocks for c in battery} == {2, 3, 4}
        assert all(c.times[0] == 0.0 and c.times[-1] == 1.0 for c in battery)

    def test_small_run(self, service):
        configs = [BatteryConfig(0.7, (0.0, 0.5, 1.0), (0.5, 0.5))]
        result = service.run_battery(300, seed=8, n=32, configs=configs)
        assert len(result.reports) == 1
        assert len(result.single_block) == 1
        assert result.single_block_exact
        assert result.to_dict()["violations"] == result.violations
