"""Tests for the shared indicator estimators."""

from __future__ import annotations

import math

import numpy as np
import pytest

from hermite_persist.core.rng import Stream, replica_generator
from hermite_persist.experiments.stats import product_margin, proportion_stderr


class TestProportionStderr:
    def test_values(self):
        assert proportion_stderr(0.5, 100) == pytest.approx(0.05)
        assert proportion_stderr(0.0, 100) == 0.0
        assert proportion_stderr(0.3, 0) == 0.0


class TestProductMargin:
    """Tests for joint-versus-product estimates."""

    def test_single_marginal_is_exact(self):
        events = np.array([True, False, True, True, False])
        result = product_margin(events, [events])
        assert result.margin == 0.0
        assert result.z_score == 0.0
        assert result.joint == result.marginals[0]

    def test_balanced_design(self):
        a = np.array([True, True, False, False])
        b = np.array([True, False, True, False])
        result = product_margin(a & b, [a, b])
        assert result.joint[0] == 0.25
        assert result.product == 0.25
        assert result.margin == 0.0

    def test_product_below_marginals(self):
        rng = replica_generator(3, 0, Stream.GAUSSIAN)
        x = rng.standard_normal((3, 500))
        events = list(x < 0.3)
        joint = np.all(np.vstack(events), axis=0)
        result = product_margin(joint, events)
        assert result.product <= min(p for p, _ in result.marginals)
        assert result.product == pytest.approx(math.prod(p for p, _ in result.marginals))

    def test_independent_events(self):
        rng = replica_generator(4, 0, Stream.GAUSSIAN)
        x = rng.standard_normal((2, 20_000))
        a, b = x[0] < 0.0, x[1] < 0.5
        result = product_margin(a & b, [a, b])
        assert abs(result.z_score) < 4.0
        assert result.margin_stderr > 0.0

    def test_positively_dependent_events(self):
        rng = replica_generator(5, 0, Stream.GAUSSIAN)
        x = rng.standard_normal(20_000)
        a, b = x < 0.5, x < 1.0
        result = product_margin(a & b, [a, b])
        assert result.margin > 0.0
        assert result.z_score > 10.0

    def test_zero_variance_signs(self):
        result = product_margin(np.array([True]), [np.array([True]), np.array([False])])
        assert result.margin == 1.0
        assert result.margin_stderr == 0.0
        assert result.z_score == math.inf

    def test_to_dict(self):
        a = np.array([True, False])
        data = product_margin(a, [a]).to_dict()
        assert data["joint"] == pytest.approx({"p_hat": 0.5, "stderr": 0.5 / math.sqrt(2)})
        assert len(data["marginals"]) == 1
