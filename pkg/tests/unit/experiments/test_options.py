"""Tests for shared option parsing."""

from __future__ import annotations

import math

import pydantic
import pytest

from hermite_persist.experiments.options import (
    HorizonOptions,
    ProcessOptions,
    SeedOptions,
    parse_horizon_grid,
    parse_number_list,
)


class TestParsers:
    def test_doubling_grid(self):
        assert parse_horizon_grid("64..4096") == [64, 128, 256, 512, 1024, 2048, 4096]

    def test_ratio_grid(self):
        assert parse_horizon_grid("64..4096:4") == [64, 256, 1024, 4096]

    def test_explicit_grid(self):
        assert parse_horizon_grid("64, 128,256") == [64, 128, 256]
        assert parse_horizon_grid([8, 16]) == [8, 16]

    @pytest.mark.parametrize("text", ["64..32", "0..8", "8..64:1"])
    def test_invalid_grid(self, text):
        with pytest.raises(ValueError):
            parse_horizon_grid(text)

    def test_number_list(self):
        assert parse_number_list("-1, 0;inf") == [-1.0, 0.0, math.inf]
        assert parse_number_list([1.0]) == [1.0]


class TestOptionModels:
    def test_horizon_alias(self):
        assert HorizonOptions(Tgrid="8..32").horizons == [8, 16, 32]
        assert HorizonOptions(horizons=[32, 8, 8]).horizons == [8, 32]

    def test_defaults(self):
        options = HorizonOptions()
        assert options.horizons[0] == 64
        assert options.horizons[-1] == 4096
        assert options.oversample == 1
        assert options.m == 2

    @pytest.mark.parametrize("H", [0.5, 1.0, "nan"])
    def test_hurst_range(self, H):
        with pytest.raises(pydantic.ValidationError):
            ProcessOptions(H=H)

    def test_seed_range(self):
        assert SeedOptions(seed=2**64 - 1).seed == 2**64 - 1
        with pytest.raises(pydantic.ValidationError):
            SeedOptions(seed=2**64)
        with pytest.raises(pydantic.ValidationError):
            SeedOptions(seed=-1)

    def test_horizons_positive(self):
        with pytest.raises(pydantic.ValidationError):
            HorizonOptions(horizons=[0, 8])
