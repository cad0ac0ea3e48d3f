"""Option fields shared by several experiment commands."""

from __future__ import annotations

import math
from typing import Annotated, Any, Literal

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, field_validator


def parse_number_list(value: Any) -> Any:
    """
    Accept ``"1,2,3"`` strings (``inf``/``-inf`` allowed) as lists.

    Non-string input is returned unchanged for pydantic to validate.
    """
    if isinstance(value, str):
        items = [v.strip() for v in value.replace(";", ",").split(",") if v.strip()]
        return [float(v) for v in items]
    return value


def parse_horizon_grid(value: Any) -> Any:
    """
    Accept ``"64..4096"`` (doubling grid), ``"64..4096:4"`` (ratio 4) or
    ``"64,128,256"``.
    """
    if isinstance(value, str) and ".." in value:
        span, _, ratio_text = value.partition(":")
        low_text, high_text = span.split("..", 1)
        low, high = int(low_text), int(high_text)
        ratio = int(ratio_text) if ratio_text else 2
        if low < 1 or high < low or ratio < 2:
            raise ValueError(f"invalid horizon grid '{value}'")
        grid = []
        t = low
        while t <= high:
            grid.append(t)
            t *= ratio
        return grid
    if isinstance(value, str):
        return [int(float(v)) for v in value.split(",") if v.strip()]
    return value


class SeedOptions(BaseModel):
    """Replica count and seed."""

    model_config = ConfigDict(populate_by_name=True)

    replicas: int = Field(default=10_000, ge=1, le=100_000_000, description="Monte Carlo replicas.")
    seed: int | None = Field(
        default=None,
        ge=0,
        lt=2**64,
        description="64-bit seed; defaults to HERMITE_PERSIST_SEED or 42.",
    )


class ProcessOptions(SeedOptions):
    """Hermite process fields shared by path and horizon commands."""

    m: int = Field(default=2, ge=1, le=12, description="Hermite order (2 = Rosenblatt).")
    H: float = Field(default=0.7, gt=0.5, lt=1.0, description="Self-similarity index in (1/2, 1).")
    normalization: Literal["paper_sigma", "empirical_unit_variance", "raw"] = Field(
        default="empirical_unit_variance",
        description="Path scaling constant (paper_sigma only for m = 2).",
    )
    driver: Literal["long_memory", "white_noise"] = Field(
        default="long_memory",
        description="Driving sequence; white_noise gives an independent-increment control.",
    )

    @field_validator("H")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("H must be finite")
        return v


class PathOptions(ProcessOptions):
    """Process fields plus the number of grid points."""

    n: int = Field(default=1024, ge=1, le=2**22, description="Grid points per path.")


class HorizonOptions(ProcessOptions):
    """Process fields plus a horizon grid in unit time."""

    replicas: int = Field(default=20_000, ge=1, le=100_000_000, description="Replicas.")
    horizons: Annotated[list[int], BeforeValidator(parse_horizon_grid)] = Field(
        default=[64, 128, 256, 512, 1024, 2048, 4096],
        alias="Tgrid",
        description="Horizons T, e.g. 64..4096 (doubling), 64..4096:4 or 64,256,1024.",
    )
    oversample: int = Field(
        default=1, ge=1, le=64, description="Grid points per unit time (sup approximation)."
    )

    @field_validator("horizons")
    @classmethod
    def _positive(cls, v: list[int]) -> list[int]:
        if not v or min(v) < 1:
            raise ValueError("horizons must be positive")
        return sorted(set(v))
