"""Shared Monte Carlo estimators for indicator events."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray


def proportion_stderr(p_hat: float, replicas: int) -> float:
    """sqrt(p(1-p)/R), or 0 when R = 0."""
    if replicas <= 0:
        return 0.0
    return math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / replicas)


@dataclass(frozen=True)
class ProductMargin:
    """
    Joint probability minus the product of marginals on shared replicas.

    Attributes:
        joint: (p_hat, stderr) of the joint event.
        marginals: (p_hat, stderr) per marginal event.
        product: Product of marginal p_hat.
        product_stderr: Delta-method stderr of the product.
        margin: joint - product.
        margin_stderr: Delta-method stderr of the margin, using the sample
            covariance of all indicators.
        z_score: margin / margin_stderr (0 when both vanish, +-inf when only
            the stderr does).
    """

    joint: tuple[float, float]
    marginals: list[tuple[float, float]]
    product: float
    product_stderr: float
    margin: float
    margin_stderr: float
    z_score: float

    def to_dict(self) -> dict[str, object]:
        return {
            "joint": {"p_hat": self.joint[0], "stderr": self.joint[1]},
            "marginals": [{"p_hat": p, "stderr": s} for p, s in self.marginals],
            "product": self.product,
            "product_stderr": self.product_stderr,
            "margin": self.margin,
            "margin_stderr": self.margin_stderr,
            "z_score": self.z_score,
        }


def product_margin(
    joint: NDArray[np.bool_],
    marginals: list[NDArray[np.bool_]],
) -> ProductMargin:
    """
    Compare P(joint) with prod_i P(marginal_i) estimated on the same replicas.

    The gradient of joint - prod p_i is (1, -prod_{j != i} p_j); the margin
    variance is g' Sigma g / R with Sigma the indicator sample covariance.
    """
    replicas = int(joint.size)
    indicators = np.vstack([joint, *marginals]).astype(np.float64)
    means = indicators.mean(axis=1) if replicas else np.zeros(indicators.shape[0])
    p_joint = float(means[0])
    p_marg = means[1:]
    product = float(np.prod(p_marg))

    d = p_marg.size
    others = np.array([np.prod(np.delete(p_marg, i)) for i in range(d)])
    if replicas > 1:
        sigma = np.atleast_2d(np.cov(indicators, ddof=1))
        grad = np.concatenate([[1.0], -others])
        margin_var = float(grad @ sigma @ grad) / replicas
        product_var = float(others @ sigma[1:, 1:] @ others) / replicas
    else:
        margin_var = product_var = 0.0

    margin = p_joint - product
    margin_se = math.sqrt(max(margin_var, 0.0))
    if margin_se > 0.0:
        z = margin / margin_se
    elif margin == 0.0:
        z = 0.0
    else:
        z = math.copysign(math.inf, margin)
    return ProductMargin(
        joint=(p_joint, proportion_stderr(p_joint, replicas)),
        marginals=[(float(p), proportion_stderr(float(p), replicas)) for p in p_marg],
        product=product,
        product_stderr=math.sqrt(max(product_var, 0.0)),
        margin=margin,
        margin_stderr=margin_se,
        z_score=z,
    )
