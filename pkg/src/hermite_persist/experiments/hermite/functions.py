"""Built-in test functions for Hermite expansions.

Functions are looked up by name; there is no expression parser. The
``polynomial`` entry takes monomial coefficients a_0, a_1, ... in order.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from numpy.typing import NDArray

from hermite_persist.core.errors import ValidationError
from hermite_persist.experiments.hermite.service import RealFunction, hermite_eval

_MEAN_ABS = math.sqrt(2.0 / math.pi)
_MEAN_EXP = math.exp(0.5)


@dataclass(frozen=True)
class BuiltinFunction:
    """
    Named real function of one variable.

    Attributes:
        name: Registry key.
        func: Vectorized callable.
        kinks: Points of non-differentiability (enables piecewise integration).
        convex: Known convexity on the whole line.
        description: One-line help text.
    """

    name: str
    func: RealFunction = field(repr=False)
    kinks: tuple[float, ...] = ()
    convex: bool = False
    description: str = ""

    def __call__(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.func(x)


def _hermite(m: int, x: NDArray[np.float64]) -> NDArray[np.float64]:
    return hermite_eval(m, x)


def _builtins() -> dict[str, BuiltinFunction]:
    table = [
        BuiltinFunction("abs", np.abs, kinks=(0.0,), convex=True, description="|x|"),
        BuiltinFunction(
            "abs-centered",
            lambda x: np.abs(x) - _MEAN_ABS,
            kinks=(0.0,),
            convex=True,
            description="|x| - sqrt(2/pi)",
        ),
        BuiltinFunction(
            "relu", lambda x: np.maximum(x, 0.0), kinks=(0.0,), convex=True, description="max(x, 0)"
        ),
        BuiltinFunction("square", np.square, convex=True, description="x^2"),
        BuiltinFunction(
            "square-centered", lambda x: np.square(x) - 1.0, convex=True, description="x^2 - 1"
        ),
        BuiltinFunction(
            "exp-centered",
            lambda x: np.exp(x) - _MEAN_EXP,
            convex=True,
            description="exp(x) - e^(1/2)",
        ),
        BuiltinFunction(
            "quartic-centered", lambda x: x**4 - 3.0, convex=True, description="x^4 - 3"
        ),
    ]
    table += [
        BuiltinFunction(f"h{m}", partial(_hermite, m), convex=m == 2, description=f"h_{m}(x)")
        for m in range(1, 7)
    ]
    return {f.name: f for f in table}


BUILTIN_FUNCTIONS: dict[str, BuiltinFunction] = _builtins()

CONVEXITY_BATTERY: tuple[str, ...] = (
    "abs",
    "relu",
    "square",
    "exp-centered",
    "quartic-centered",
)


def polynomial(coefficients: Sequence[float]) -> BuiltinFunction:
    """x -> a_0 + a_1 x + ... + a_d x^d."""
    if not coefficients:
        raise ValidationError("polynomial needs at least one coefficient", field="coefficients")
    poly = np.polynomial.Polynomial(np.asarray(coefficients, dtype=np.float64)).trim()
    degree = poly.degree()
    second = poly.deriv(2) if degree >= 2 else np.polynomial.Polynomial([0.0])
    # convex iff the second derivative is nonnegative at its minima
    if second.degree() == 0:
        convex = bool(second.coef[0] >= 0.0)
    elif second.degree() % 2 == 1 or second.coef[-1] < 0.0:
        convex = False
    else:
        crit = second.deriv().roots()
        crit = crit.real[np.abs(crit.imag) < 1e-12]
        convex = bool(np.all(second(crit) >= -1e-12))

    def evaluate(x: NDArray[np.float64]) -> NDArray[np.float64]:
        out: NDArray[np.float64] = poly(x)
        return out

    return BuiltinFunction(
        "polynomial", evaluate, convex=convex, description=f"polynomial of degree {degree}"
    )


def get_function(name: str, coefficients: Sequence[float] | None = None) -> BuiltinFunction:
    """
    Look up a built-in function.

    Raises:
        ValidationError: Unknown name, or ``polynomial`` without coefficients.
    """
    if name == "polynomial":
        return polynomial(coefficients or [])
    try:
        return BUILTIN_FUNCTIONS[name]
    except KeyError:
        names = ", ".join([*sorted(BUILTIN_FUNCTIONS), "polynomial"])
        raise ValidationError(
            f"Unknown function '{name}'. Available: {names}", field="function"
        ) from None


def list_functions() -> list[str]:
    return [*BUILTIN_FUNCTIONS, "polynomial"]
