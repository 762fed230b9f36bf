"""Interpretability-adjusted risk exposure curves.

A model's risk exposure shrinks as its transparency theta grows, because a
human reviewer can catch erroneous decision rules before deployment.  The
curve interpolates between the machine-only exposure c_ml at theta = 0 and
c_ml * (1 - c_ml / c_h) at theta = 1, where c_h is the human-only exposure
known from historical claims.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["InterpretabilityCurve", "CURVE_SHAPES", "xi", "risk_at", "adjust_pricing"]

CURVE_SHAPES = ("linear", "tan", "sin", "square", "sqrt")

_SHAPE_FN = {
    "linear": lambda t: t,
    "tan": lambda t: math.tan(math.pi * t / 4.0),
    "sin": lambda t: math.sin(math.pi * t / 2.0),
    "square": lambda t: t * t,
    "sqrt": math.sqrt,
}


@dataclass(frozen=True)
class InterpretabilityCurve:
    shape: str
    c_ml: float  # machine-only risk exposure
    c_h: float  # human-only risk exposure, must exceed c_ml

    def __post_init__(self):
        if self.shape not in CURVE_SHAPES:
            raise ValueError(f"shape must be one of {CURVE_SHAPES}")
        if not 0.0 < self.c_ml < self.c_h:
            raise ValueError("need 0 < c_ml < c_h for the synergy factor to exist")


def xi(curve: InterpretabilityCurve) -> float:
    """Synergy factor 1 - c_ml / c_h in (0, 1)."""
    return 1.0 - curve.c_ml / curve.c_h


def risk_at(curve: InterpretabilityCurve, theta: float) -> float:
    """Risk exposure c(theta) = -(c_ml^2 / c_h) g(theta) + c_ml.

    g runs through theta, tan(pi theta / 4), sin(pi theta / 2), theta^2 or
    sqrt(theta) depending on the curve shape; all shapes agree at both ends.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    g = _SHAPE_FN[curve.shape](theta)
    return -(curve.c_ml * curve.c_ml / curve.c_h) * g + curve.c_ml


def adjust_pricing(cvar: float, c_h: float, theta: float, shape: str = "linear") -> float:
    """Interpretability-adjusted CVaR: the computed CVaR plays the c_ml role."""
    if cvar <= 0:
        raise ValueError("CVaR must be positive to act as the machine-only exposure")
    return risk_at(InterpretabilityCurve(shape=shape, c_ml=cvar, c_h=c_h), theta)
