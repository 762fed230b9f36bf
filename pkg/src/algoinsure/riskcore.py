"""Scenario-based loss, VaR, and CVaR primitives.

Everything here works on a discrete loss sample (one loss per scenario) and
is shared by the nominal and robust pricing formulations.  The sort-based
``empirical_cvar_var`` is the optimization-free reference used to cross-check
the LP solutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Confidence",
    "RiskReport",
    "piecewise_loss",
    "ru_objective",
    "empirical_cvar_var",
]

#: absolute tolerance for currency comparisons (amounts are ~1e6)
CURRENCY_ATOL = 1e-6


@dataclass(frozen=True)
class Confidence:
    """Confidence level beta in (0, 1) for VaR/CVaR."""

    beta: float

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")

    def nu(self, n_scenarios: int) -> float:
        """Scaling constant 1 / ((1 - beta) * J) of the tail average."""
        if n_scenarios < 1:
            raise ValueError("need at least one scenario")
        return 1.0 / ((1.0 - self.beta) * n_scenarios)


@dataclass(frozen=True)
class RiskReport:
    """VaR / CVaR pair for one loss sample.  CVaR >= VaR always holds."""

    var: float
    cvar: float


def _as_loss_vector(losses) -> np.ndarray:
    arr = np.asarray(losses, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("losses must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("losses must be finite")
    return arr


def piecewise_loss(prices, scenario) -> float:
    """Insurer's retained loss sum_p max(0, y_p - x_p) for one scenario.

    Each premium caps the per-segment payout: the insurer keeps only the part
    of the claim cost that exceeds the collected premium.
    """
    x = np.asarray(prices, dtype=float)
    y = np.asarray(scenario, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"price/scenario shape mismatch: {x.shape} vs {y.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("prices and scenario entries must be finite")
    return float(np.sum(np.maximum(0.0, y - x)))


def ru_objective(alpha: float, losses, beta: Confidence) -> float:
    """Rockafellar-Uryasev auxiliary objective alpha + nu * sum (loss - alpha)+.

    Minimizing over alpha yields CVaR; the minimizer is VaR.
    """
    arr = _as_loss_vector(losses)
    nu = beta.nu(arr.size)
    return float(alpha + nu * np.sum(np.maximum(arr - alpha, 0.0)))


def empirical_cvar_var(losses, beta: Confidence) -> RiskReport:
    """Sort-based VaR and CVaR of a discrete loss sample.

    VaR is the ceil(beta * J)-th order statistic, the smallest minimizer of
    :func:`ru_objective`; CVaR is the objective evaluated there.
    """
    arr = np.sort(_as_loss_vector(losses))
    j = arr.size
    k = int(np.ceil(beta.beta * j))
    k = min(max(k, 1), j)
    var = float(arr[k - 1])
    cvar = ru_objective(var, arr, beta)
    return RiskReport(var=var, cvar=cvar)
