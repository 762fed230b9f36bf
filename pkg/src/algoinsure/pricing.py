"""Nominal and robust CVaR premium-pricing programs.

Builds the scenario LP (variables alpha, z_j, w_pj, x_p), solves it, and
extracts premiums, VaR, and CVaR.  Robust variants protect against scenario
perturbations inside box or polyhedral budget-of-uncertainty sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lpsolve import LinearProgram, LPSolution, solve
from .riskcore import Confidence, empirical_cvar_var, piecewise_loss

__all__ = [
    "ScenarioMatrix",
    "PricingProblem",
    "RobustConfig",
    "PricingSolution",
    "PricingError",
    "build_nominal",
    "build_box",
    "build_polyhedral",
    "price",
    "budget_deviations",
]

FORMULATIONS = ("nominal", "box", "polyhedral")


class PricingError(RuntimeError):
    """LP failure or internal consistency failure during pricing."""


@dataclass(frozen=True)
class ScenarioMatrix:
    """J x P matrix of simulated total claim costs (currency units)."""

    y: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 2 or y.shape[0] < 1 or y.shape[1] < 1:
            raise ValueError("scenario matrix must be 2-D with J >= 1, P >= 1")
        if not np.all(np.isfinite(y)):
            raise ValueError("scenario costs must be finite")
        if np.any(y < 0):
            raise ValueError("claim costs cannot be negative")
        object.__setattr__(self, "y", y)

    @property
    def n_scenarios(self) -> int:
        return self.y.shape[0]

    @property
    def n_segments(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class PricingProblem:
    scenarios: ScenarioMatrix
    beta: Confidence
    lower_bounds: np.ndarray  # l_p per segment
    upper_bounds: np.ndarray  # H_p per segment

    def __post_init__(self):
        if not isinstance(self.beta, Confidence):
            object.__setattr__(self, "beta", Confidence(float(self.beta)))
        lo = np.broadcast_to(
            np.asarray(self.lower_bounds, dtype=float), (self.scenarios.n_segments,)
        ).copy()
        hi = np.broadcast_to(
            np.asarray(self.upper_bounds, dtype=float), (self.scenarios.n_segments,)
        ).copy()
        if np.any(lo > hi):
            raise ValueError("premium lower bound exceeds upper bound")
        object.__setattr__(self, "lower_bounds", lo)
        object.__setattr__(self, "upper_bounds", hi)


@dataclass(frozen=True)
class RobustConfig:
    """Uncertainty description: kind, budget Gamma and deviation matrix delta_pj."""

    kind: str = "nominal"
    gamma: float = 0.0
    deviations: Optional[np.ndarray] = None  # J x P, same layout as the scenarios

    def __post_init__(self):
        if self.kind not in FORMULATIONS:
            raise ValueError(f"kind must be one of {FORMULATIONS}")
        if self.gamma < 0 or not np.isfinite(self.gamma):
            raise ValueError("gamma must be finite and non-negative")
        if self.deviations is not None:
            d = np.asarray(self.deviations, dtype=float)
            if np.any(d < 0) or not np.all(np.isfinite(d)):
                raise ValueError("deviations must be finite and non-negative")
            object.__setattr__(self, "deviations", d)


@dataclass(frozen=True)
class PricingSolution:
    prices: np.ndarray  # x_p
    var: float  # alpha at the optimum
    cvar: float  # LP objective
    kind: str
    auxiliary: dict  # z_j, w_pj (and q, s, r for polyhedral), for audit


def budget_deviations(scenarios: ScenarioMatrix, eta: float, gamma: float) -> np.ndarray:
    """Deviation matrix for the eta-relative uncertainty convention.

    The deviations are constant per segment and sized so that the fully spent
    budget shifts each scenario by a fraction eta of the segment's average
    cost: delta_p = eta * mean_j(y_pj) / Gamma.  A constant-per-segment delta
    also makes the printed polyhedral counterpart (whose single dual scalar is
    driven by the largest deviation) coincide with the box one instead of
    exceeding it.
    """
    if eta < 0:
        raise ValueError("eta must be non-negative")
    if gamma <= 0:
        return np.zeros_like(scenarios.y)
    per_segment = eta * scenarios.y.mean(axis=0) / gamma
    return np.broadcast_to(per_segment, scenarios.y.shape).copy()


def _base_program(problem: PricingProblem, rhs_matrix: np.ndarray):
    """Shared nominal/box structure; rhs_matrix supplies the w-link right side.

    Variable order: alpha, z_1..J, w_11..w_PJ (p-major), x_1..P.
    """
    y = problem.scenarios.y
    j_count, p_count = y.shape
    nu = problem.beta.nu(j_count)
    n = 1 + j_count + p_count * j_count + p_count

    def w_index(p, j):
        return 1 + j_count + p * j_count + j

    x_index = 1 + j_count + p_count * j_count

    objective = np.zeros(n)
    objective[0] = 1.0
    objective[1 : 1 + j_count] = nu

    rows, senses, rhs = [], [], []
    # z_j >= sum_p w_pj - alpha
    for j in range(j_count):
        row = np.zeros(n)
        row[0] = 1.0
        row[1 + j] = 1.0
        for p in range(p_count):
            row[w_index(p, j)] = -1.0
        rows.append(row)
        senses.append(">=")
        rhs.append(0.0)
    # w_pj + x_p >= rhs_pj
    for p in range(p_count):
        for j in range(j_count):
            row = np.zeros(n)
            row[w_index(p, j)] = 1.0
            row[x_index + p] = 1.0
            rows.append(row)
            senses.append(">=")
            rhs.append(rhs_matrix[j, p])

    bounds = [(None, None)]  # alpha free
    bounds += [(0.0, None)] * j_count  # z_j >= 0
    bounds += [(0.0, None)] * (p_count * j_count)  # w_pj >= 0
    bounds += [
        (float(problem.lower_bounds[p]), float(problem.upper_bounds[p]))
        for p in range(p_count)
    ]
    return LinearProgram(objective, np.array(rows), senses, np.array(rhs), bounds)


def build_nominal(problem: PricingProblem) -> LinearProgram:
    """Linearized scenario CVaR program over the sampled costs."""
    return _base_program(problem, problem.scenarios.y)


def build_box(problem: PricingProblem, cfg: RobustConfig) -> LinearProgram:
    """Box uncertainty: every scenario sits at its worst case y + delta * Gamma."""
    if cfg.kind != "box":
        raise ValueError("config kind must be 'box'")
    delta = _deviations(problem, cfg)
    return _base_program(problem, problem.scenarios.y + delta * cfg.gamma)


def build_polyhedral(problem: PricingProblem, cfg: RobustConfig) -> LinearProgram:
    """Polyhedral uncertainty via the dual of the budget-constrained adversary.

    Adds q_pj, s_pj >= 0 with q - s = 1, a shared scalar r >= 0 with
    r >= delta_pj (q_pj + s_pj), and w-link right side mu q - mu s + Gamma r.
    """
    if cfg.kind != "polyhedral":
        raise ValueError("config kind must be 'polyhedral'")
    delta = _deviations(problem, cfg)
    y = problem.scenarios.y
    j_count, p_count = y.shape
    base = _base_program(problem, y)  # reuse indices; w-link rows replaced below
    n_base = base.n_vars
    pj = p_count * j_count
    n = n_base + 2 * pj + 1  # q_pj, s_pj, r appended

    def w_index(p, j):
        return 1 + j_count + p * j_count + j

    def q_index(p, j):
        return n_base + p * j_count + j

    def s_index(p, j):
        return n_base + pj + p * j_count + j

    r_index = n - 1

    objective = np.zeros(n)
    objective[:n_base] = base.objective

    rows, senses, rhs = [], [], []
    for row, sense, b in zip(base.constraints[:j_count], base.senses, base.rhs):
        ext = np.zeros(n)
        ext[:n_base] = row
        rows.append(ext)
        senses.append(sense)
        rhs.append(b)
    for p in range(p_count):
        for j in range(j_count):
            mu = y[j, p]
            # w_pj + x_p - mu q_pj + mu s_pj - Gamma r >= 0
            row = np.zeros(n)
            row[w_index(p, j)] = 1.0
            row[n_base - p_count + p] = 1.0  # x_p
            row[q_index(p, j)] = -mu
            row[s_index(p, j)] = mu
            row[r_index] = -cfg.gamma
            rows.append(row)
            senses.append(">=")
            rhs.append(0.0)
            # q_pj - s_pj = 1
            row = np.zeros(n)
            row[q_index(p, j)] = 1.0
            row[s_index(p, j)] = -1.0
            rows.append(row)
            senses.append("=")
            rhs.append(1.0)
            # r - delta_pj q_pj - delta_pj s_pj >= 0
            row = np.zeros(n)
            row[r_index] = 1.0
            row[q_index(p, j)] = -delta[j, p]
            row[s_index(p, j)] = -delta[j, p]
            rows.append(row)
            senses.append(">=")
            rhs.append(0.0)

    bounds = list(base.bounds) + [(0.0, None)] * (2 * pj + 1)
    return LinearProgram(objective, np.array(rows), senses, np.array(rhs), bounds)


def _deviations(problem: PricingProblem, cfg: RobustConfig) -> np.ndarray:
    if cfg.deviations is None:
        return np.zeros_like(problem.scenarios.y)
    if cfg.deviations.shape != problem.scenarios.y.shape:
        raise ValueError("deviation matrix shape must match the scenario matrix")
    return cfg.deviations


def price(problem: PricingProblem, cfg: RobustConfig | None = None) -> PricingSolution:
    """Build the requested formulation, solve it, and extract the solution.

    For the nominal formulation the LP objective is cross-checked against the
    sort-based CVaR of the residual losses at the optimal premiums.  When CVaR
    is flat in the premiums the smallest feasible premium vector is reported.
    """
    cfg = cfg or RobustConfig()
    if cfg.kind == "nominal":
        lp = build_nominal(problem)
    elif cfg.kind == "box":
        lp = build_box(problem, cfg)
    else:
        lp = build_polyhedral(problem, cfg)

    sol = solve(lp)
    if not sol.is_optimal:
        raise PricingError(f"{cfg.kind} pricing LP is {sol.status}")
    sol = _tie_break_prices(problem, lp, sol)

    j_count, p_count = problem.scenarios.y.shape
    values = sol.values
    alpha = float(values[0])
    z = values[1 : 1 + j_count].copy()
    w = values[1 + j_count : 1 + j_count + p_count * j_count].reshape(p_count, j_count).copy()
    x_start = 1 + j_count + p_count * j_count
    x = values[x_start : x_start + p_count].copy()
    aux = {"z": z, "w": w}
    if cfg.kind == "polyhedral":
        pj = p_count * j_count
        n_base = x_start + p_count
        aux["q"] = values[n_base : n_base + pj].reshape(p_count, j_count).copy()
        aux["s"] = values[n_base + pj : n_base + 2 * pj].reshape(p_count, j_count).copy()
        aux["r"] = float(values[-1])
    cvar = float(sol.objective_value)

    if cfg.kind == "nominal":
        residuals = [
            piecewise_loss(x, problem.scenarios.y[j]) for j in range(j_count)
        ]
        oracle = empirical_cvar_var(residuals, problem.beta).cvar
        scale = max(1.0, abs(oracle), abs(cvar))
        if abs(cvar - oracle) > 1e-6 * scale:
            raise PricingError(
                f"LP objective {cvar} disagrees with sort-based CVaR {oracle}"
            )

    return PricingSolution(prices=x, var=alpha, cvar=cvar, kind=cfg.kind, auxiliary=aux)


def _tie_break_prices(
    problem: PricingProblem, lp: LinearProgram, sol: LPSolution
) -> LPSolution:
    """Among optimal solutions prefer the smallest premium vector.

    Secondary solve: minimize sum_p x_p subject to the original constraints
    plus objective <= optimum (small slack for LP tolerance).
    """
    p_count = problem.scenarios.n_segments
    x_start = lp.n_vars - p_count
    secondary = np.zeros(lp.n_vars)
    secondary[x_start:] = 1.0

    rows = np.vstack([lp.constraints, lp.objective])
    senses = list(lp.senses) + ["<="]
    slack = 1e-7 * max(1.0, abs(sol.objective_value))
    rhs = np.append(lp.rhs, sol.objective_value + slack)
    tie_lp = LinearProgram(secondary, rows, senses, rhs, list(lp.bounds))
    tie_sol = solve(tie_lp)
    if not tie_sol.is_optimal:
        return sol
    # the tie-broken point is optimal up to the slack; report the true optimum
    return LPSolution(
        status="optimal",
        values=tie_sol.values,
        objective_value=float(sol.objective_value),
    )
