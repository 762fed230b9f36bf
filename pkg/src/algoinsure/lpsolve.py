"""Dense linear-program interface shared by all pricing formulations.

The primary path delegates to scipy's HiGHS simplex, which is deterministic
for identical input.  ``solve_by_vertex_enumeration`` is an independent
brute-force path for small programs, kept free of any shared code with
``solve`` so the two can verify each other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "LinearProgram",
    "LPSolution",
    "solve",
    "check_feasible",
    "solve_by_vertex_enumeration",
]

FEASIBILITY_TOL = 1e-8

SENSES = ("<=", ">=", "=")


@dataclass
class LinearProgram:
    """min c'v subject to rows A v (sense) b and per-variable bounds.

    ``bounds`` entries are (lower, upper) with ``None`` meaning unbounded.
    """

    objective: np.ndarray
    constraints: np.ndarray  # (m, n) row coefficients
    senses: list  # one of "<=", ">=", "=" per row
    rhs: np.ndarray
    bounds: list = field(default_factory=list)  # (lower|None, upper|None) per var

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.constraints = np.asarray(self.constraints, dtype=float).reshape(
            -1, self.objective.size
        )
        self.rhs = np.asarray(self.rhs, dtype=float)
        n = self.objective.size
        m = self.constraints.shape[0]
        if len(self.senses) != m or self.rhs.size != m:
            raise ValueError("constraint rows, senses and rhs lengths disagree")
        for s in self.senses:
            if s not in SENSES:
                raise ValueError(f"unknown sense {s!r}")
        if not self.bounds:
            self.bounds = [(None, None)] * n
        if len(self.bounds) != n:
            raise ValueError("one (lower, upper) bound pair required per variable")
        for lo, hi in self.bounds:
            if lo is not None and hi is not None and lo > hi:
                raise ValueError(f"empty bound interval [{lo}, {hi}]")

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_constraints(self) -> int:
        return self.constraints.shape[0]


@dataclass
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    values: np.ndarray | None
    objective_value: float | None

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


_STATUS_MAP = {0: "optimal", 2: "infeasible", 3: "unbounded"}


def solve(lp: LinearProgram) -> LPSolution:
    """Solve to an optimal vertex; infeasible/unbounded reported via status."""
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for row, sense, b in zip(lp.constraints, lp.senses, lp.rhs):
        if sense == "<=":
            a_ub.append(row)
            b_ub.append(b)
        elif sense == ">=":
            a_ub.append(-row)
            b_ub.append(-b)
        else:
            a_eq.append(row)
            b_eq.append(b)
    res = linprog(
        lp.objective,
        A_ub=np.array(a_ub) if a_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(a_eq) if a_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=lp.bounds,
        method="highs",
    )
    status = _STATUS_MAP.get(res.status, "infeasible")
    if status != "optimal":
        return LPSolution(status=status, values=None, objective_value=None)
    return LPSolution(status="optimal", values=np.asarray(res.x), objective_value=float(res.fun))


def check_feasible(lp: LinearProgram, values) -> tuple[bool, float]:
    """Return (feasible within tolerance, maximum constraint/bound violation)."""
    v = np.asarray(values, dtype=float)
    if v.shape != (lp.n_vars,):
        raise ValueError(f"expected {lp.n_vars} values, got shape {v.shape}")
    worst = 0.0
    lhs = lp.constraints @ v
    for val, sense, b in zip(lhs, lp.senses, lp.rhs):
        if sense == "<=":
            worst = max(worst, val - b)
        elif sense == ">=":
            worst = max(worst, b - val)
        else:
            worst = max(worst, abs(val - b))
    for x, (lo, hi) in zip(v, lp.bounds):
        if lo is not None:
            worst = max(worst, lo - x)
        if hi is not None:
            worst = max(worst, x - hi)
    return worst <= FEASIBILITY_TOL, float(worst)


def solve_by_vertex_enumeration(lp: LinearProgram) -> LPSolution:
    """Brute-force oracle: enumerate basic solutions of all constraint subsets.

    Exponential in the problem size; intended for programs with a handful of
    variables.  Unboundedness is detected by re-running with a large artificial
    box and checking whether the optimum sticks to it.
    """
    n = lp.n_vars
    if n > 12:
        raise ValueError("vertex enumeration is for small programs only")

    rows = [np.asarray(r, dtype=float) for r in lp.constraints]
    rhs = list(lp.rhs)
    senses = list(lp.senses)
    # bounds as additional rows so every vertex is an intersection of n rows;
    # a large artificial box stands in for any missing bound so unbounded
    # directions show up as vertices stuck to the box
    big = 1e9
    for i, (lo, hi) in enumerate(lp.bounds):
        e = np.zeros(n)
        e[i] = 1.0
        rows.append(e.copy())
        senses.append(">=")
        rhs.append(-big if lo is None else lo)
        rows.append(e.copy())
        senses.append("<=")
        rhs.append(big if hi is None else hi)

    a = np.array(rows)
    b = np.array(rhs)
    le = np.array([s == "<=" for s in senses])
    ge = np.array([s == ">=" for s in senses])
    tol = 1e-7 * np.maximum(1.0, np.abs(b))

    combos = np.array(list(itertools.combinations(range(len(rows)), n)))
    subs = a[combos]
    with np.errstate(all="ignore"):
        keep = np.abs(np.linalg.det(subs)) > 1e-10
    xs = np.linalg.solve(subs[keep], b[combos[keep]][..., None])[..., 0]

    lhs = xs @ a.T
    viol = np.where(le, lhs - b, np.where(ge, b - lhs, np.abs(lhs - b)))
    feasible = np.all(viol <= tol, axis=1)
    xs = xs[feasible]

    best_val, best_x = np.inf, None
    feasible_found = bool(xs.shape[0])
    hit_box = bool(np.any(np.abs(xs) > big * 0.99))
    if feasible_found:
        vals = xs @ lp.objective
        i = int(np.argmin(vals))
        best_val, best_x = float(vals[i]), xs[i]

    if not feasible_found:
        return LPSolution(status="infeasible", values=None, objective_value=None)
    if best_x is not None and np.any(np.abs(best_x) > big * 0.99):
        return LPSolution(status="unbounded", values=None, objective_value=None)
    if best_x is None and hit_box:
        return LPSolution(status="unbounded", values=None, objective_value=None)
    return LPSolution(status="optimal", values=best_x, objective_value=best_val)
