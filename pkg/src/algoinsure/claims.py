"""Claim-cost algebra and Monte-Carlo generation of the scenario matrix.

A contract covers N patients classified by a model with threshold-dependent
specificity kappa and sensitivity lambda.  Each misclassification type carries
its own litigation-cost distribution: K for false positives, L for false
negatives.  Scenarios aggregate per-patient draws into total claim costs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CostDistribution",
    "ClaimCostModel",
    "ErrorRates",
    "ContractSpec",
    "expected_claim_cost",
    "claim_cost_variance",
    "total_expected_loss",
    "generate_scenarios",
]


@dataclass(frozen=True)
class CostDistribution:
    """Normal litigation cost truncated at zero (negative costs are meaningless)."""

    mean: float
    std: float

    def __post_init__(self):
        if self.mean <= 0:
            raise ValueError("cost mean must be positive")
        if self.std < 0:
            raise ValueError("cost std must be non-negative")


@dataclass(frozen=True)
class ClaimCostModel:
    false_positive_cost: CostDistribution
    false_negative_cost: CostDistribution
    rho: float = 0.0  # correlation of the underlying normals

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError("correlation must lie in [-1, 1]")


@dataclass(frozen=True)
class ErrorRates:
    """Operating point of the classifier at threshold tau."""

    tau: float
    kappa: float  # specificity
    lam: float  # sensitivity

    def __post_init__(self):
        for name, v in (("tau", self.tau), ("kappa", self.kappa), ("lam", self.lam)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class ContractSpec:
    """One insurance contract: P segments, N patients each, J scenarios."""

    n_patients: int
    n_scenarios: int
    rates: tuple  # ErrorRates per segment
    cost_models: tuple  # ClaimCostModel per segment
    master_seed: int = 0
    bernoulli: bool = False  # sample which patients are misclassified instead
    # of scaling every patient by the error probability

    def __post_init__(self):
        if self.n_patients < 1 or self.n_scenarios < 1:
            raise ValueError("N and J must be >= 1")
        if len(self.rates) != len(self.cost_models) or not self.rates:
            raise ValueError("need matching non-empty rates and cost_models")

    @property
    def n_segments(self) -> int:
        return len(self.rates)


def expected_claim_cost(rates: ErrorRates, model: ClaimCostModel) -> float:
    """Expected individual claim cost (1-kappa) mu + (1-lambda) M."""
    return (1.0 - rates.kappa) * model.false_positive_cost.mean + (
        1.0 - rates.lam
    ) * model.false_negative_cost.mean


def claim_cost_variance(rates: ErrorRates, model: ClaimCostModel) -> float:
    """Variance of the individual claim cost, including the K/L correlation term."""
    a = (1.0 - rates.kappa) * model.false_positive_cost.std
    b = (1.0 - rates.lam) * model.false_negative_cost.std
    return a * a + b * b + 2.0 * a * b * model.rho


def total_expected_loss(rates: ErrorRates, model: ClaimCostModel, n_patients: int) -> float:
    """Expected total loss over the contract period, N * E(claim cost)."""
    if n_patients < 1:
        raise ValueError("N must be >= 1")
    return n_patients * expected_claim_cost(rates, model)


def _draw_costs(rng: np.random.Generator, model: ClaimCostModel, n: int):
    """Correlated (K, L) pairs: bivariate construction on the underlying
    normals, then truncation of negative samples at zero."""
    z1 = rng.standard_normal(n)
    z2 = rng.standard_normal(n)
    rho = model.rho
    fp, fn = model.false_positive_cost, model.false_negative_cost
    k = fp.mean + fp.std * z1
    l = fn.mean + fn.std * (rho * z1 + np.sqrt(1.0 - rho * rho) * z2)
    return np.maximum(k, 0.0), np.maximum(l, 0.0)


def generate_scenarios(spec: ContractSpec) -> np.ndarray:
    """J x P matrix of total claim costs y_pj.

    y_pj = sum_i (1-kappa) K_i + (1-lambda) L_i with per-patient draws from the
    litigation-cost distributions.  Each (p, j) cell uses its own RNG stream
    keyed by (master_seed, p, j), so the result is identical no matter how the
    computation is partitioned across workers.
    """
    j_count, p_count = spec.n_scenarios, spec.n_segments
    y = np.empty((j_count, p_count))
    for p in range(p_count):
        rates, model = spec.rates[p], spec.cost_models[p]
        fp_rate = 1.0 - rates.kappa
        fn_rate = 1.0 - rates.lam
        for j in range(j_count):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=spec.master_seed, spawn_key=(p, j))
            )
            k, l = _draw_costs(rng, model, spec.n_patients)
            if spec.bernoulli:
                is_fp = rng.random(spec.n_patients) < fp_rate
                is_fn = rng.random(spec.n_patients) < fn_rate
                y[j, p] = np.sum(is_fp * k) + np.sum(is_fn * l)
            else:
                y[j, p] = fp_rate * np.sum(k) + fn_rate * np.sum(l)
    return y
