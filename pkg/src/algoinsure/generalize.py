"""Fidelity-controlled synthetic data and generalization quality evaluation.

The generator resamples the training partition with a tunable fidelity knob
psi: each synthetic row is either a jittered bootstrap copy of a real row
(probability psi, joint distribution preserved) or a row whose features are
drawn independently from the per-class marginals (probability 1 - psi,
correlations destroyed).  GQI compares a classifier trained on synthetic data
against one trained on real data, both scored on the real test set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .claims import ClaimCostModel, ContractSpec, ErrorRates, generate_scenarios
from .data import TabularDataset
from .forest import ForestClassifier, metrics_at_threshold, roc_auc
from .pricing import PricingProblem, ScenarioMatrix, price

__all__ = ["FidelityGenerator", "GQIReport", "gqi", "cvar_under_shift"]


class FidelityGenerator(BaseEstimator):
    """psi-mixture resampler of a fitted training partition.

    Stores the class-stratified rows; ``sample`` draws labels at training
    prevalence and emits either jittered bootstrap rows or independent
    per-class marginal draws.  Deterministic given ``seed``: draw k of the
    generator's lifetime uses the stream keyed by (seed, k).
    """

    def __init__(self, h: float = 0.05, seed: int = 0):
        self.h = h
        self.seed = seed

    def fit(self, train: TabularDataset):
        if self.h < 0:
            raise ValueError("jitter bandwidth must be non-negative")
        by_class = {}
        for cls in (0, 1):
            rows = train.features[train.labels == cls]
            if rows.shape[0] < 2:
                raise ValueError(f"class {cls} needs at least 2 training rows")
            by_class[cls] = rows
        self.rows_ = by_class
        self.prevalence_ = float(np.mean(train.labels == 1))
        self.scales_ = {cls: rows.std(axis=0, ddof=1) for cls, rows in by_class.items()}
        self.feature_names_ = train.feature_names
        self._n_draws = 0
        return self

    def sample(self, n: int, psi: float) -> TabularDataset:
        if not hasattr(self, "rows_"):
            raise ValueError("generator is not fitted")
        if n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 <= psi <= 1.0:
            raise ValueError("psi must lie in [0, 1]")
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(self._n_draws,))
        )
        self._n_draws += 1
        labels = (rng.random(n) < self.prevalence_).astype(int)
        joint = rng.random(n) < psi
        features = np.empty((n, len(self.feature_names_)))
        for cls in (0, 1):
            rows, scale = self.rows_[cls], self.scales_[cls]
            m, d = rows.shape
            idx = np.flatnonzero(labels == cls)
            if idx.size == 0:
                continue
            # joint-preserving path: bootstrap whole rows, then jitter
            boot = rows[rng.integers(0, m, idx.size)]
            boot = boot + rng.standard_normal((idx.size, d)) * (self.h * scale)
            # marginal path: bootstrap each feature column independently
            marg = rows[rng.integers(0, m, (idx.size, d)), np.arange(d)]
            features[idx] = np.where(joint[idx, None], boot, marg)
        return TabularDataset(features, labels, self.feature_names_)


@dataclass(frozen=True)
class GQIReport:
    accuracy_real: float
    accuracy_synthetic: float
    gqi: float  # accuracy_synthetic / accuracy_real


def _accuracy(model: ForestClassifier, test: TabularDataset, tau: float) -> float:
    pred = model.predict_scores(test.features) > tau
    return float(np.mean(pred == (test.labels == 1)))


def gqi(
    real_model: ForestClassifier,
    gen: FidelityGenerator,
    psi: float,
    real_test: TabularDataset,
    n_synth: int = 1000,
    tau: float = 0.5,
    use_auc: bool = False,
) -> GQIReport:
    """Quality index: synthetic-trained score over real-trained score.

    Both classifiers are evaluated on the real test set; accuracy at the given
    threshold by default, AUC ratio with ``use_auc``.
    """
    synth = gen.sample(n_synth, psi)
    if len(np.unique(synth.labels)) < 2:
        raise ValueError("synthetic sample is degenerate: one class only")
    synth_model = ForestClassifier(**real_model.get_params()).fit(
        synth.features, synth.labels
    )
    if use_auc:
        acc_real = roc_auc(real_model.predict_scores(real_test.features), real_test.labels)
        acc_synth = roc_auc(synth_model.predict_scores(real_test.features), real_test.labels)
    else:
        acc_real = _accuracy(real_model, real_test, tau)
        acc_synth = _accuracy(synth_model, real_test, tau)
    return GQIReport(acc_real, acc_synth, acc_synth / acc_real)


@dataclass(frozen=True)
class ShiftRow:
    psi: float
    gqi: float
    best_cvar: float
    best_tau: float


def cvar_under_shift(
    real_model: ForestClassifier,
    gen: FidelityGenerator,
    psi_grid,
    real_test: TabularDataset,
    tau_grid,
    cost_model: ClaimCostModel,
    n_patients: int = 100,
    n_scenarios: int = 1000,
    beta: float = 0.9,
    lower_bound: float = 10_000.0,
    upper_bound: float = 50_000.0,
    n_synth: int = 1000,
    master_seed: int = 0,
) -> list[ShiftRow]:
    """Best achievable CVaR when the deployed population drifts from training.

    For each psi a synthetic population is sampled, the real model's
    kappa/lambda on it are measured per threshold, scenarios are generated at
    those rates, and the minimum priced CVaR across the threshold grid is
    reported next to the GQI.  Identical operating points share one pricing
    solve.
    """
    psi_grid = list(psi_grid)
    tau_grid = list(tau_grid)
    if not psi_grid or not tau_grid:
        raise ValueError("psi and tau grids must be non-empty")
    rows = []
    cache: dict[tuple, float] = {}
    for psi in psi_grid:
        synth = gen.sample(n_synth, psi)
        report = gqi(real_model, gen, psi, real_test, n_synth=n_synth)
        scores = real_model.predict_scores(synth.features)
        best = None
        for tau in tau_grid:
            mt = metrics_at_threshold(scores, synth.labels, tau)
            key = (round(mt.specificity, 12), round(mt.sensitivity, 12))
            if key not in cache:
                if mt.specificity == 1.0 and mt.sensitivity == 1.0:
                    cache[key] = 0.0
                else:
                    rates = ErrorRates(tau, mt.specificity, mt.sensitivity)
                    spec = ContractSpec(
                        n_patients, n_scenarios, (rates,), (cost_model,),
                        master_seed=master_seed,
                    )
                    problem = PricingProblem(
                        ScenarioMatrix(generate_scenarios(spec)),
                        beta=beta,
                        lower_bounds=np.array([lower_bound]),
                        upper_bounds=np.array([upper_bound]),
                    )
                    cache[key] = price(problem).cvar
            if best is None or cache[key] < best[0]:
                best = (cache[key], tau)
        rows.append(ShiftRow(psi=psi, gqi=report.gqi, best_cvar=best[0], best_tau=best[1]))
    return rows
