"""Config-driven experiment harness: end-to-end runs, sweeps, CSV/JSON output.

Every operation takes an ExperimentConfig, executes the pipeline (load data,
split, train, score, simulate scenarios, price) and writes deterministic
artifacts: a CSV per sweep with parameters first and metrics after, plus a
JSON file with the per-seed numbers behind every CSV row.  Grid points run
concurrently when ``threads`` > 1; rows are assembled by sorted key, so the
output bytes do not depend on the degree of parallelism.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import data as datamod
from .claims import ClaimCostModel, ContractSpec, CostDistribution, ErrorRates, generate_scenarios
from .forest import ForestClassifier, metrics_at_threshold, roc_auc, train_forest
from .generalize import FidelityGenerator, cvar_under_shift
from .interpret import CURVE_SHAPES, InterpretabilityCurve, risk_at
from .pricing import PricingProblem, RobustConfig, ScenarioMatrix, budget_deviations, price

__all__ = [
    "ExperimentConfig",
    "HarnessError",
    "Pipeline",
    "build_pipeline",
    "run_price",
    "sweep_tau",
    "sweep_cost_means",
    "table2",
    "interpretability_curves",
    "generalizability_curve",
    "write_csv",
]


class HarnessError(RuntimeError):
    """Stage-tagged pipeline failure; the message starts with [stage]."""


def _default_tau_grid():
    return tuple(round(0.05 * k, 2) for k in range(1, 16))  # 0.05 .. 0.75


def _default_theta_grid():
    return tuple(round(0.05 * k, 2) for k in range(21))  # 0.0 .. 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    """All experiment knobs; the defaults reproduce the published setting."""

    # dataset / classifier
    dataset_path: str | None = None  # None = bundled original-699 file
    schema: str = "original-699"
    train_fraction: float = 0.75
    split_seed: int = 245
    training_seed: int = 0
    # contract
    n_patients: int = 100
    n_scenarios: int = 1000
    lower_bound: float = 10_000.0
    upper_bound: float = 50_000.0
    upper_bound_grid: tuple = (10_000.0, 50_000.0)
    # litigation costs
    mu: float = 100_000.0
    sigma_mu: float = 25_000.0
    big_m: float = 500_000.0
    sigma_big_m: float = 150_000.0
    rho: float = 0.0
    # risk / formulation
    beta: float = 0.9
    beta_grid: tuple = (0.9, 0.95, 0.99)
    tau: float = 0.3
    tau_grid: tuple = field(default_factory=_default_tau_grid)
    kind: str = "nominal"
    gamma: float = 3.0
    eta: float = 0.1
    # interpretability
    c_ml: float = 500_000.0
    c_h_grid: tuple = (600_000.0, 750_000.0, 1_000_000.0, 2_000_000.0)
    theta_grid: tuple = field(default_factory=_default_theta_grid)
    shapes: tuple = CURVE_SHAPES
    # generalizability
    psi_grid: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    n_synth: int = 1000
    h: float = 0.05
    # execution
    seeds: tuple = tuple(range(10))
    output_dir: str = "results"
    threads: int = 1

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise HarnessError(f"[config] unknown config keys: {sorted(unknown)}")
        coerced = {
            k: tuple(v) if isinstance(v, list) else v for k, v in raw.items()
        }
        return cls(**coerced)

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise HarnessError(f"[config] cannot read {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise HarnessError(f"[config] {path}: top level must be a JSON object")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in out.items()}

    def cost_model(self, mu=None, sigma_mu=None, big_m=None, sigma_big_m=None) -> ClaimCostModel:
        return ClaimCostModel(
            CostDistribution(mu or self.mu, self.sigma_mu if sigma_mu is None else sigma_mu),
            CostDistribution(
                big_m or self.big_m,
                self.sigma_big_m if sigma_big_m is None else sigma_big_m,
            ),
            rho=self.rho,
        )


@dataclass
class Pipeline:
    """Trained classifier plus its held-out evaluation, shared across sweeps."""

    model: ForestClassifier
    train: datamod.TabularDataset
    test: datamod.TabularDataset
    test_scores: np.ndarray
    auc: float

    def rates_at(self, tau: float) -> ErrorRates:
        mt = metrics_at_threshold(self.test_scores, self.test.labels, tau)
        return ErrorRates(tau, mt.specificity, mt.sensitivity)


def build_pipeline(config: ExperimentConfig) -> Pipeline:
    """Load, split, impute, train with cross-validation, score the test set."""
    path = config.dataset_path or datamod.bundled_dataset_path()
    try:
        dataset = datamod.load_dataset(path, config.schema)
    except (OSError, datamod.DatasetError) as exc:
        raise HarnessError(f"[load] {exc}") from exc
    try:
        train, test = datamod.stratified_split(
            dataset, config.train_fraction, seed=config.split_seed
        )
        means = datamod.feature_means(train)
        train = datamod.load_and_impute(train, means)
        test = datamod.load_and_impute(test, means)
    except (ValueError, datamod.DatasetError) as exc:
        raise HarnessError(f"[split] {exc}") from exc
    try:
        model = train_forest(train, seed=config.training_seed)
    except ValueError as exc:
        raise HarnessError(f"[train] {exc}") from exc
    scores = model.predict_scores(test.features)
    return Pipeline(model, train, test, scores, roc_auc(scores, test.labels))


class _ScenarioCache:
    """Scenario matrices keyed by everything they depend on."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self._store: dict = {}

    def get(self, rates: ErrorRates, cost: ClaimCostModel, seed: int) -> ScenarioMatrix:
        key = (
            round(rates.kappa, 12),
            round(rates.lam, 12),
            cost.false_positive_cost.mean,
            cost.false_positive_cost.std,
            cost.false_negative_cost.mean,
            cost.false_negative_cost.std,
            cost.rho,
            seed,
        )
        if key not in self._store:
            spec = ContractSpec(
                self.config.n_patients,
                self.config.n_scenarios,
                (rates,),
                (cost,),
                master_seed=seed,
            )
            self._store[key] = ScenarioMatrix(generate_scenarios(spec))
        return self._store[key]


def _price_cell(
    config: ExperimentConfig,
    scenarios: ScenarioMatrix,
    beta: float,
    upper_bound: float,
    kind: str,
):
    problem = PricingProblem(
        scenarios,
        beta=beta,
        lower_bounds=np.array([config.lower_bound]),
        upper_bounds=np.array([upper_bound]),
    )
    if kind == "nominal":
        cfg = None
    else:
        dev = budget_deviations(scenarios, config.eta, config.gamma)
        cfg = RobustConfig(kind, config.gamma, dev)
    try:
        return price(problem, cfg)
    except Exception as exc:
        raise HarnessError(f"[price] {kind}, beta={beta}, H={upper_bound}: {exc}") from exc


def _parallel(fn, keys, threads: int) -> dict:
    """Evaluate fn over keys, possibly concurrently; returns {key: fn(key)}."""
    if threads <= 1:
        return {k: fn(k) for k in keys}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        values = list(pool.map(fn, keys))
    return dict(zip(keys, values))


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_csv(path: str, rows: list[dict], param_cols: list[str], metric_cols: list[str]):
    """Fixed layout: sorted parameter columns first, then the metric columns."""
    cols = sorted(param_cols) + metric_cols
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in cols])


def _write_json(path: str, payload):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _aggregate(per_seed: list[dict]) -> dict:
    cvars = [r["cvar"] for r in per_seed]
    return {
        "mean_cvar": float(np.mean(cvars)),
        "std_cvar": float(np.std(cvars)),
        "mean_var": float(np.mean([r["var"] for r in per_seed])),
        "mean_price": float(np.mean([r["price"] for r in per_seed])),
        "n_seeds": len(per_seed),
    }


_METRIC_COLS = ["mean_cvar", "std_cvar", "mean_var", "mean_price", "auc", "kappa", "lam", "n_seeds"]


def run_price(config: ExperimentConfig, pipeline: Pipeline | None = None) -> dict:
    """End-to-end single-point run; writes run_price.json and returns it."""
    pipeline = pipeline or build_pipeline(config)
    rates = pipeline.rates_at(config.tau)
    cost = config.cost_model()
    cache = _ScenarioCache(config)

    def solve(seed):
        scen = cache.get(rates, cost, seed)
        sol = _price_cell(config, scen, config.beta, config.upper_bound, config.kind)
        return {
            "seed": seed,
            "price": float(sol.prices[0]),
            "var": sol.var,
            "cvar": sol.cvar,
        }

    per_seed = [v for _, v in sorted(_parallel(solve, list(config.seeds), config.threads).items())]
    summary = {
        "tau": config.tau,
        "beta": config.beta,
        "kind": config.kind,
        "upper_bound": config.upper_bound,
        "auc": pipeline.auc,
        "kappa": rates.kappa,
        "lam": rates.lam,
        **_aggregate(per_seed),
        "per_seed": per_seed,
    }
    _write_json(os.path.join(config.output_dir, "run_price.json"), summary)
    return summary


def _sweep(config, pipeline, points, point_params, cost_of, rates_of, name,
           beta_of=None, bound_of=None, kind_of=None):
    """Shared sweep driver: points -> per-seed solves -> aggregated CSV rows."""
    cache = _ScenarioCache(config)
    beta_of = beta_of or (lambda pt: config.beta)
    bound_of = bound_of or (lambda pt: config.upper_bound)
    kind_of = kind_of or (lambda pt: config.kind)

    def solve(task):
        pt, seed = task
        rates = rates_of(pt)
        scen = cache.get(rates, cost_of(pt), seed)
        sol = _price_cell(config, scen, beta_of(pt), bound_of(pt), kind_of(pt))
        return {"seed": seed, "price": float(sol.prices[0]), "var": sol.var, "cvar": sol.cvar}

    tasks = [(pt, seed) for pt in points for seed in config.seeds]
    solved = _parallel(solve, tasks, config.threads)

    rows, artifacts = [], []
    for pt in points:
        per_seed = [solved[(pt, seed)] for seed in config.seeds]
        rates = rates_of(pt)
        row = {
            **point_params(pt),
            **_aggregate(per_seed),
            "auc": pipeline.auc,
            "kappa": rates.kappa,
            "lam": rates.lam,
        }
        rows.append(row)
        artifacts.append({**point_params(pt), "per_seed": per_seed})
    param_cols = list(point_params(points[0]).keys())
    write_csv(os.path.join(config.output_dir, f"{name}.csv"), rows, param_cols, _METRIC_COLS)
    _write_json(os.path.join(config.output_dir, f"{name}_per_seed.json"), artifacts)
    return rows


def sweep_tau(config: ExperimentConfig, pipeline: Pipeline | None = None) -> list[dict]:
    """CVaR against the classification threshold for both cost settings."""
    if not config.tau_grid:
        raise HarnessError("[sweep-tau] empty tau grid")
    pipeline = pipeline or build_pipeline(config)
    settings = {
        "low": config.cost_model(),
        "high": config.cost_model(
            mu=500_000.0, sigma_mu=150_000.0, big_m=1_000_000.0, sigma_big_m=450_000.0
        ),
    }
    points = [(setting, tau) for setting in settings for tau in config.tau_grid]
    return _sweep(
        config,
        pipeline,
        points,
        point_params=lambda pt: {"cost_setting": pt[0], "tau": pt[1]},
        cost_of=lambda pt: settings[pt[0]],
        rates_of=lambda pt: pipeline.rates_at(pt[1]),
        name="sweep_tau",
    )


DEFAULT_MU_GRID = (100_000.0, 200_000.0, 300_000.0, 400_000.0, 500_000.0)
DEFAULT_M_GRID = (500_000.0, 625_000.0, 750_000.0, 875_000.0, 1_000_000.0)


def sweep_cost_means(
    config: ExperimentConfig,
    pipeline: Pipeline | None = None,
    mu_grid=DEFAULT_MU_GRID,
    m_grid=DEFAULT_M_GRID,
    taus=(0.3, 0.4),
) -> list[dict]:
    """CVaR against the litigation cost means; sigma fixed at 20% of the mean."""
    mu_grid, m_grid, taus = tuple(mu_grid), tuple(m_grid), tuple(taus)
    if not mu_grid or not m_grid or not taus:
        raise HarnessError("[sweep-cost] empty grid")
    pipeline = pipeline or build_pipeline(config)
    points = [(tau, mu, m) for tau in taus for mu in mu_grid for m in m_grid]
    return _sweep(
        config,
        pipeline,
        points,
        point_params=lambda pt: {"tau": pt[0], "mu": pt[1], "big_m": pt[2]},
        cost_of=lambda pt: config.cost_model(
            mu=pt[1], sigma_mu=0.2 * pt[1], big_m=pt[2], sigma_big_m=0.2 * pt[2]
        ),
        rates_of=lambda pt: pipeline.rates_at(pt[0]),
        name="sweep_cost_means",
    )


def table2(config: ExperimentConfig, pipeline: Pipeline | None = None) -> list[dict]:
    """Premium cap x formulation x confidence grid at the default threshold."""
    pipeline = pipeline or build_pipeline(config)
    kinds = ("nominal", "polyhedral", "box")
    points = [
        (h, kind, beta)
        for h in config.upper_bound_grid
        for kind in kinds
        for beta in config.beta_grid
    ]
    return _sweep(
        config,
        pipeline,
        points,
        point_params=lambda pt: {"upper_bound": pt[0], "kind": pt[1], "beta": pt[2]},
        cost_of=lambda pt: config.cost_model(),
        rates_of=lambda pt: pipeline.rates_at(config.tau),
        name="table2",
        beta_of=lambda pt: pt[2],
        bound_of=lambda pt: pt[0],
        kind_of=lambda pt: pt[1],
    )


def interpretability_curves(config: ExperimentConfig) -> list[dict]:
    """Risk exposure c(theta) for every shape and human-exposure scenario."""
    rows = []
    for shape in config.shapes:
        for c_h in config.c_h_grid:
            curve = InterpretabilityCurve(shape=shape, c_ml=config.c_ml, c_h=c_h)
            for theta in config.theta_grid:
                rows.append(
                    {
                        "shape": shape,
                        "c_h": float(c_h),
                        "theta": float(theta),
                        "risk_exposure": risk_at(curve, theta),
                    }
                )
    write_csv(
        os.path.join(config.output_dir, "interpretability.csv"),
        rows,
        ["shape", "c_h", "theta"],
        ["risk_exposure"],
    )
    return rows


def generalizability_curve(config: ExperimentConfig, pipeline: Pipeline | None = None) -> list[dict]:
    """Median GQI and best CVaR against the synthetic-data fidelity knob."""
    pipeline = pipeline or build_pipeline(config)
    cost = config.cost_model()

    def run_seed(seed):
        gen = FidelityGenerator(h=config.h, seed=seed).fit(pipeline.train)
        return cvar_under_shift(
            pipeline.model,
            gen,
            config.psi_grid,
            pipeline.test,
            config.tau_grid,
            cost,
            n_patients=config.n_patients,
            n_scenarios=config.n_scenarios,
            beta=config.beta,
            lower_bound=config.lower_bound,
            upper_bound=config.upper_bound,
            n_synth=config.n_synth,
            master_seed=seed,
        )

    by_seed = _parallel(run_seed, list(config.seeds), config.threads)
    rows, artifacts = [], []
    for i, psi in enumerate(config.psi_grid):
        gqis = [by_seed[s][i].gqi for s in config.seeds]
        cvars = [by_seed[s][i].best_cvar for s in config.seeds]
        rows.append(
            {
                "psi": float(psi),
                "median_gqi": float(np.median(gqis)),
                "median_best_cvar": float(np.median(cvars)),
                "n_seeds": len(config.seeds),
            }
        )
        artifacts.append(
            {
                "psi": float(psi),
                "per_seed": [
                    {"seed": s, "gqi": by_seed[s][i].gqi, "best_cvar": by_seed[s][i].best_cvar}
                    for s in config.seeds
                ],
            }
        )
    write_csv(
        os.path.join(config.output_dir, "generalizability.csv"),
        rows,
        ["psi"],
        ["median_gqi", "median_best_cvar", "n_seeds"],
    )
    _write_json(os.path.join(config.output_dir, "generalizability_per_seed.json"), artifacts)
    return rows
