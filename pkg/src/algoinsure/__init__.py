"""Premium pricing for machine-learning liability contracts.

CVaR-minimizing scenario LPs (nominal and robust), Monte-Carlo claim-cost
simulation driven by a classifier's operating point, interpretability and
data-fidelity adjustments, and a config-driven experiment harness.
"""

from .claims import (
    ClaimCostModel,
    ContractSpec,
    CostDistribution,
    ErrorRates,
    claim_cost_variance,
    expected_claim_cost,
    generate_scenarios,
    total_expected_loss,
)
from .data import TabularDataset, bundled_dataset_path, load_dataset, stratified_split
from .forest import ForestClassifier, metrics_at_threshold, roc_auc, train_forest
from .generalize import FidelityGenerator, GQIReport, cvar_under_shift, gqi
from .harness import ExperimentConfig, build_pipeline, run_price
from .interpret import CURVE_SHAPES, InterpretabilityCurve, adjust_pricing, risk_at, xi
from .lpsolve import LinearProgram, LPSolution, solve
from .pricing import (
    PricingProblem,
    PricingSolution,
    RobustConfig,
    ScenarioMatrix,
    budget_deviations,
    price,
)
from .riskcore import Confidence, RiskReport, empirical_cvar_var, piecewise_loss, ru_objective

__version__ = "0.1.0"

__all__ = [
    "Confidence",
    "RiskReport",
    "empirical_cvar_var",
    "piecewise_loss",
    "ru_objective",
    "LinearProgram",
    "LPSolution",
    "solve",
    "ScenarioMatrix",
    "PricingProblem",
    "RobustConfig",
    "PricingSolution",
    "price",
    "budget_deviations",
    "CostDistribution",
    "ClaimCostModel",
    "ErrorRates",
    "ContractSpec",
    "expected_claim_cost",
    "claim_cost_variance",
    "total_expected_loss",
    "generate_scenarios",
    "TabularDataset",
    "load_dataset",
    "bundled_dataset_path",
    "stratified_split",
    "ForestClassifier",
    "train_forest",
    "metrics_at_threshold",
    "roc_auc",
    "InterpretabilityCurve",
    "CURVE_SHAPES",
    "xi",
    "risk_at",
    "adjust_pricing",
    "FidelityGenerator",
    "GQIReport",
    "gqi",
    "cvar_under_shift",
    "ExperimentConfig",
    "build_pipeline",
    "run_price",
    "__version__",
]
