"""Command-line interface for the pricing experiments.

Subcommands mirror the harness operations; every run reads an optional JSON
config, applies command-line overrides, and writes CSV/JSON artifacts to the
output directory.  Exit code 0 on success, 1 with a stage-tagged message on
any failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import harness
from .data import DATASET_URLS
from .harness import ExperimentConfig, HarnessError


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="path to a JSON experiment config")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument(
        "--seeds", help="comma-separated scenario seeds (overrides config)"
    )
    parser.add_argument("--threads", type=int, help="worker threads for grid points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="algoinsure",
        description="CVaR-based premium pricing for classifier liability contracts",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("price", "single end-to-end pricing run (JSON summary)"),
        ("sweep-tau", "CVaR vs classification threshold, both cost settings"),
        ("sweep-cost", "CVaR vs litigation cost means at tau in {0.3, 0.4}"),
        ("table2", "premium cap x formulation x confidence level grid"),
        ("interpret", "risk exposure curves over the interpretability parameter"),
        ("generalize", "GQI and best CVaR over the synthetic-data fidelity knob"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "price":
            p.add_argument("--tau", type=float, help="classification threshold")
            p.add_argument("--beta", type=float, help="CVaR confidence level")
            p.add_argument(
                "--kind",
                choices=("nominal", "box", "polyhedral"),
                help="pricing formulation",
            )
    sub.add_parser("fetch", help="print the canonical dataset URLs (no network I/O)")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    config = (
        ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    )
    overrides = {}
    if args.out:
        overrides["output_dir"] = args.out
    if args.seeds:
        try:
            overrides["seeds"] = tuple(int(s) for s in args.seeds.split(","))
        except ValueError as exc:
            raise HarnessError(f"[config] bad --seeds value: {exc}") from exc
    if args.threads is not None:
        overrides["threads"] = args.threads
    for name in ("tau", "beta", "kind"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return dataclasses.replace(config, **overrides) if overrides else config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "fetch":
        for schema, url in sorted(DATASET_URLS.items()):
            print(f"{schema}: {url}")
        return 0
    try:
        config = _config_from_args(args)
        if args.command == "price":
            summary = harness.run_price(config)
            print(json.dumps({k: v for k, v in summary.items() if k != "per_seed"}, indent=2))
        elif args.command == "sweep-tau":
            harness.sweep_tau(config)
        elif args.command == "sweep-cost":
            harness.sweep_cost_means(config)
        elif args.command == "table2":
            harness.table2(config)
        elif args.command == "interpret":
            harness.interpretability_curves(config)
        elif args.command == "generalize":
            harness.generalizability_curve(config)
        if args.command != "price":
            print(f"wrote results to {config.output_dir}/")
        return 0
    except HarnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # anything unexpected still exits non-zero
        print(f"error: [internal] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
