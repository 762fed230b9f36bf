import csv
import dataclasses
import json
import os

import numpy as np
import pytest

from algoinsure.cli import main
from algoinsure.harness import (
    ExperimentConfig,
    HarnessError,
    build_pipeline,
    generalizability_curve,
    interpretability_curves,
    run_price,
    sweep_cost_means,
    sweep_tau,
    table2,
    write_csv,
)


def small_config(out, **overrides):
    base = dict(
        output_dir=str(out),
        seeds=(0,),
        tau_grid=(0.25, 0.3, 0.4),
        n_scenarios=200,
        psi_grid=(0.0, 1.0),
        n_synth=200,
    )
    base.update(overrides)
    return dataclasses.replace(ExperimentConfig(), **base)


class TestConfig:
    def test_defaults_match_published_table(self):
        cfg = ExperimentConfig()
        assert cfg.gamma == 3.0
        assert cfg.beta_grid == (0.9, 0.95, 0.99)
        assert cfg.lower_bound == 10_000.0
        assert cfg.upper_bound_grid == (10_000.0, 50_000.0)
        assert cfg.mu == 100_000.0 and cfg.sigma_mu == 25_000.0
        assert cfg.big_m == 500_000.0 and cfg.sigma_big_m == 150_000.0
        assert cfg.n_scenarios == 1000 and cfg.n_patients == 100
        assert len(cfg.seeds) == 10
        assert min(cfg.tau_grid) >= 0.01 and max(cfg.tau_grid) <= 0.75

    def test_json_round_trip(self, tmp_path):
        cfg = ExperimentConfig()
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg.to_dict()))
        assert ExperimentConfig.from_json(str(path)) == cfg

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text('{"no_such_knob": 1}')
        with pytest.raises(HarnessError, match=r"\[config\]"):
            ExperimentConfig.from_json(str(path))

    def test_malformed_json_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{")
        with pytest.raises(HarnessError, match=r"\[config\]"):
            ExperimentConfig.from_json(str(path))

    def test_missing_dataset_tagged_as_load_stage(self, tmp_path):
        cfg = small_config(tmp_path, dataset_path=str(tmp_path / "nope.data"))
        with pytest.raises(HarnessError, match=r"\[load\]"):
            build_pipeline(cfg)


class TestWriteCsv:
    def test_layout_and_formatting(self, tmp_path):
        path = str(tmp_path / "out.csv")
        rows = [{"b_param": 1, "a_param": "x", "metric": 1234567.891}]
        write_csv(path, rows, ["b_param", "a_param"], ["metric"])
        with open(path) as fh:
            lines = fh.read().splitlines()
        assert lines[0] == "a_param,b_param,metric"  # params sorted first
        assert lines[1] == "x,1,1.23457e+06"  # 6 significant digits


class TestRunPrice:
    def test_summary_fields_and_artifact(self, default_config, pipeline, tmp_path):
        cfg = dataclasses.replace(
            default_config, output_dir=str(tmp_path), seeds=(0, 1), n_scenarios=200
        )
        summary = run_price(cfg, pipeline)
        for key in ("tau", "beta", "kind", "auc", "kappa", "lam", "mean_cvar", "per_seed"):
            assert key in summary
        assert summary["n_seeds"] == 2
        on_disk = json.loads((tmp_path / "run_price.json").read_text())
        assert on_disk["mean_cvar"] == summary["mean_cvar"]
        per_seed = [r["cvar"] for r in on_disk["per_seed"]]
        assert np.mean(per_seed) == pytest.approx(summary["mean_cvar"])

    def test_perfect_classifier_prices_to_zero(self, default_config, pipeline, tmp_path):
        from algoinsure.harness import Pipeline

        perfect = Pipeline(
            model=pipeline.model,
            train=pipeline.train,
            test=pipeline.test,
            test_scores=pipeline.test.labels.astype(float),  # kappa = lam = 1
            auc=1.0,
        )
        cfg = dataclasses.replace(
            default_config, output_dir=str(tmp_path), seeds=(0,), n_scenarios=100
        )
        summary = run_price(cfg, perfect)
        assert summary["kappa"] == 1.0 and summary["lam"] == 1.0
        assert summary["mean_cvar"] == pytest.approx(0.0, abs=1e-6)


class TestSweeps:
    def test_sweep_tau_rows_and_csv(self, default_config, pipeline, tmp_path):
        cfg = small_config(tmp_path)
        rows = sweep_tau(cfg, pipeline)
        assert len(rows) == 2 * len(cfg.tau_grid)
        with open(tmp_path / "sweep_tau.csv") as fh:
            parsed = list(csv.DictReader(fh))
        assert len(parsed) == len(rows)
        assert set(r["cost_setting"] for r in parsed) == {"low", "high"}
        # per-seed artifact reproduces the aggregate
        artifacts = json.loads((tmp_path / "sweep_tau_per_seed.json").read_text())
        first = artifacts[0]
        assert np.mean([r["cvar"] for r in first["per_seed"]]) == pytest.approx(
            float(parsed[0]["mean_cvar"]), rel=1e-5
        )

    def test_sweep_tau_low_curve_below_high(self, default_config, pipeline, tmp_path):
        cfg = small_config(tmp_path)
        rows = sweep_tau(cfg, pipeline)
        by_setting = {}
        for row in rows:
            by_setting.setdefault(row["cost_setting"], {})[row["tau"]] = row["mean_cvar"]
        for tau in cfg.tau_grid:
            assert by_setting["low"][tau] <= by_setting["high"][tau] + 1e-6

    def test_empty_tau_grid(self, tmp_path, pipeline):
        cfg = small_config(tmp_path, tau_grid=())
        with pytest.raises(HarnessError, match=r"\[sweep-tau\]"):
            sweep_tau(cfg, pipeline)

    def test_sweep_cost_means_empty_grid(self, tmp_path, pipeline):
        cfg = small_config(tmp_path)
        with pytest.raises(HarnessError, match=r"\[sweep-cost\]"):
            sweep_cost_means(cfg, pipeline, mu_grid=())

    def test_table2_grid_shape(self, default_config, pipeline, tmp_path):
        cfg = small_config(tmp_path)
        rows = table2(cfg, pipeline)
        assert len(rows) == 2 * 3 * 3
        kinds = {r["kind"] for r in rows}
        assert kinds == {"nominal", "polyhedral", "box"}

    def test_thread_count_does_not_change_output(self, default_config, pipeline, tmp_path):
        cfg1 = small_config(tmp_path / "t1", threads=1)
        cfg4 = small_config(tmp_path / "t4", threads=4)
        sweep_tau(cfg1, pipeline)
        sweep_tau(cfg4, pipeline)
        assert (tmp_path / "t1" / "sweep_tau.csv").read_bytes() == (
            tmp_path / "t4" / "sweep_tau.csv"
        ).read_bytes()


class TestInterpretabilityCurves:
    def test_rows_and_endpoint(self, tmp_path):
        cfg = small_config(tmp_path, theta_grid=(0.0, 0.5, 1.0))
        rows = interpretability_curves(cfg)
        assert len(rows) == 5 * len(cfg.c_h_grid) * 3
        at_zero = {r["risk_exposure"] for r in rows if r["theta"] == 0.0}
        assert at_zero == {cfg.c_ml}
        # all shapes coincide at theta = 1 for a fixed c_h
        for c_h in cfg.c_h_grid:
            ends = {
                round(r["risk_exposure"], 6)
                for r in rows
                if r["theta"] == 1.0 and r["c_h"] == c_h
            }
            assert len(ends) == 1


class TestGeneralizabilityCurve:
    def test_rows_written(self, default_config, pipeline, tmp_path):
        cfg = small_config(tmp_path, tau_grid=(0.3, 0.5), seeds=(0, 1))
        rows = generalizability_curve(cfg, pipeline)
        assert [r["psi"] for r in rows] == [0.0, 1.0]
        assert os.path.exists(tmp_path / "generalizability.csv")
        artifacts = json.loads(
            (tmp_path / "generalizability_per_seed.json").read_text()
        )
        assert len(artifacts[0]["per_seed"]) == 2


class TestCli:
    def test_fetch_prints_urls(self, capsys):
        assert main(["fetch"]) == 0
        out = capsys.readouterr().out
        assert "original-699" in out and "archive.ics.uci.edu" in out

    def test_interpret_subcommand(self, tmp_path, capsys):
        code = main(["interpret", "--out", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "interpretability.csv").exists()

    def test_bad_config_exits_nonzero(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"no_such_knob": 1}')
        code = main(["interpret", "--config", str(cfg), "--out", str(tmp_path)])
        assert code == 1
        assert "[config]" in capsys.readouterr().err

    def test_bad_seeds_flag(self, tmp_path, capsys):
        code = main(["interpret", "--seeds", "a,b", "--out", str(tmp_path)])
        assert code == 1
        assert "[config]" in capsys.readouterr().err

    def test_price_subcommand_smoke(self, tmp_path, capsys):
        # tiny scenario count via config file keeps this fast; the pipeline
        # still trains the real classifier once
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {"n_scenarios": 50, "seeds": [0], "output_dir": str(tmp_path)}
            )
        )
        code = main(["price", "--config", str(cfg), "--tau", "0.3"])
        assert code == 0
        printed = json.loads(capsys.readouterr().out)
        assert printed["kind"] == "nominal"
        assert (tmp_path / "run_price.json").exists()
