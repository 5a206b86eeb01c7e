"""Run configuration, subcommands and exit codes of the command-line application."""

import json

import pandas as pd
import pytest

from cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, Application, build_parser, from_dict, load_run_config, run
from errors import ConfigError

TINY_SYNTHETIC = {"n_assets": 8, "n_periods": 60, "n_relevant": 2, "beta_magnitude": 1.0}
LEAD_LAG = {"scenario": "lead_lag", "params": {"n_leaders": 4, "max_k_in": 2, "followers_per_k": 1,
                                                "n_periods": 45, "signal": 1.0, "noise_base": 0.2}}


def write_config(tmp_path, config, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


def invoke(tmp_path, command, config, *flags, out="out"):
    return run([command, "--config", write_config(tmp_path, config), "--out", str(tmp_path / out), *flags])


# --- configuration ---

def test_defaults_without_a_file():
    config = load_run_config(None)
    assert config.seed == 0
    assert config.workers == 1
    assert config.selection.q == 0.2


@pytest.mark.parametrize("raw", [
    {"colour": "blue"},
    {"selection": {"fdr": 0.1}},
    {"selection": {"q": "low"}},
    {"selection": {"trials": 50.5}},
    {"window": {"drop_incomplete": 1}},
    {"window": {"length": True}},
    {"backtest": "yes"},
    {"out": 3},
])
def test_invalid_config_is_rejected(raw):
    with pytest.raises(ConfigError):
        from_dict(raw)


def test_integers_are_accepted_as_floats():
    config = from_dict({"selection": {"q": 0}, "backtest": {"target_return": 1}})
    assert isinstance(config.selection.q, float)
    assert config.backtest.target_return == 1.0


@pytest.mark.parametrize("raw", [{"seed": -1}, {"seed": 2 ** 64}, {"workers": 0},
                                 {"data": {"panel": "does/not/exist.csv"}},
                                 {"synthetic": {"seed": -3}},
                                 {"selection": {"q": 1.0}}, {"selection": {"q_grid": []}},
                                 {"selection": {"q_grid": [0.2, 1.5]}}, {"network": {"q": 0.0}},
                                 {"backtest": {"q": 2}}])
def test_invalid_run_settings(raw):
    with pytest.raises(ConfigError):
        from_dict(raw).validate()


def test_flags_override_the_config_file(tmp_path):
    path = write_config(tmp_path, {"seed": 5, "workers": 2, "out": "from_file"})
    args = build_parser().parse_args(["synth", "--config", path, "--seed", "7"])
    config = Application(args).resolve()
    assert config.seed == 7
    assert config.workers == 2
    assert config.out == "from_file"


# --- exit codes ---

def test_malformed_json_exits_with_config_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{\"seed\": ")
    assert run(["synth", "--config", str(path), "--out", str(tmp_path / "out")]) == EXIT_CONFIG


def test_unknown_key_exits_with_config_error(tmp_path):
    assert invoke(tmp_path, "synth", {"sed": 1}) == EXIT_CONFIG


def test_bad_parameter_value_exits_with_config_error(tmp_path):
    assert invoke(tmp_path, "synth", {"synth": {"scenario": "lead_lag", "params": {"max_k_in": 0}}}) == EXIT_CONFIG
    assert invoke(tmp_path, "synth", {"synth": {"scenario": "random_walk"}}) == EXIT_CONFIG
    assert invoke(tmp_path, "calibrate", {"selection": {"trials": 10}}) == EXIT_CONFIG


def test_malformed_panel_exits_with_data_error(tmp_path):
    panel = tmp_path / "panel.csv"
    panel.write_text("date,A,B\n2020-01-01,0.1,0.2\n2020-01-02,0.1,abc\n")
    assert invoke(tmp_path, "network", {"data": {"panel": str(panel)}}) == EXIT_DATA


def test_short_panel_exits_with_data_error(tmp_path):
    panel = tmp_path / "panel.csv"
    panel.write_text("date,A,B\n2020-01-01,0.1,0.2\n2020-01-02,0.3,-0.1\n")
    assert invoke(tmp_path, "backtest", {"data": {"panel": str(panel)}}) == EXIT_DATA


# --- subcommands ---

def test_synth_writes_panel_and_truth(tmp_path):
    assert invoke(tmp_path, "synth", {"synth": LEAD_LAG}, "--seed", "3") == EXIT_OK
    out = tmp_path / "out"
    panel = pd.read_csv(out / "panel.csv")
    assert len(panel) == 45
    truth = json.loads((out / "truth.json").read_text())
    assert all(len(p) in (1, 2) for p in truth["predictors"].values())
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "synth"
    assert manifest["seed"] == 3
    assert "numpy" in manifest["versions"]


def test_synth_sector_fund_writes_sectors(tmp_path):
    config = {"synth": {"scenario": "sector_fund",
                        "params": {"n_sectors": 2, "assets_per_sector": 4, "n_holdings": 2, "n_periods": 30}}}
    assert invoke(tmp_path, "synth", config) == EXIT_OK
    sectors = pd.read_csv(tmp_path / "out" / "sectors.csv")
    assert list(sectors.columns) == ["asset", "sector"]
    assert set(sectors["sector"]) == {"S0", "S1"}


def calibration_config():
    return {"synthetic": TINY_SYNTHETIC,
            "selection": {"method": "lasso_path", "q_grid": [0.2, 0.5], "trials": 50}, "seed": 11}


def test_calibration_is_reproducible(tmp_path):
    assert invoke(tmp_path, "calibrate", calibration_config(), out="first") == EXIT_OK
    assert invoke(tmp_path, "calibrate", calibration_config(), out="second") == EXIT_OK
    first = (tmp_path / "first" / "calibration.csv").read_bytes()
    assert first == (tmp_path / "second" / "calibration.csv").read_bytes()
    summary = pd.read_csv(tmp_path / "first" / "calibration_summary.csv")
    assert list(summary["q"]) == [0.2, 0.5]


def test_manifest_replays_the_run(tmp_path):
    assert invoke(tmp_path, "calibrate", calibration_config(), out="first") == EXIT_OK
    manifest = str(tmp_path / "first" / "manifest.json")
    assert run(["calibrate", "--config", manifest, "--out", str(tmp_path / "replay")]) == EXIT_OK
    assert ((tmp_path / "first" / "calibration.csv").read_bytes()
            == (tmp_path / "replay" / "calibration.csv").read_bytes())


def test_different_seed_changes_the_calibration(tmp_path):
    assert invoke(tmp_path, "calibrate", calibration_config(), out="first") == EXIT_OK
    assert invoke(tmp_path, "calibrate", calibration_config(), "--seed", "12", out="second") == EXIT_OK
    assert ((tmp_path / "first" / "calibration.csv").read_bytes()
            != (tmp_path / "second" / "calibration.csv").read_bytes())


def test_calibration_level_outside_unit_interval_exits_with_config_error(tmp_path):
    config = calibration_config()
    config["selection"]["q_grid"] = [0.2, 1.5]
    assert invoke(tmp_path, "calibrate", config) == EXIT_CONFIG
    assert not (tmp_path / "out" / "calibration.csv").exists()


def test_synthetic_seed_overrides_the_run_seed(tmp_path):
    seeded = calibration_config()
    seeded["synthetic"] = {**TINY_SYNTHETIC, "seed": 11}
    seeded["seed"] = 99
    assert from_dict(seeded).synthetic.seed == 11
    assert invoke(tmp_path, "calibrate", seeded, out="seeded") == EXIT_OK
    assert invoke(tmp_path, "calibrate", calibration_config(), out="plain") == EXIT_OK
    assert ((tmp_path / "seeded" / "calibration.csv").read_bytes()
            == (tmp_path / "plain" / "calibration.csv").read_bytes())
    manifest = json.loads((tmp_path / "seeded" / "manifest.json").read_text())
    assert manifest["config"]["synthetic"]["seed"] == 11


def test_outputs_do_not_depend_on_the_worker_count(tmp_path):
    calibration = calibration_config()
    metrics_config = {"synthetic": {**TINY_SYNTHETIC, "n_periods": 80}, "window": {"length": 40, "step": 20},
                      "network": {"method": "lasso_path", "q": 0.5, "null_samples": 5}, "seed": 3}
    for workers in ("1", "8"):
        assert invoke(tmp_path, "calibrate", calibration, "--workers", workers, out=f"cal{workers}") == EXIT_OK
        assert invoke(tmp_path, "metrics", metrics_config, "--workers", workers, out=f"met{workers}") == EXIT_OK
    assert ((tmp_path / "cal1" / "calibration.csv").read_bytes()
            == (tmp_path / "cal8" / "calibration.csv").read_bytes())
    for name in ("edges.csv", "metrics.csv"):
        assert (tmp_path / "met1" / name).read_bytes() == (tmp_path / "met8" / name).read_bytes()


def test_network_and_metrics_commands(tmp_path):
    config = {"synthetic": {**TINY_SYNTHETIC, "n_periods": 80}, "window": {"length": 40, "step": 20},
              "network": {"method": "lasso_path", "q": 0.5, "null_samples": 5}}
    assert invoke(tmp_path, "network", config, out="network") == EXIT_OK
    edges = pd.read_csv(tmp_path / "network" / "edges.csv")
    assert list(edges.columns) == ["window_end", "source", "target"]

    assert invoke(tmp_path, "metrics", config, out="metrics") == EXIT_OK
    metrics = pd.read_csv(tmp_path / "metrics" / "metrics.csv")
    assert len(metrics) == 3
    assert {"window_end", "density", "reciprocity", "assortativity", "degree_pearson"} <= set(metrics.columns)


def test_replicate_command(tmp_path):
    config = {"synth": {"scenario": "sector_fund",
                        "params": {"n_sectors": 2, "assets_per_sector": 5, "n_holdings": 3, "n_periods": 80}},
              "window": {"length": 60, "step": 20},
              "selection": {"method": "lasso_path", "q": 0.5, "q_grid": [0.3, 0.5],
                            "subset_size": 8, "n_bootstraps": 4}}
    assert invoke(tmp_path, "replicate", config) == EXIT_OK
    table = pd.read_csv(tmp_path / "out" / "replication.csv")
    assert list(table.columns) == ["window_end", "asset", "frequency"]
    assert table["frequency"].between(0, 1).all()
    assert "FUND" not in set(table["asset"])
    fdr = pd.read_csv(tmp_path / "out" / "replication_fdr.csv")
    assert list(fdr.columns) == ["q", "window_end", "realized_fdr", "selections"]
    assert sorted(set(fdr["q"])) == [0.3, 0.5]
    assert fdr["realized_fdr"].between(0, 1).all()
    assert len(fdr) == 2 * table["window_end"].nunique()
    summary = pd.read_csv(tmp_path / "out" / "replication_summary.csv")
    assert list(summary["q"]) == [0.3, 0.5]


def test_replication_fdr_at_the_chosen_level_matches_the_frequency_table(tmp_path):
    config = {"synth": {"scenario": "sector_fund",
                        "params": {"n_sectors": 2, "assets_per_sector": 5, "n_holdings": 3, "n_periods": 80}},
              "window": {"length": 60, "step": 20},
              "selection": {"method": "lasso_path", "q": 0.4, "q_grid": [0.2],
                            "subset_size": 8, "n_bootstraps": 4}}
    assert invoke(tmp_path, "replicate", config) == EXIT_OK
    fdr = pd.read_csv(tmp_path / "out" / "replication_fdr.csv")
    assert sorted(set(fdr["q"])) == [0.2, 0.4]
    table = pd.read_csv(tmp_path / "out" / "replication.csv")
    chosen = fdr[fdr["q"] == 0.4]
    totals = (table.groupby("window_end")["frequency"].sum() * 4).round().astype(int)
    assert list(chosen["selections"]) == list(totals.sort_index())


def test_replicate_needs_a_target_column(tmp_path):
    config = {"data": {"target": "NOPE"}, "synthetic": TINY_SYNTHETIC}
    assert invoke(tmp_path, "replicate", config) == EXIT_CONFIG


def test_backtest_command(tmp_path):
    config = {"synth": LEAD_LAG,
              "backtest": {"t_in": 30, "horizon": 2, "q": 0.5, "n_runs": 1, "method": "lasso_path"}}
    assert invoke(tmp_path, "backtest", config) == EXIT_OK
    out = tmp_path / "out"
    summary = pd.read_csv(out / "summary.csv")
    assert list(summary["strategy"]) == ["long_short", "long_only", "mean_variance_knockoff_prediction",
                                         "mean_variance_historical_mean"]
    assert (summary["n_days"] == 14).all()
    ledger = pd.read_csv(out / "ledger.csv")
    assert list(ledger.columns) == ["date", "strategy", "asset", "weight", "predicted_return", "realized_return"]
    metadata = json.loads((out / "backtest_metadata.json").read_text())
    assert "transaction costs are not included" in metadata["caveat"]
    assert set(metadata["fallback_dates"]) == {"mean_variance_knockoff_prediction",
                                               "mean_variance_historical_mean"}


def test_backtest_rejects_refit_beyond_horizon(tmp_path):
    config = {"synth": LEAD_LAG, "backtest": {"horizon": 2, "refit_every": 3}}
    assert invoke(tmp_path, "backtest", config) == EXIT_CONFIG
