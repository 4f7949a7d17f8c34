from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np
import pytest

from src.cli.config import (
    DEFAULT_CONFIG,
    describe_defaults,
    experiment_config,
    load_config,
    parse_override,
    policy_spec,
)
from src.cli.quickdraw_cli import main, parse_floats, parse_ints
from src.core.errors import ConfigError
from src.harness.csv_io import read_table
from src.ope.events import SchemaMapping, save_schema
from src.ope.ingest import write_log
from src.ope.synth import synth_log

ROOT = Path(__file__).resolve().parents[1]

SMALL = ["--set", "field.K=20", "--set", "field.T=30", "--set", "experiment.warmup_rounds=5"]


@pytest.fixture(autouse=True)
def _restore_root_logger():
    # main() reconfigures the root logger
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


# --- config layer ---

def test_shipped_yaml_matches_embedded_defaults():
    assert load_config(ROOT / "config" / "quickdraw_default.yaml") == DEFAULT_CONFIG


def test_unknown_key_names_its_path(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("field:\n  rho_y: 0.1\n", encoding="utf-8")
    with pytest.raises(ConfigError, match=r"unknown key: rho_y \(at field.rho_y\)"):
        load_config(path)


def test_overrides_win_over_the_file(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("field:\n  K: 50\n  rho_t: .inf\n", encoding="utf-8")
    cfg = load_config(path, ["field.K=60"])
    assert cfg["field"]["K"] == 60
    assert math.isinf(cfg["field"]["rho_t"])


def test_values_are_coerced_to_their_defaults():
    cfg = load_config(None, ["policies.quickdraw.rho2=1e-6", "field.K=40.0", "policies.quickdraw.truncation=10"])
    assert cfg["policies"]["quickdraw"]["rho2"] == 1e-6
    assert isinstance(cfg["field"]["K"], int)
    assert cfg["policies"]["quickdraw"]["truncation"] == 10.0
    with pytest.raises(ConfigError, match="field.K"):
        load_config(None, ["field.K=2.5"])
    with pytest.raises(ConfigError):
        load_config(None, ["outputs.traces=maybe"])


@pytest.mark.parametrize("item", ["field.K", "=3", "field.K=[1,"])
def test_malformed_overrides(item):
    with pytest.raises(ConfigError):
        parse_override(item)


def test_named_policy_variant_starts_from_its_kind():
    cfg = load_config(None, ["policies.qd_short.kind=quickdraw", "policies.qd_short.ell_t=0.1"])
    spec = policy_spec(cfg, "qd_short")
    assert spec.kind == "quickdraw"
    assert spec.params["ell_t"] == 0.1
    assert spec.params["ell_x"] == 1.0
    assert spec.params["truncation"] is None


def test_variant_needs_a_known_kind():
    with pytest.raises(ConfigError):
        load_config(None, ["policies.foo.kind=thompson"])


def test_policy_block_keys_are_checked():
    with pytest.raises(ConfigError, match="unknown key: bogus"):
        load_config(None, ["policies.greedy.bogus=1"])
    with pytest.raises(ConfigError, match="unknown policy"):
        policy_spec(DEFAULT_CONFIG, "nope")


def test_experiment_config_from_defaults():
    exp = experiment_config(DEFAULT_CONFIG, ["quickdraw", "random"])
    assert exp.field.K == 1000 and exp.field.tau_s == 1e-3
    assert exp.warmup_rounds == 100 and exp.n_seeds == 20
    assert [p.name for p in exp.policies] == ["quickdraw", "random"]
    assert exp.out_dir == Path("results")


def test_describe_defaults_lists_every_key():
    text = describe_defaults()
    for line in ["field.rho_x = 0.1", "policies.quickdraw.rho2 = 1.0e-07", "ope.synthetic.K = 46",
                 "policies.sw_gp_ucb.grid.noises = [0.0001, 0.01]", "sweep.values = []"]:
        assert line in text


def test_value_list_parsing():
    assert parse_floats("0, 0.05,0.1", "--values") == [0.0, 0.05, 0.1]
    assert parse_ints("100,250", "--tmax") == [100, 250]
    for bad in ["", "a,b"]:
        with pytest.raises(ConfigError):
            parse_floats(bad, "--values")
    with pytest.raises(ConfigError):
        parse_ints("10,2.5", "--tmax")


# --- subcommands ---

def test_help_documents_config_keys(capsys):
    with pytest.raises(SystemExit) as err:
        main(["--help"])
    assert err.value.code == 0
    out = capsys.readouterr().out
    assert "experiment.warmup_rounds = 100" in out
    assert "ope.update_rule = all" in out


def test_simulate_minimal(tmp_path, capsys):
    code = main(["simulate", "--seeds", "1", "--policies", "random", "--out", str(tmp_path)] + SMALL)
    assert code == 0
    df = read_table(tmp_path / "ensemble.csv")
    assert list(df["policy"]) == ["random"]
    assert "[DONE]" in capsys.readouterr().out


def test_simulate_unknown_key_is_a_usage_error(capsys):
    assert main(["simulate", "--set", "field.rho_y=0.1"]) == 2
    assert "unknown key: rho_y" in capsys.readouterr().err


def test_simulate_is_byte_identical(tmp_path):
    args = ["simulate", "--seeds", "2", "--seed", "3", "--policies", "quickdraw,greedy,restless"] + SMALL
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "ensemble.csv").read_bytes() == (tmp_path / "b" / "ensemble.csv").read_bytes()


def test_invalid_field_is_a_usage_error():
    assert main(["simulate", "--seeds", "1", "--policies", "random", "--set", "field.sigma_noise=-1"] + SMALL) == 2


def test_rejected_log_exits_with_one(tmp_path, capsys):
    log = tmp_path / "log.csv"
    log.write_text("timestamp,action,reward,pscore,item_feature\n1,0,1,0.5,0\n2,1,0,0,1\n", encoding="utf-8")
    assert main(["ope", "--log", str(log), "--out", str(tmp_path)]) == 1
    assert "1 of 2 rows rejected" in capsys.readouterr().err


def test_sweep_writes_one_row_per_value_and_policy(tmp_path):
    code = main(["sweep", "--var", "alpha", "--values", "1,2", "--seeds", "1", "--policies", "random,greedy",
                 "--out", str(tmp_path)] + SMALL)
    assert code == 0
    assert len(read_table(tmp_path / "sweep.csv")) == 4


def test_sweep_needs_values():
    assert main(["sweep", "--var", "alpha", "--values", ""]) == 2
    assert main(["sweep", "--values", "1,2"]) == 2


def test_bench_shape(tmp_path):
    code = main(["bench", "--tmax", "10,20,30", "--set", "bench.K=10", "--out", str(tmp_path)])
    assert code == 0
    table = read_table(tmp_path / "bench.csv")
    assert len(table) == 6
    assert sorted(set(table["policy"])) == ["gp_full", "quickdraw"]


def test_ope_synthetic(tmp_path):
    overrides = ["--set", "ope.synthetic.K=5", "--set", "ope.synthetic.T=400", "--set", "ope.synthetic.n_groups=2",
                 "--set", "ope.synthetic.n_grid=20", "--set", "ope.synthetic.ctr_max=0.5", "--set", "ope.n_trials=2"]
    code = main(["ope", "--synthetic", "--policies", "random,quickdraw", "--out", str(tmp_path)] + overrides)
    assert code == 0
    summary = read_table(tmp_path / "ope_summary.csv")
    assert list(summary["policy"]) == ["random", "quickdraw"]

    synth = synth_log(K=5, T=400, seed=0, n_groups=2, n_grid=20, ctr_max=0.5, surface="bump")
    ctr = np.mean([e.reward for e in synth.events])
    trials = read_table(tmp_path / "ope_trials.csv")
    assert np.allclose(trials[trials["policy"] == "random"]["V_hat"], ctr, rtol=1e-12)


def test_ope_log_missing_column(tmp_path, capsys):
    log = tmp_path / "log.csv"
    log.write_text("timestamp,action,reward,pscore\n1,0,1,0.5\n", encoding="utf-8")
    assert main(["ope", "--log", str(log), "--out", str(tmp_path)]) == 2
    assert "item_feature" in capsys.readouterr().err


def test_ope_needs_a_log():
    assert main(["ope"]) == 2


def test_bad_subcommand_is_a_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["plot"])
    assert err.value.code == 2


def test_ope_log_with_schema_file(tmp_path):
    synth = synth_log(K=4, T=300, seed=1, n_groups=2, n_grid=10, ctr_max=0.5)
    schema = SchemaMapping(user_features=("group",))
    log = write_log(synth.events, tmp_path / "log.csv", schema)
    path = save_schema(schema, tmp_path / "schema.yaml")
    code = main(["ope", "--log", str(log), "--schema", str(path), "--policies", "random",
                 "--set", "ope.n_trials=1", "--out", str(tmp_path / "out")])
    assert code == 0
    v = read_table(tmp_path / "out" / "ope_trials.csv")["V_hat"].iloc[0]
    assert v == pytest.approx(np.mean([e.reward for e in synth.events]), rel=1e-12)


def test_missing_schema_file_is_a_usage_error(tmp_path):
    log = tmp_path / "log.csv"
    log.write_text("timestamp,action,reward,pscore,item_feature\n1,0,1,0.5,0\n", encoding="utf-8")
    assert main(["ope", "--log", str(log), "--schema", str(tmp_path / "nope.yaml")]) == 2
