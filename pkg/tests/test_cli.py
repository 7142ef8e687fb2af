import json
import math
from pathlib import Path

import pytest
from click.testing import CliRunner

from hyplab.cli import SCHEMAS, ConfigError, main, parse


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, args):
    return runner.invoke(main, args, catch_exceptions=False)


def test_space_info(runner):
    res = invoke(runner, ["space", "info", "--factors", "3,3"])
    assert res.exit_code == 0
    payload = json.loads(res.output)
    assert payload["results"]["dim"] == 6
    assert payload["results"]["rank"] == 2
    assert payload["results"]["pseudo_dim"] == 6
    assert payload["results"]["weyl_order"] == 4
    assert payload["results"]["rho_norm"] == pytest.approx(math.sqrt(2))


def test_parse_defaults_and_schema():
    cfg = parse("space_info", {"factors": "3"}, {"factors"}, None)
    assert cfg.values["seed"] == 0
    assert cfg.values["format"] == "json"
    with pytest.raises(ConfigError):
        parse("bogus_command", {}, set(), None)


def test_parse_unknown_config_key(tmp_path):
    bad = tmp_path / "cfg.txt"
    bad.write_text("nope=1\n")
    with pytest.raises(ConfigError, match="unknown key"):
        parse("space_info", {}, set(), str(bad))


def test_parse_type_mismatch(tmp_path):
    bad = tmp_path / "cfg.txt"
    bad.write_text("seed=abc\n")
    with pytest.raises(ConfigError, match="bad value"):
        parse("space_info", {}, set(), str(bad))


def test_config_file_flag_precedence(runner, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"b": 4.0, "m": 1.0, "T": 2.0}))
    res = invoke(runner, ["wave", "linear", "--config", str(cfg), "--b", "2.0"])
    assert res.exit_code == 0
    payload = json.loads(res.output)
    assert payload["config"]["b"] == 2.0  # flag wins
    assert payload["config"]["m"] == 1.0  # config wins over default
    assert payload["config"]["T"] == 2.0


def test_missing_required_flag_names_it(runner):
    res = invoke(runner, ["kernel", "table"])
    assert res.exit_code == 2
    assert "--sigma" in res.output


def test_inadmissible_exit_code_and_reasons(runner):
    res = invoke(
        runner,
        ["ineq", "run", "--kind", "steinweiss", "--params", "sigma=1,p=2,q=6,alpha=0.1,beta=-0.2"],
    )
    assert res.exit_code == 2
    payload = json.loads(res.output)
    assert not payload["results"]["admissible"]["admissible"]
    assert "alpha + beta >= 0" in payload["results"]["admissible"]["reasons"]


def test_admissible_ineq_run(runner):
    res = invoke(
        runner,
        ["ineq", "run", "--kind", "sobolev", "--params", "sigma=1,p=2,q=6",
         "--count", "4", "--budget", "12", "--n-radial", "512", "--n-spectral", "256",
         "--lam-max", "24", "--no-optimize"],
    )
    assert res.exit_code == 0
    payload = json.loads(res.output)
    assert payload["results"]["ratio_report"]["max_ratio"] > 0


def test_hardy_check_cli(runner):
    res = invoke(runner, ["hardy", "check", "--p", "2", "--q", "2", "--u-pow", "-0.5",
                          "--trials", "10", "--seed", "7"])
    assert res.exit_code == 0
    payload = json.loads(res.output)
    assert payload["results"]["inequality_test"]["violations"] == 0
    assert payload["results"]["conditions"]["bracket_ok"]


def test_wave_linear_csv_columns(runner, tmp_path):
    out = tmp_path / "traj.csv"
    res = invoke(runner, ["wave", "linear", "--t", "3", "--format", "csv", "--out", str(out)])
    assert res.exit_code == 0
    lines = out.read_text().splitlines()
    header = [ln for ln in lines if not ln.startswith("#")][0]
    assert header == "t,l2,h1,l2_ut,zweighted"
    assert any(ln.startswith("# command=wave_linear") for ln in lines)
    assert any(ln.startswith("# version=") for ln in lines)


def test_seeded_runs_byte_identical(runner, tmp_path):
    # identical config + seed: byte-identical artifacts (no timestamps emitted)
    args = ["hardy", "check", "--p", "2", "--q", "2.5", "--u-pow", "-0.5",
            "--trials", "12", "--seed", "123", "--out", str(tmp_path / "r.json")]
    invoke(runner, args)
    first = (tmp_path / "r.json").read_bytes()
    invoke(runner, args)
    second = (tmp_path / "r.json").read_bytes()
    assert first == second


def test_plot_artifact(runner, tmp_path):
    out = tmp_path / "traj.csv"
    res = invoke(runner, ["wave", "linear", "--t", "2", "--format", "csv",
                          "--out", str(out), "--plot"])
    assert res.exit_code == 0
    assert (tmp_path / "traj.png").exists()


def test_transform_roundtrip_cli(runner):
    res = invoke(runner, ["transform", "roundtrip", "--n-radial", "1024",
                          "--n-spectral", "512", "--lam-max", "32"])
    assert res.exit_code == 0
    payload = json.loads(res.output)
    worst = max(row["roundtrip_rel_err"] for row in payload["results"]["suite"])
    assert worst < 1e-6


def test_kernel_asym_cli(runner):
    res = invoke(runner, ["kernel", "asym", "--sigma", "1"])
    assert res.exit_code == 0
    payload = json.loads(res.output)
    assert payload["results"]["small_r_exponent_fit"] == pytest.approx(-2.0, abs=0.05)


def test_spherical_eval_cli(runner):
    res = invoke(runner, ["spherical", "eval", "--lam", "1.0", "--r", "2.0"])
    payload = json.loads(res.output)
    row = payload["results"]["rows"][0]
    assert row["phi_lam"] == pytest.approx(math.sin(2.0) / math.sinh(2.0), rel=1e-12)


def test_wave_semilinear_cli(runner):
    res = invoke(runner, ["wave", "semilinear", "--p", "2", "--eps", "1e-2", "--t", "2"])
    assert res.exit_code == 0
    payload = json.loads(res.output)
    assert payload["results"]["max_contraction_factor"] < 1.0


def test_all_schemas_have_common_keys():
    for command, schema in SCHEMAS.items():
        for key in ("factors", "seed", "out", "format", "plot"):
            assert key in schema, (command, key)
