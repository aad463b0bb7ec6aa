import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from dedchoice import (
    CSV_COLUMNS,
    DataFormatError,
    PopulationConfig,
    gen_population,
    read_households,
    read_json,
    simulate_choices,
    synthetic_truth,
    write_households,
    write_json,
)
from dedchoice.cli import main
from dedchoice.io import default_menu_json, load_menu, result_to_dict


@pytest.fixture(scope="module")
def sim_pop(truth):
    pop = gen_population(PopulationConfig(n=120, seed=41))
    return simulate_choices(pop, truth, "broad", seed=42)


def test_csv_roundtrip_lossless(tmp_path, cfg, sim_pop):
    path = tmp_path / "hh.csv"
    write_households(path, sim_pop, cfg)
    again = read_households(path, cfg)
    assert again == sorted(sim_pop, key=lambda h: h.id)
    write_households(tmp_path / "hh2.csv", again, cfg)
    assert (tmp_path / "hh.csv").read_text() == (tmp_path / "hh2.csv").read_text()


def test_csv_header_schema(tmp_path, cfg, sim_pop):
    path = tmp_path / "hh.csv"
    write_households(path, sim_pop, cfg)
    header = path.read_text().splitlines()[0]
    assert header == ",".join(CSV_COLUMNS)


def test_csv_errors_name_row_and_column(tmp_path, cfg):
    path = tmp_path / "bad.csv"
    path.write_text(
        ",".join(CSV_COLUMNS)
        + "\n1,187.0,117.0,0.08,xyz,500,500\n"
    )
    with pytest.raises(DataFormatError) as err:
        read_households(path, cfg)
    assert err.value.row == 2
    assert err.value.column == "claim_prob_comprehensive"
    assert "xyz" in str(err.value)


def test_csv_bad_header_and_deductible(tmp_path, cfg):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(DataFormatError):
        read_households(path, cfg)
    path.write_text(
        ",".join(CSV_COLUMNS) + "\n1,187.0,117.0,0.08,0.02,750,500\n"
    )
    with pytest.raises(DataFormatError) as err:
        read_households(path, cfg)
    assert "750" in str(err.value)


def test_csv_choice_all_or_nothing(tmp_path, cfg):
    path = tmp_path / "bad.csv"
    path.write_text(
        ",".join(CSV_COLUMNS) + "\n1,187.0,117.0,0.08,0.02,500,\n"
    )
    with pytest.raises(DataFormatError):
        read_households(path, cfg)
    # fully empty choice is allowed
    path.write_text(
        ",".join(CSV_COLUMNS) + "\n1,187.0,117.0,0.08,0.02,,\n"
    )
    (h,) = read_households(path, cfg)
    assert h.choice is None


def test_json_schema_version(tmp_path):
    path = tmp_path / "x.json"
    write_json(path, {"a": 1}, {"command": "test"})
    doc = read_json(path)
    assert doc["schema_version"] == 1
    assert doc["config"]["command"] == "test"
    raw = json.loads(path.read_text())
    raw["schema_version"] = 99
    path.write_text(json.dumps(raw))
    with pytest.raises(DataFormatError):
        read_json(path)


def test_menu_config_document(tmp_path, cfg):
    doc = default_menu_json()
    path = tmp_path / "menu.json"
    path.write_text(doc)
    again = load_menu(path)
    assert again.to_dict() == cfg.to_dict()
    path.write_text("{not json")
    with pytest.raises(DataFormatError):
        load_menu(path)


def test_cli_print_defaults():
    runner = CliRunner()
    res = runner.invoke(main, ["print-defaults"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert "menu" in doc and "collision" in doc["menu"]


def test_cli_simulate_fit_roundtrip(tmp_path):
    runner = CliRunner()
    hh = str(tmp_path / "hh.csv")
    truth_json = str(tmp_path / "truth.json")
    fit_json = str(tmp_path / "fit.json")
    res = runner.invoke(main, [
        "simulate", "--n", "400", "--seed", "3", "--out", hh,
        "--truth-out", truth_json,
    ])
    assert res.exit_code == 0, res.output
    res = runner.invoke(main, [
        "fit", "--data", hh, "--out", fit_json,
        "--multistart", "1", "--quad-nodes", "24", "--optimizer", "lbfgs",
    ])
    assert res.exit_code in (0, 2), res.output
    doc = json.load(open(fit_json))
    assert doc["schema_version"] == 1
    assert "alpha" in doc["estimates"]
    assert doc["config"]["multistart"] == 1


def test_cli_simulate_deterministic(tmp_path):
    runner = CliRunner()
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    for out in (a, b):
        res = runner.invoke(main, ["simulate", "--n", "200", "--seed", "5", "--out", out])
        assert res.exit_code == 0
    assert open(a).read() == open(b).read()


def test_cli_validation_exit_code(tmp_path):
    runner = CliRunner()
    bad = tmp_path / "bad.csv"
    bad.write_text(",".join(CSV_COLUMNS) + "\n1,187,117,0.08,oops,500,500\n")
    res = runner.invoke(main, [
        "fit", "--data", str(bad), "--out", str(tmp_path / "o.json"),
    ])
    assert res.exit_code == 1
    assert "claim_prob_comprehensive" in res.output


def test_cli_diagnose_table(tmp_path):
    runner = CliRunner()
    out = str(tmp_path / "diag.json")
    res = runner.invoke(main, ["diagnose", "--out", out])
    assert res.exit_code == 0, res.output
    assert "mic_branch" in res.output
    doc = json.load(open(out))
    assert "checks" in doc


def test_cli_report_outputs(tmp_path, cfg, sim_pop):
    hh = tmp_path / "hh.csv"
    write_households(hh, sim_pop, cfg)
    runner = CliRunner()
    out_dir = str(tmp_path / "rep")
    res = runner.invoke(main, [
        "report", "--data", str(hh), "--out-dir", out_dir,
        "--quad-nodes", "24", "--limit", "40",
    ])
    assert res.exit_code == 0, res.output
    for name in ("distortion_curves.csv", "nu_cdf.csv",
                 "bundle_shares.csv", "indifference_loci.csv", "report.json"):
        assert os.path.exists(os.path.join(out_dir, name))
    shares = open(os.path.join(out_dir, "bundle_shares.csv")).read().splitlines()
    assert shares[0].startswith("collision_deductible,comprehensive_deductible,model_share")
    assert len(shares) == 31


def test_cli_welfare(tmp_path, cfg, sim_pop):
    hh = tmp_path / "hh.csv"
    write_households(hh, sim_pop, cfg)
    runner = CliRunner()
    out = str(tmp_path / "welfare.json")
    res = runner.invoke(main, [
        "welfare", "--data", str(hh), "--out", out,
        "--limit", "10", "--quad-nodes", "24",
    ])
    assert res.exit_code == 0, res.output
    doc = json.load(open(out))
    assert doc["full_consideration_gain"]["mean"] > 0


def test_result_to_dict_roundtrip_fields(truth):
    from dedchoice.estimation import EstimationResult

    res = EstimationResult(
        params=truth, loglik=-12.5, converged=True, n_evals=10, n_floored=0,
        multistart_logliks=(-12.5,), intervals={"alpha": (0.4, 0.6)},
    )
    doc = result_to_dict(res)
    assert doc["estimates"]["alpha"] == pytest.approx(0.46)
    assert doc["intervals"]["alpha"] == [0.4, 0.6]
    assert doc["converged"] is True
