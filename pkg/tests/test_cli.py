import json
import math

import pytest
from click.testing import CliRunner

from bdtlattice.cli import main, parse_grid
from bdtlattice.errors import CsvParseError, InsufficientDataError, UnattainablePriceError
from bdtlattice.inversion import CSV_COLUMNS

from conftest import CURVE_PATH, write_series_csv

PAPER_LATTICE = ["--r0", "0.0377", "--c1", "1.0236", "--c2", "1.0464"]
PER_STEP = ["--mu-per-step", "8.0037e-4", "--sigma-per-step", "0.0126", "--p", "0.4821"]


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args], catch_exceptions=False)


def test_estimate_constant_prices(tmp_path):
    path = write_series_csv(tmp_path / "flat.csv", [100.0] * 10, header=("date", "Close"))
    result = run("estimate", "--input", path, "--format", "json")
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert (report["mean_per_step"], report["std_per_step"], report["p_up"]) == (0.0, 0.0, 0.0)
    assert report["source_column"] == "Close"


def test_estimate_prefers_adjusted_close(spy_csv):
    report = json.loads(run("estimate", "--input", spy_csv, "--format", "json").output)
    assert report["source_column"] == "Adj Close"
    assert report["n_obs"] == 252
    assert report["mu"] == pytest.approx(report["mean_per_step"] * 252)


def test_missing_file_names_path(tmp_path):
    missing = tmp_path / "nope.csv"
    result = CliRunner().invoke(main, ["estimate", "--input", str(missing)])
    assert result.exit_code != 0
    assert "nope.csv" in result.output


def test_domain_errors_have_distinct_exit_codes(tmp_path):
    one_row = tmp_path / "one.csv"
    one_row.write_text("date,value\n2023-06-16,0.0377\n")
    result = CliRunner().invoke(main, ["estimate", "--input", str(one_row), "--kind", "rate"])
    assert result.exit_code == InsufficientDataError.exit_code
    broken = tmp_path / "broken.csv"
    broken.write_text("date,value\n2023-06-15,1,2\n")
    result = CliRunner().invoke(main, ["estimate", "--input", str(broken)])
    assert result.exit_code == CsvParseError.exit_code
    assert InsufficientDataError.exit_code != CsvParseError.exit_code


def test_calibrate(rate_csv):
    report = json.loads(run("calibrate", "--input", rate_csv, "--format", "json").output)
    assert report["c1"] > 0 and report["c2"] > report["c1"]
    assert 1 / report["c1"] == pytest.approx(report["down_factor"])
    lines = run("calibrate", "--input", rate_csv, "--r0", "0.0377").output.splitlines()
    assert lines[0].startswith("r0,c1,c2,")
    assert lines[1].startswith("0.0377,")


def test_fit_writes_paired_series_and_script(rate_csv, tmp_path):
    out = tmp_path / "fit.csv"
    script = tmp_path / "plot_fit.py"
    result = run("fit", "--input", rate_csv, "--out", out, "--plot-script", script)
    assert result.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "date_or_step,market,model"
    assert len(lines) == 254
    _, market, model = lines[1].split(",")
    assert float(market) == float(model)
    compile(script.read_text(), str(script), "exec")


def test_price_one_step():
    result = run("price", *PAPER_LATTICE, *PER_STEP, "--steps", 1, "--format", "json")
    report = json.loads(result.output)
    assert report["price"] == pytest.approx(0.9998504, abs=1e-7)


def test_price_constant_ptilde_and_maturity():
    report = json.loads(run("price", *PAPER_LATTICE, "--maturity", "1", "--ptilde", "0.5",
                            "--format", "json").output)
    assert report["maturity_steps"] == 252
    assert 0 < report["price"] < 1


def test_price_clamp_policy():
    args = ["price", *PAPER_LATTICE, *PER_STEP, "--baseline-units", "annualized",
            "--steps", 2000, "--format", "json"]
    failing = CliRunner().invoke(main, args)
    assert failing.exit_code == 33
    report = json.loads(run(*args, "--ptilde-policy", "clamp").output)
    assert report["clamped_nodes"] > 0


def test_price_needs_one_maturity():
    result = CliRunner().invoke(main, ["price", *PAPER_LATTICE, "--ptilde", "0.5"])
    assert result.exit_code == 2


def test_imply_csv_and_json(tmp_path):
    out = tmp_path / "implied.csv"
    script = tmp_path / "plot.py"
    result = run("imply", *PAPER_LATTICE, *PER_STEP, "--baseline-units", "per-step",
                 "--yield-curve", CURVE_PATH, "--grid", "2/12,1,5", "--out", out,
                 "--plot-script", script, "--workers", 2)
    assert result.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert [float(l.split(",")[0]) for l in lines[1:]] == pytest.approx([2 / 12, 1, 5])
    assert "implied_sigma" in script.read_text()
    records = json.loads(run("imply", *PAPER_LATTICE, *PER_STEP, "--yield-curve", CURVE_PATH,
                             "--grid", "1", "--format", "json").output)
    assert records[0]["n_steps"] == 252


def test_imply_from_csv_inputs(rate_csv, spy_csv):
    result = run("imply", "--input", rate_csv, "--equity", spy_csv, "--yield-curve", CURVE_PATH,
                 "--grid", "1:3:1")
    assert result.exit_code == 0
    assert len(result.output.splitlines()) == 4


def test_imply_rejects_node_theta():
    result = CliRunner().invoke(main, ["imply", *PAPER_LATTICE, *PER_STEP, "--yield-curve",
                                       str(CURVE_PATH), "--theta-rate", "node"])
    assert result.exit_code == 2


def test_simulate(tmp_path):
    out = tmp_path / "path.csv"
    run("simulate", *PAPER_LATTICE, "--steps", 20, "--p-up", "0.5", "--seed", 4, "--out", out)
    lines = out.read_text().splitlines()
    assert len(lines) == 22
    assert lines[1] == "0,,0.0377"


def test_unknown_flag_rejected():
    result = CliRunner().invoke(main, ["simulate", "--bogus"])
    assert result.exit_code == 2


@pytest.mark.parametrize("command", ["estimate", "calibrate", "fit", "price", "imply", "simulate"])
def test_help_lists_flags(command):
    text = CliRunner().invoke(main, [command, "--help"]).output
    for flag in ("--format", "--out", "--delta", "--percent"):
        assert flag in text


def test_config_precedence(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"r0": 0.05, "c1": 1.0, "c2": 1.0,
                                  "simulate": {"steps": 3, "p_up": 0.5}}))
    out = run("--config", config, "simulate", "--format", "json")
    rows = json.loads(out.output)
    assert len(rows) == 4 and rows[-1]["model"] == pytest.approx(0.05)
    out = run("--config", config, "simulate", "--r0", "0.07", "--format", "json")
    assert json.loads(out.output)[0]["model"] == 0.07


def test_inputs_not_mutated(rate_csv):
    before = rate_csv.read_bytes()
    run("fit", "--input", rate_csv)
    assert rate_csv.read_bytes() == before


@pytest.mark.parametrize("text, expected", [
    ("1:3:1", [1.0, 2.0, 3.0]),
    ("2/12,1,30", [2 / 12, 1.0, 30.0]),
    ("1/12:3/12:1/12", [1 / 12, 2 / 12, 3 / 12]),
])
def test_parse_grid(text, expected):
    assert parse_grid(text) == pytest.approx(expected)
