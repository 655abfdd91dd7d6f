import csv
import io
import json
import subprocess
import sys

import pytest

from geomruzsa.cli import CSV_COLUMNS, main, parse_eps_grid, UsageError

RUNS = {
    "axioms": ["axioms", "--fixture", "symmetric:3"],
    "ruzsa": ["ruzsa", "--fixture", "cyclic:6", "--A", "0,1", "--B", "0,3", "--C", "0,2"],
    "converge": ["converge", "--space", "euclid:2", "--e", "0,0", "--a", "1,0", "--b", "0,1",
                 "--eps", "0.5,0.25,0.125"],
    "inject": ["inject", "--space", "euclid:4", "--eps", "0.5,0.1", "--mu", "0.05",
               "--sizes", "5,5,5", "--seed", "1"],
    "threshold": ["threshold", "--space", "heis1", "--mu", "0.1", "--sizes", "8,8,8",
                  "--seed", "42", "--eps-grid", "geometric:0.5,6"],
}


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", RUNS)
def test_json_schema_and_determinism(name, capsys):
    code1, out1, _ = run_cli(RUNS[name], capsys)
    code2, out2, _ = run_cli(RUNS[name], capsys)
    assert code1 == code2 == 0
    assert out1 == out2
    rep = json.loads(out1)
    assert set(rep) == {"schema_version", "config", "results", "timing"}
    assert rep["schema_version"] == 1 and rep["timing"] is None
    assert rep["config"]["subcommand"] == name


@pytest.mark.parametrize("name", RUNS)
def test_csv_columns(name, capsys):
    code, out, _ = run_cli(RUNS[name] + ["--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == CSV_COLUMNS[name]
    assert len(rows) > 1 and all(len(r) == len(rows[0]) for r in rows)


def test_ruzsa_worked_example(capsys):
    _, out, _ = run_cli(RUNS["ruzsa"], capsys)
    trial, = json.loads(out)["results"]["trials"]
    assert (trial["lhs"], trial["rhs"], trial["holds"], trial["injective"]) == (8, 16, True, True)


def test_converge_csv_values(capsys):
    _, out, _ = run_cli(RUNS["converge"] + ["--format", "csv"], capsys)
    gaps = [float(r[2]) for r in list(csv.reader(io.StringIO(out)))[1:]]
    assert gaps == [0.5, 0.25, 0.125]


def test_relabeled_axiom_failure_is_a_finding_not_an_error(capsys):
    code, out, _ = run_cli(["axioms", "--fixture", "cyclic:6", "--relabel-seed", "3"], capsys)
    checks = {c["check"]: c["ok"] for c in json.loads(out)["results"]["checks"]}
    assert code == 0
    assert checks["weak1"] and checks["weak2"]


def test_random_trials(capsys):
    code, out, _ = run_cli(["ruzsa", "--fixture", "dihedral:4", "--random-trials", "500",
                            "--seed", "7"], capsys)
    agg = json.loads(out)["results"]["aggregate"]
    assert code == 0 and agg == {"trials": 500, "holds": 500, "injective": 500}


def test_sampled_mode(capsys):
    code, out, _ = run_cli(["axioms", "--fixture", "cyclic:5", "--mode", "sampled",
                            "--count", "100"], capsys)
    assert code == 0
    assert all(c["checked"] == 100 for c in json.loads(out)["results"]["checks"])


@pytest.mark.parametrize("argv", [
    ["axioms", "--fixture", "cyclic:0"],
    ["axioms", "--fixture", "nope:3"],
    ["ruzsa", "--fixture", "cyclic:6", "--A", "0,9", "--B", "0", "--C", "0"],
    ["ruzsa", "--fixture", "cyclic:6", "--A", "0"],
    ["converge", "--space", "euclid:2", "--a", "1,0", "--b", "0,1", "--eps", "0.1,0.5"],
    ["converge", "--space", "euclid:2", "--a", "1,0,0", "--b", "0,1", "--eps", "0.5"],
    ["converge", "--space", "sphere:2", "--a", "1,0", "--b", "0,1", "--eps", "0.5"],
    ["inject", "--space", "euclid:2", "--eps", "0.5", "--mu", "0.1", "--tolerance", "0.05",
     "--sizes", "3,3,3"],
    ["inject", "--space", "euclid:2", "--eps", "1.5", "--mu", "0.1", "--sizes", "3,3,3"],
    ["threshold", "--space", "heis1", "--mu", "-1", "--sizes", "3,3,3", "--eps-grid", "0.5"],
])
def test_usage_errors_exit_2(argv, capsys):
    code, out, err = run_cli(argv, capsys)
    assert code == 2 and out == "" and "error" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["axioms"])
    assert info.value.code == 2


def test_eps_grid_grammar():
    assert parse_eps_grid("geometric:0.5,3") == [0.5, 0.25, 0.125]
    assert parse_eps_grid("0.9,0.5") == [0.9, 0.5]
    for bad in ("geometric:2,3", "0.5,0.5", "geometric:0.5", "x"):
        with pytest.raises(UsageError):
            parse_eps_grid(bad)


def test_file_literals(tmp_path, capsys):
    (tmp_path / "A.txt").write_text("0\n1\n")
    pts = tmp_path / "B.txt"
    pts.write_text("# points\n0,0\n0.5,0.5\n")
    code, out, _ = run_cli(["ruzsa", "--fixture", "cyclic:6", "--A", f"@{tmp_path}/A.txt",
                            "--B", "0,3", "--C", "0,2"], capsys)
    assert code == 0 and json.loads(out)["results"]["trials"][0]["lhs"] == 8
    code, out, _ = run_cli(["inject", "--space", "euclid:2", "--eps", "0.5", "--mu", "0.2",
                            "--A", "0,0;1,0", "--B", f"@{pts}", "--C", "0,1"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["results"]["sets"]["B"] == [[0, 0], [0.5, 0.5]]
    assert rep["results"]["rows"][0]["injective"]
    code, _, err = run_cli(["ruzsa", "--fixture", "cyclic:6", "--A", "@/nonexistent",
                            "--B", "0", "--C", "0"], capsys)
    assert code == 2


def test_inject_reports_hypothesis_failure(capsys):
    code, out, _ = run_cli(["inject", "--space", "euclid:2", "--eps", "0.5", "--mu", "0.2",
                            "--A", "0,0", "--B", "0,0;0.1,0", "--C", "0,1"], capsys)
    row, = json.loads(out)["results"]["rows"]
    assert code == 0 and not row["hypothesis_ok"]
    assert row["failure"]["set"] == "B" and row["failure"]["pair"] == [0, 1]


def test_output_file_and_timing(tmp_path, capsys):
    target = tmp_path / "r.json"
    code = main(RUNS["axioms"] + ["-o", str(target), "--timing"])
    assert code == 0 and capsys.readouterr().out == ""
    assert json.loads(target.read_text())["timing"]["wall_seconds"] >= 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "geomruzsa", *RUNS["ruzsa"], "--format", "csv"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[1] == "0,8,16,True,True"
