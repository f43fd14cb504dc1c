from __future__ import annotations

import json
import subprocess
import sys

import pytest

from heavyball.cli import main


@pytest.fixture
def files(tmp_path):
    problem = tmp_path / "problem.json"
    problem.write_text(json.dumps({"eigenvalues": [1.0, 0.1], "sigma2": 1.0}))
    quiet = tmp_path / "quiet.json"
    quiet.write_text(json.dumps({"eigenvalues": [1.0, 0.1], "sigma2": 0.0}))
    schedule = tmp_path / "schedule.json"
    schedule.write_text(json.dumps({"kind": "step", "eta0": 0.5, "gamma": 0.5, "n": 2, "T": 40}))
    return {"problem": str(problem), "quiet": str(quiet), "schedule": str(schedule), "dir": tmp_path}


def test_exact_writes_csv(files):
    out = files["dir"] / "trace.csv"
    rc = main(["exact", "--problem", files["problem"], "--schedule", files["schedule"], "--beta", "0.5",
               "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "iteration,bias_risk,variance_risk,total_risk"
    assert len(lines) == 42


def test_exact_noiseless_variance_column(files, capsys):
    assert main(["exact", "--problem", files["quiet"], "--schedule", files["schedule"], "--stride", "10"]) == 0
    rows = capsys.readouterr().out.strip().split("\n")[1:]
    assert [r.split(",")[0] for r in rows] == ["0", "10", "20", "30", "40"]
    assert all(float(r.split(",")[2]) == 0.0 for r in rows)


def test_flag_overrides_file(files, capsys):
    assert main(["exact", "--problem", files["quiet"], "--schedule", files["schedule"], "--T", "7"]) == 0
    assert capsys.readouterr().out.strip().split("\n")[-1].startswith("7,")


def test_w0_flag(files, capsys):
    assert main(["exact", "--problem", files["quiet"], "--schedule", files["schedule"], "--w0", "0,0"]) == 0
    rows = capsys.readouterr().out.strip().split("\n")[1:]
    assert all(float(r.split(",")[3]) == 0.0 for r in rows)
    assert main(["exact", "--problem", files["quiet"], "--schedule", files["schedule"], "--w0", "1,2,3"]) == 2


def test_missing_file_exit_code(files, capsys):
    rc = main(["exact", "--problem", str(files["dir"] / "nope.json"), "--schedule", files["schedule"]])
    assert rc == 2
    assert "nope.json" in capsys.readouterr().err


@pytest.mark.parametrize("content", ["{not json", json.dumps({"eigenvalues": [1.0, 2.0]}),
                                     json.dumps({"eigenvalues": [1.0], "extra": 1})])
def test_bad_problem_file(files, content):
    bad = files["dir"] / "bad.json"
    bad.write_text(content)
    assert main(["exact", "--problem", str(bad), "--schedule", files["schedule"]]) == 2


def test_bad_schedule_file(files):
    bad = files["dir"] / "bad_schedule.json"
    bad.write_text(json.dumps({"kind": "cosine", "T": 10}))
    assert main(["exact", "--problem", files["problem"], "--schedule", str(bad)]) == 2


def test_unknown_flag_is_usage_error(files):
    with pytest.raises(SystemExit) as exc:
        main(["exact", "--problem", files["problem"], "--schedule", files["schedule"], "--bogus"])
    assert exc.value.code == 2


def test_bad_beta(files):
    assert main(["exact", "--problem", files["problem"], "--schedule", files["schedule"], "--beta", "1.5"]) == 2


def test_simulate(files, capsys):
    args = ["simulate", "--problem", files["problem"], "--schedule", files["schedule"], "--trials", "50",
            "--stride", "20", "--seed", "9"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert first.split("\n")[0] == "checkpoint,mean,se,n"
    assert [r.split(",")[0] for r in first.strip().split("\n")[1:]] == ["0", "20", "40"]
    assert main(args + ["--threads", "3"]) == 0
    assert capsys.readouterr().out == first


def test_verify_single_and_all(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["verify", "aux_inequalities", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["status"] == "pass"
    assert main(["verify", "all", "--trials", "200"]) == 0
    reports = json.loads(capsys.readouterr().out)
    assert len(reports) == 8 and all(r["status"] == "pass" for r in reports)


def test_verify_unknown_check(capsys):
    assert main(["verify", "nonsense"]) == 2
    err = capsys.readouterr().err
    assert "power_norm" in err and "theorem2" in err


def test_verify_perturbed_constant_fails_with_witness(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "power_norm", "--lemma-constant", "0.5", "--trials", "100", "--out", str(out)]) == 1
    report = json.loads(out.read_text())
    assert report["status"] == "fail" and report["worst_witness"]["lhs"] > report["worst_witness"]["rhs"]


def test_verify_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["verify", "combined_bound", "--seed", "4", "--trials", "50", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_theorem_commands(capsys):
    assert main(["theorem1", "--T", "8", "32"]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "pass"
    assert main(["theorem2"]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "pass"
    assert main(["theorem2", "--T", "1000"]) == 2
    assert main(["theorem1", "--kappa", "3"]) == 2


def test_report(capsys):
    assert main(["report", "--T", "100"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["feasible"] is False and "req_var_T" in rep["violated"] and rep["bounds"] is None
    assert main(["report"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["feasible"] and rep["T"] == rep["min_feasible_T"] and rep["bounds"]["variance_bound"] > 0
    assert main(["report", "--C", "1"]) == 2


def test_race(capsys):
    assert main(["race", "--kappa", "4", "100"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "kappa,t_sgd,t_shb,ratio"
    assert all(float(l.split(",")[3]) >= 1 for l in lines[1:])
    assert main(["race", "--kappa", "2"]) == 2


def test_ridge_command(tmp_path, capsys):
    data = tmp_path / "tiny.libsvm"
    data.write_text("".join(f"{1 if i % 3 else -1} {i % 5 + 1}:1 {i % 7 + 10}:0.5\n" for i in range(60)))
    runs, summary = tmp_path / "runs.csv", tmp_path / "summary.csv"
    rc = main(["ridge", "--data", str(data), "--batch", "8", "--epochs", "2", "--trials", "2",
               "--out", str(runs), "--summary-out", str(summary)])
    assert rc == 0
    assert runs.read_text().startswith("method,schedule,M,seed,best_eta0,best_gamma,best_n,final_gap")
    assert len(summary.read_text().strip().split("\n")) == 5
    assert main(["ridge"]) == 2
    assert main(["ridge", "--data", str(tmp_path / "missing")]) == 2
    bad = tmp_path / "bad.libsvm"
    bad.write_text("+1 2:1 1:1\n")
    assert main(["ridge", "--data", str(bad)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "heavyball", "race", "--kappa", "4"], capture_output=True,
                          text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("kappa,t_sgd,t_shb,ratio")
