import csv
import io
import json
import math
import subprocess
import sys

import pytest

from dunklhit.cli import EXIT_CHECK, EXIT_CONVERGENCE, EXIT_OK, EXIT_VALIDATION, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_survival_rank_one_both(capsys):
    code, out, _ = run(["survival", "--family", "B", "--m", "1", "--k0", "0.75", "--x", "1",
                        "--t", "1", "--method", "both", "--paths", "20000", "--seed", "7"], capsys)
    assert code == EXIT_OK
    (r,) = rows(out)
    assert float(r["sigma"]) <= 3
    assert abs(float(r["p_closed"]) - float(r["p_mc"])) == pytest.approx(
        float(r["sigma"]) * float(r["stderr"]), rel=1e-12)


def test_survival_precondition_message(capsys):
    code, _, err = run(["survival", "--family", "B", "--m", "2", "--k0", "0.4", "--k1", "0.75",
                        "--x", "2,1", "--t", "1"], capsys)
    assert code == EXIT_VALIDATION
    assert "k0 must lie in [1/2,1]" in err


def test_survival_d2_row(capsys):
    code, out, _ = run(["survival", "--family", "D", "--m", "2", "--k1", "0.75", "--x", "2,1",
                        "--t", "0.5"], capsys)
    assert code == EXIT_OK
    (r,) = rows(out)
    assert math.isfinite(float(r["p_closed"]))
    assert r["p_mc"] == "nan"


def test_csv_layout(capsys):
    _, out, _ = run(["survival", "--family", "B", "--m", "1", "--k0", "0.6", "--x", "1",
                     "--t", "0.5,1"], capsys)
    lines = out.split("\n")
    assert lines[0] == "t,p_closed,p_mc,stderr,sigma"
    assert "\r" not in out and out.endswith("\n")
    value = lines[1].split(",")[1]
    assert len(value.replace("0.", "", 1).lstrip("0")) >= 16


def test_wrong_length_and_bad_time(capsys):
    code, _, err = run(["survival", "--family", "B", "--m", "2", "--k0", "0.75", "--k1", "0.75",
                        "--x", "2", "--t", "1"], capsys)
    assert code == EXIT_VALIDATION and "x" in err
    code, _, _ = run(["survival", "--family", "B", "--m", "1", "--k0", "0.75", "--x", "1",
                      "--t", "-1"], capsys)
    assert code == EXIT_VALIDATION


def test_convergence_exit(capsys):
    code, _, err = run(["survival", "--family", "B", "--m", "2", "--k0", "0.75", "--k1", "0.75",
                        "--x", "12,1", "--t", "1"], capsys)
    assert code == EXIT_CONVERGENCE
    assert "cap" in err


def test_json_report(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, _, _ = run(["survival", "--family", "D", "--m", "2", "--k1", "0.75", "--x", "2,1",
                      "--t", "0.5", "--out", str(path)], capsys)
    assert code == EXIT_OK
    rep = json.loads(path.read_text())
    assert rep["version"] and rep["seed"] is not None
    assert {"max_weight", "series_tolerance", "series_cap"} <= set(rep["config"])
    assert rep["results"][0]["p_mc"] is None


def test_brownian_compare_columns(capsys):
    code, out, _ = run(["brownian", "--family", "B", "--m", "2", "--x", "2,1", "--t", "0.5,1",
                        "--compare", "--paths", "500", "--seed", "1"], capsys)
    assert code == EXIT_OK
    r = rows(out)
    assert list(r[0]) == ["t", "p_pf", "p_det", "ratio", "p_mc", "stderr", "sigma"]


def test_brownian_odd_rank(capsys):
    code, _, err = run(["brownian", "--family", "D", "--m", "3", "--x", "3,2,1", "--t", "1",
                        "--compare"], capsys)
    assert code == EXIT_VALIDATION
    assert "even m" in err


def test_brownian_rank_four(capsys):
    code, out, _ = run(["brownian", "--family", "B", "--m", "4", "--x", "4,3,2,1", "--t", "1"],
                       capsys)
    assert code == EXIT_OK
    assert 0 < float(rows(out)[0]["p_pf"]) < 1


def test_check_pfdet(tmp_path, capsys):
    path = tmp_path / "c.json"
    code, _, _ = run(["check", "--suite", "pfdet", "--out", str(path)], capsys)
    assert code == EXIT_OK
    rep = json.loads(path.read_text())
    assert rep["checks"] and all(c["passed"] for c in rep["checks"])
    assert rep["passed"] == rep["total"]


def test_check_failure_exit(monkeypatch, capsys):
    from dunklhit import checks

    def failing(seed=0):
        return [checks.CheckResult("broken", 1.0, 1e-12, False)]

    monkeypatch.setitem(checks.RUNNERS, "pfdet", failing)
    code, _, err = run(["check", "--suite", "pfdet"], capsys)
    assert code == EXIT_CHECK
    assert "broken" in err


def test_module_entry_point_is_byte_identical():
    argv = [sys.executable, "-m", "dunklhit", "survival", "--family", "B", "--m", "2", "--k0",
            "0.75", "--k1", "0.75", "--x", "2,1", "--t", "0.5,1", "--method", "both",
            "--paths", "300", "--seed", "3", "--format", "json"]
    a = subprocess.run(argv, capture_output=True, check=True)
    b = subprocess.run(argv, capture_output=True, check=True)
    assert a.stdout == b.stdout
    assert json.loads(a.stdout)["seed"] == 3
