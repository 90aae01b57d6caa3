import csv
import io
import json
import math
from pathlib import Path

import pytest

from returnstat.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "demos" / "configs"
B64 = '{"model": "bernoulli", "probs": [0.6, 0.4]}'


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def only_report(outdir, suffix=".json"):
    files = sorted(Path(outdir).glob(f"*{suffix}"))
    assert len(files) == 1, files
    return files[0]


def strip_timing(path):
    data = json.loads(Path(path).read_text())
    data.pop("timing")
    return data


# -- dist --------------------------------------------------------------------


def test_dist_pa_table(capsys):
    code, out, _ = run(capsys, "dist", "pa", "--t", 1, "--p", 0.5, "--kmax", 5)
    assert code == 0
    rows = [line.split() for line in out.splitlines()[1:7]]
    assert [int(r[0]) for r in rows] == list(range(6))
    assert float(rows[0][1]) == pytest.approx(math.exp(-1), rel=1e-14)
    assert "characteristic identity residual" in out


def test_dist_pa_p0_identical_to_pois(capsys):
    _, pa, _ = run(capsys, "dist", "pa", "--t", 1, "--p", 0)
    _, pois, _ = run(capsys, "dist", "pois", "--t", 1)
    assert pa == pois


def test_dist_bad_p_exits_2(capsys):
    code, _, err = run(capsys, "dist", "pa", "--p", 1.0)
    assert code == 2
    assert "p must be in [0,1)" in err


def test_dist_json_and_cp(capsys):
    code, out, _ = run(capsys, "dist", "cp", "--t", 1.5, "--nu", "0,0.5,0.25,0.125,0.0625", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["char_residual"] <= 1e-10
    code, out, _ = run(capsys, "dist", "geo", "--p", 0.3, "--format", "json")
    assert json.loads(out)["pmf"][:3] == pytest.approx([0.0, 0.7, 0.21])


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["dist", "weibull"])
    assert exc.value.code == 2
    capsys.readouterr()
    code, _, err = run(capsys, "cluster", "--model", "bernoulli_typo", "--word", "0")
    assert code == 2 and err.startswith("error:")


# -- cluster -----------------------------------------------------------------


def test_cluster_nonconventional(capsys):
    code, out, _ = run(capsys, "cluster", "--model", B64, "--block", "a", "--n", 10, "--d", "1,2", "--format", "json")
    data = json.loads(out)
    assert code == 0
    assert data["exponent_a"] == "3"
    assert data["rho"] == pytest.approx(0.216, rel=1e-12)
    assert data["predicted_rho"] == pytest.approx(0.216, rel=1e-12)


def test_cluster_period_echo(capsys):
    code, out, _ = run(capsys, "cluster", "--model", '{"model": "bernoulli", "probs": [0.5, 0.5]}', "--word", "abab")
    assert code == 0
    fields = dict(line.split(None, 1) for line in out.splitlines())
    assert fields["period"].strip() == "2"
    assert fields["word"].strip() == "0,1,0,1"


def test_cluster_gauss_beta(capsys):
    code, out, _ = run(capsys, "cluster", "--model", "gauss", "--block", "1", "--n", 25, "--format", "json")
    assert code == 0
    assert abs(json.loads(out)["beta"] - 0.3819660113) <= 1e-8


def test_cluster_zero_measure_exits_3(capsys):
    code, _, err = run(capsys, "cluster", "--model", '{"model": "bernoulli", "probs": [1.0, 0.0]}', "--word", "1,1")
    assert code == 3
    assert "zero measure" in err


def test_cluster_needs_word(capsys):
    code, _, err = run(capsys, "cluster", "--model", "gauss")
    assert code == 2 and "--word" in err


# -- experiment --------------------------------------------------------------


def test_experiment_converge_gauss_config(capsys, tmp_path):
    code, out, _ = run(
        capsys, "experiment", "converge", "--config", CONFIGS / "gauss_golden.json",
        "--M", 2000, "--n-list", "2,4", "--workers", 1, "--out", tmp_path,
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(only_report(tmp_path, ".csv").read_text())))
    assert [int(r["n"]) for r in rows] == [2, 4]
    assert all(0 <= float(r["tv"]) <= 1 for r in rows)
    assert float(rows[0]["rho_pred"]) == pytest.approx((3 - math.sqrt(5)) / 2)
    assert "wrote" in out


def test_experiment_oscillate_z2(capsys, tmp_path):
    code, _, _ = run(capsys, "experiment", "oscillate", "--config", CONFIGS / "z2.json", "--out", tmp_path)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(only_report(tmp_path, ".csv").read_text())))
    assert len(rows) == 30
    for row in rows:
        expected = 0.5 if int(row["n"]) % 2 else 0.42
        assert abs(float(row["conditional"]) - expected) <= 1e-12


def test_experiment_poisson_limit(capsys, tmp_path):
    code, _, _ = run(
        capsys, "experiment", "poisson-limit", "--config", CONFIGS / "successor.json",
        "--M", 500, "--n-list", "2", "--out", tmp_path, "--format", "json",
    )
    assert code == 0
    data = json.loads(only_report(tmp_path).read_text())
    assert len(data["extras"]["beta_table"]) == 20
    assert all(row["within_bound"] for row in data["extras"]["beta_table"])
    assert data["records"][0]["pa_params"] == [1.0, 0.0]


def test_seed_precedence_and_byte_identical_reports(capsys, tmp_path, monkeypatch):
    args = ["experiment", "converge", "--model", B64, "--block", "0", "--n-list", "4,6", "--M", 3000,
            "--workers", 1, "--format", "json"]
    monkeypatch.setenv("RETURNSTAT_SEED", "123")
    run(capsys, *args, "--out", tmp_path / "a")
    run(capsys, *args, "--out", tmp_path / "b")
    a, b = only_report(tmp_path / "a"), only_report(tmp_path / "b")
    assert a.name == b.name and a.name.endswith("-seed123.json")
    assert json.dumps(strip_timing(a), sort_keys=True) == json.dumps(strip_timing(b), sort_keys=True)
    run(capsys, *args, "--seed", 5, "--out", tmp_path / "c")
    assert only_report(tmp_path / "c").name.endswith("-seed5.json")
    monkeypatch.setenv("RETURNSTAT_SEED", "not-a-number")
    code, _, _ = run(capsys, *args, "--out", tmp_path / "d")
    assert code == 2


def test_capacity_exit_4_writes_partial_report(capsys, tmp_path):
    code, _, err = run(
        capsys, "experiment", "converge", "--model", '{"model": "bernoulli", "probs": [0.5, 0.5]}',
        "--block", "0", "--n-list", "3,1100", "--M", 200, "--seed", 1, "--out", tmp_path, "--format", "json",
    )
    assert code == 4
    assert "CapacityError" in err
    data = json.loads(only_report(tmp_path).read_text())
    assert data["records"][0]["counts"] and data["records"][1]["error"]


def test_tightness_from_report(capsys, tmp_path):
    run(capsys, "experiment", "converge", "--model", B64, "--block", "0", "--n-list", "3,6,9", "--M", 4000,
        "--seed", 2, "--out", tmp_path / "run", "--format", "json")
    report = only_report(tmp_path / "run")
    code, out, _ = run(capsys, "experiment", "tightness", "--report", report, "--out", tmp_path / "t", "--format", "json")
    assert code == 0 and "tightness: pass" in out
    data = json.loads(report.read_text())
    data["records"][0]["counts"] = [0] * 12 + [4000]
    report.write_text(json.dumps(data))
    code, out, _ = run(capsys, "experiment", "tightness", "--report", report, "--out", tmp_path / "t2")
    assert code == 1 and "tightness: FAIL" in out


def test_experiment_missing_inputs(capsys, tmp_path):
    code, _, err = run(capsys, "experiment", "converge", "--model", B64, "--n-list", "3", "--out", tmp_path)
    assert code == 2 and "block" in err
    code, _, err = run(capsys, "experiment", "converge", "--config", tmp_path / "nope.json", "--out", tmp_path)
    assert code == 2 and "cannot read config" in err
