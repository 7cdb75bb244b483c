import csv
import io
import json
import subprocess
import sys

import pytest

from periodmap.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_period(capsys):
    code, out, _ = run(capsys, "period", "--k", "3", "--B", "2")
    d = json.loads(out)
    assert code == 0
    assert list(d) == ["k", "B", "branch", "b1", "b2", "L_quad", "L_shoot", "rel_diff"]
    assert d["branch"] == "signchanging" and d["rel_diff"] <= 1e-8


def test_period_quad_only(capsys):
    _, out, _ = run(capsys, "period", "--k", "2", "--B", "-0.1", "--method", "quad", "--tol", "1e-12")
    d = json.loads(out)
    assert d["branch"] == "positive" and d["L_shoot"] is None and d["rel_diff"] is None


def test_theta(capsys):
    _, out, _ = run(capsys, "theta", "--k", "2", "--B", "-0.1")
    d = json.loads(out)
    assert list(d) == ["theta", "dLdB_fd", "residual", "discriminant", "det_monodromy"]
    assert d["theta"] < 0 and d["residual"] <= 1e-6 * abs(d["theta"])


def test_spectrum(capsys):
    _, out, _ = run(capsys, "spectrum", "--k", "3", "--B", "2", "--grid", "128", "--m", "4")
    d = json.loads(out)
    assert (d["n_neg"], d["z_zero"]) == (2, 1)
    assert len(d["eigenvalues"]) == len(d["extrapolated"]) == 4


def test_sweep_csv_and_json(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--k", "2", "--branch", "positive", "--B-min", "-0.16",
                       "--B-max", "-0.01", "--n", "3")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == "k,branch,B,L,theta,dLdB_fd,residual,n_neg,z_zero,status".split(",")
    path = tmp_path / "r.json"
    run(capsys, "sweep", "--k", "3", "--branch", "signchanging", "--B-min", "0.1", "--B-max", "10",
        "--n", "3", "--out", "json", "--spacing", "uniform", "-o", str(path))
    d = json.loads(path.read_text())
    assert d["summary"]["monotone"] is True and len(d["rows"]) == 3


def test_phase_negative_list(capsys):
    code, out, _ = run(capsys, "phase", "--k", "2", "--B", "-0.1,-0.05", "--samples", "64",
                       "--no-separatrix")
    assert code == 0
    ids = {r[0] for r in csv.reader(io.StringIO(out))}
    assert ids == {"orbit_id", "0", "1"}


def test_phase_reports_bad_level(capsys):
    code, _, err = run(capsys, "phase", "--k", "2", "--B", "-0.1,-0.5", "--samples", "64")
    assert code == 1 and "DegenerateOrbit" in err


def test_domain_error_exit_code(capsys):
    code, out, err = run(capsys, "period", "--k", "2", "--B", "0.5")
    assert code != 0 and out == "" and "BranchUnavailable" in err


def test_bad_arguments():
    with pytest.raises(SystemExit) as e:
        main(["period", "--k", "2"])
    assert e.value.code == 2


def test_verify_quick_is_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"v{i}.json"
        res = subprocess.run([sys.executable, "-m", "periodmap.cli", "verify", "--quick", "-o", str(p)],
                             capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        assert res.stderr.count("[PASS]") == 12
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["all_passed"] is True


def test_verify_exit_code_on_failure(capsys, monkeypatch):
    from periodmap import verify
    monkeypatch.setattr(verify, "CRITERIA", [lambda ctx: verify.CriterionResult(1, "stub", False)])
    code, _, err = run(capsys, "verify", "--quick")
    assert code == 1 and "1 criteria failed" in err
