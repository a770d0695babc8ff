import csv
import io
import json
import subprocess
import sys

import pytest

from dualjet.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_describe_optics(capsys):
    code, out, _ = run(capsys, "describe", "--space", "optics")
    assert code == EXIT_OK
    assert "dim = 8" in out
    assert "blocks: x y1 y2 p" in out or "blocks:" in out
    assert "not reducible to a Hamilton space" in out


def test_describe_cartan_degrees(capsys):
    code, out, _ = run(capsys, "describe", "--space", "cartan_quadratic")
    assert code == EXIT_OK
    assert "homogeneity (combined) of K: degree 3" in out
    assert "homogeneity (p) of K: degree 1" in out
    assert ": reducible to a Hamilton space" in out


def test_check_table_and_json(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "check", "--space", "flat", "--suite", "metric", "--json", str(path))
    assert code == EXIT_OK
    assert "checks passed" in out
    doc = json.loads(path.read_text())
    assert doc["schema"] == "dualjet-report/1" and doc["passed"]
    assert [r["check"] for r in doc["rows"]] == sorted(r["check"] for r in doc["rows"])


def test_json_on_stdout_keeps_stdout_clean(capsys):
    code, out, err = run(capsys, "check", "--space", "flat", "--suite", "metric", "--json", "-")
    assert code == EXIT_OK
    assert json.loads(out)["space"]["kind"] == "flat"


def test_failing_check_exits_one(capsys):
    # a stiff oscillator (frequency 1000) is far beyond what RK4 at step 1e-3 resolves
    code, out, _ = run(capsys, "check", "--space", "custom_expr", "--suite", "dynamics",
                       "--param", "hamiltonian=p1^2 + p2^2 + 1000000*x1^2")
    assert code == EXIT_FAIL
    assert "dynamics.energy_drift" in out and "FAIL" in out.upper()


def test_integrate_csv(capsys):
    code, out, err = run(capsys, "integrate", "--space", "coupled_toy", "--t1", "0.1", "--step", "0.01")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["t", "x1", "x2", "p1", "p2", "E"]
    assert len(rows) == 12
    assert "energy drift" in err


def test_integrate_flat_is_straight(capsys):
    code, out, _ = run(capsys, "integrate", "--space", "flat", "--t1", "1", "--step", "0.25",
                       "--x0", "0,0", "--p0", "1,2")
    rows = list(csv.reader(io.StringIO(out)))[1:]
    assert code == EXIT_OK
    last = [float(v) for v in rows[-1]]
    assert last[1:5] == pytest.approx([1.0, 2.0, 1.0, 2.0], abs=1e-12)


def test_integrate_rejects_higher_jets(capsys):
    code, _, err = run(capsys, "integrate", "--space", "custom_expr",
                       "--param", "hamiltonian=p1^2 + p2^2 + p1*y2_1", "--t1", "0.1")
    assert code == EXIT_USAGE and "y(2)" in err


def test_integrate_needs_hamiltonian(capsys):
    code, _, err = run(capsys, "integrate", "--space", "optics")
    assert code == EXIT_USAGE and "no Hamiltonian" in err


def test_usage_errors(capsys):
    assert run(capsys, "check")[0] == EXIT_USAGE
    assert run(capsys, "frobnicate")[0] == EXIT_USAGE
    assert run(capsys, "describe", "--space", "flat", "--param", "color=red")[0] == EXIT_USAGE
    assert run(capsys, "integrate", "--space", "flat", "--x0", "1,2,3")[0] == EXIT_USAGE


def test_config_error_location(capsys, tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[space]\nkind = flat\n\n[suite]\nname = nothing\n")
    code, _, err = run(capsys, "check", "--config", str(path))
    assert code == EXIT_USAGE
    assert f"{path}:5:" in err


def test_config_drives_run(capsys, tmp_path):
    path = tmp_path / "ok.ini"
    path.write_text("[space]\nkind = flat\nn = 3\n[suite]\nname = structures\nseed = 3\n")
    code, out, _ = run(capsys, "check", "--config", str(path), "--json", "-")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["space"]["n"] == 3 and doc["seed"] == 3


def test_legendre_command(capsys):
    code, out, _ = run(capsys, "legendre", "--space", "flat", "--points", "3")
    assert code == EXIT_OK and "round_trip" in out


def test_report_merges(capsys, tmp_path):
    paths = []
    for kind in ("optics", "flat"):
        p = tmp_path / f"{kind}.json"
        assert run(capsys, "check", "--space", kind, "--suite", "metric", "--json", str(p))[0] == EXIT_OK
        paths.append(str(p))
    code, out, _ = run(capsys, "report", *paths)
    merged = json.loads(out)
    assert code == EXIT_OK
    assert [d["space"]["kind"] for d in merged["reports"]] == ["flat", "optics"]
    assert merged["failed"] == 0 and merged["rows"] == sum(len(d["rows"]) for d in merged["reports"])


def test_report_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": "other"}')
    assert run(capsys, "report", str(tmp_path / "none.json"))[0] == EXIT_USAGE
    assert run(capsys, "report", str(bad))[0] == EXIT_USAGE


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "dualjet.cli", "describe", "--space", "flat"],
                         capture_output=True, text=True, check=True)
    assert "space: flat" in out.stdout
