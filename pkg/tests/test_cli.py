import json
import subprocess
import sys
from pathlib import Path

import pytest

from cornerem.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main, pretty_poly
from cornerem.polycore import HomoPoly

FIX = Path(__file__).resolve().parents[1] / "fixtures"


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_classify_plane_wave(capsys):
    assert main(["classify", "--taylor", str(FIX / "plane_wave.json"), "--expect", "Admissible"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "verdict: Admissible" in out and "N = 0" in out
    assert "[PASS] verdict-matches-expectation" in out


def test_classify_expectation_mismatch_exits_2(capsys):
    assert main(["classify", "--taylor", str(FIX / "plane_wave.json"), "--expect", "Inadmissible"]) == EXIT_FAIL
    err = capsys.readouterr().err
    assert json.loads(err.strip().splitlines()[-1])["failures"] == ["verdict-matches-expectation"]


def test_classify_expansion_family_member(tmp_path, capsys):
    path = _write(tmp_path, "f.json", {"entries": [{"l": 1, "m": 0, "a": [1, 0], "b": [0, 0]}]})
    assert main(["classify", "--expansion", path, "--json"]) == EXIT_OK
    out = capsys.readouterr().out
    report = json.loads(out[out.index("{") : out.rindex("}") + 1])
    assert report["verdict"]["status"] == "Inadmissible" and report["verdict"]["N"] == 1


@pytest.mark.parametrize(
    "fixture, divisible, quotient",
    [("p_even_inadmissible.txt", "true", "1"), ("p_odd_admissible.txt", "false", None)],
)
def test_laplace_fixtures(fixture, divisible, quotient, capsys):
    assert main(["laplace", "--poly", str(FIX / fixture), "--exact"]) == EXIT_OK
    out = capsys.readouterr().out
    assert f"divisible by sigma: {divisible}" in out
    if quotient is not None:
        assert f"quotient: {quotient}" in out


def test_laplace_zeta_samples(tmp_path, capsys):
    assert main(["laplace", "--poly", str(FIX / "p_odd_admissible.txt"), "--zeta-samples", "3", "--output-dir", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["checks"][-1]["passed"] and report["seed"] == 0


def test_decay_sweep_command(capsys):
    assert main(["decay-sweep", "--poly", str(FIX / "p_odd_admissible.txt")]) == EXIT_OK
    assert "[FAIL]" not in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["run", "--config", "/nonexistent/config.json"],
        ["laplace", "--poly", "/nonexistent.txt"],
        ["classify"],
    ],
)
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_malformed_inputs_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["classify", "--taylor", str(bad)]) == EXIT_USAGE
    poly = tmp_path / "p.txt"
    poly.write_text("degree 1\ncomponent 1\n1 0 0 : 1 + 0 i\n")  # divergence 1, outside the domain
    assert main(["laplace", "--poly", str(poly)]) == EXIT_USAGE
    cfg = _write(tmp_path, "c.json", {"command": "laplace", "args": {"poly": str(FIX / "p_odd_admissible.txt")}, "tolerances": {"x": -1}})
    assert main(["run", "--config", cfg]) == EXIT_USAGE


def test_run_config_dispatches(tmp_path, capsys):
    cfg = _write(
        tmp_path,
        "c.json",
        {"command": "laplace", "args": {"poly": str(FIX / "p_even_inadmissible.txt"), "exact": True}, "seed": 3, "output_dir": str(tmp_path / "out")},
    )
    assert main(["run", "--config", cfg]) == EXIT_OK
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["command"] == "laplace" and report["seed"] == 3 and report["divisible"]


def test_cgo_medium_leak_is_a_usage_error(capsys):
    # the default bump leaks past the support tolerance on a 48^3 grid
    assert main(["cgo-verify", "--grid", "48", "--trials", "1"]) == EXIT_USAGE


def test_pretty_poly():
    assert pretty_poly(HomoPoly.constant(1)) == "1"
    assert pretty_poly(HomoPoly(2, {(1, 1, 0): 2})) == "2*x1*x2"


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "cornerem.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()
