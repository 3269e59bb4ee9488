import csv
import io
import json
import subprocess
import sys

import pytest

from toeplitz_spectra import __version__
from toeplitz_spectra.cli import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, InvalidInput, RunConfig, main, run


def call(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def test_spectrum_tridiag_json(capsys):
    code, out = call(["spectrum", "--preset", "tridiag", "--N", "62", "--dense-check"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["dense_max_dev"] <= 1e-8
    assert len(doc["records"]) == 63
    assert all(doc["invariants"].values())
    assert doc["config"]["N"] == 62 and doc["version"] == __version__
    assert "timing" not in doc


def test_json_is_deterministic(capsys):
    argv = ["spectrum", "--preset", "loop1", "--N", "20", "--seed", "3"]
    _, a = call(argv, capsys)
    _, b = call(argv, capsys)
    assert a == b


def test_timing_is_separate_field(capsys):
    _, out = call(["spectrum", "--preset", "loop1", "--N", "20", "--timing"], capsys)
    doc = json.loads(out)
    assert "wall" in doc["timing"]


def test_csv_output(tmp_path, capsys):
    path = tmp_path / "spec.csv"
    code, _ = call(["spectrum", "--preset", "tridiag", "--N", "10", "--csv", str(path)], capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert len(rows) == 11 and set(rows[0]) == {"k", "lambda", "gamma", "residual"}


def test_phase_csv_stdout(capsys):
    code, out = call(["phase", "--preset", "loop1", "--N", "16", "--grid", "64", "--format", "csv"], capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 64
    assert list(rows[0]) == ["lambda_prime", "theta0", "rho_N", "rho_limit"]


def test_predictor_command(capsys):
    code, out = call(["predictor", "--preset", "ar1", "--M", "32"], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK and doc["spectral_match_dev"] <= 1e-8 and all(doc["invariants"].values())


def test_invert_command(capsys):
    code, out = call(["invert", "--preset", "loop1", "--N", "64", "--lambda-prime", "1.2"], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK and doc["rel_dev"] <= 1e-8


def test_invert_at_eigenvalue_is_numerical_failure(capsys):
    import math
    lp = 1 - math.cos(5 * math.pi / 32)
    code, out = call(["invert", "--preset", "tridiag", "--N", "30", "--lambda-prime", repr(lp)], capsys)
    assert code == EXIT_NUMERICAL
    assert json.loads(out)["error"] == "numerical_failure"


def test_fraclap_command(tmp_path, capsys):
    path = tmp_path / "modes.csv"
    code, _ = call(["fraclap", "--alpha", "0.75", "--N", "512", "--kmin", "8", "--kmax", "16",
                    "--modes", str(path)], capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert [int(r["k"]) for r in rows] == list(range(8, 17))
    assert all(float(r["overlap"]) >= 0.95 for r in rows)


def test_bench_reports_timing(capsys):
    code, out = call(["bench", "--preset", "loop1", "--N", "64"], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK
    items = {r["item"] for r in doc["timing"]["table"]}
    assert {"char_eq_per_eigenvalue", "dense_eigh_total", "matvec_naive", "matvec_fft"} <= items


@pytest.mark.parametrize("argv", [
    ["spectrum", "--preset", "nosuch", "--N", "10"],
    ["spectrum", "--symbol", "/nonexistent/symbol.json", "--N", "10"],
    ["spectrum", "--preset", "tridiag", "--N", "1"],
    ["spectrum", "--N", "10"],
    ["spectrum", "--preset", "tridiag", "--N", "10", "--tol", "dense=-1"],
    ["spectrum", "--preset", "tridiag", "--N", "10", "--tol", "dense=abc"],
    ["fraclap", "--alpha", "0.5", "--N", "64"],
])
def test_invalid_input_exit_code(argv, capsys):
    code, out = call(argv, capsys)
    assert code == EXIT_INVALID
    assert json.loads(out)["error"] == "invalid_input"


def test_bad_symbol_file(tmp_path, capsys):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"kind": "fourier", "coeffs": [[0, 2.0], [1, -1.0]], "extra": 1}))
    code, _ = call(["spectrum", "--symbol", str(p), "--N", "10"], capsys)
    assert code == EXIT_INVALID
    p.write_text(json.dumps({"kind": "fourier", "coeffs": [[0, 2.0], [1, -1.0]]}))
    code, out = call(["spectrum", "--symbol", str(p), "--N", "10"], capsys)
    assert code == EXIT_OK and len(json.loads(out)["records"]) == 11


def test_config_strict(tmp_path, capsys):
    with pytest.raises(InvalidInput):
        RunConfig.from_dict({"command": "spectrum", "bogus": 1})
    with pytest.raises(InvalidInput):
        RunConfig.from_dict({"N": 10})
    with pytest.raises(InvalidInput):
        RunConfig.from_dict({"command": "spectrum", "tolerances": {"dense": 0}})
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"command": "spectrum", "symbol": "tridiag", "N": 12}))
    code, out = call(["spectrum", "--config", str(p), "--N", "14"], capsys)
    assert code == EXIT_OK and json.loads(out)["N"] == 14
    p.write_text(json.dumps({"command": "spectrum", "symbol": "tridiag", "N": 12, "colour": "red"}))
    assert call(["spectrum", "--config", str(p)], capsys)[0] == EXIT_INVALID


def test_run_api_writes_output(tmp_path):
    out = tmp_path / "r.json"
    cfg = RunConfig(command="spectrum", symbol="tridiag", N=8, output=str(out))
    assert run(cfg, stdout=io.StringIO()) == EXIT_OK
    assert len(json.loads(out.read_text())["records"]) == 9


def test_version_flag():
    res = subprocess.run([sys.executable, "-m", "toeplitz_spectra", "--version"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.strip().split()[-1].startswith(__version__ + "+")
