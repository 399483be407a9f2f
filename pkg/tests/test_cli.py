import csv
import io
import json
import math
import subprocess
import sys

import pytest

from jmk import __version__
from jmk.cli import emit_csv, emit_json, main
from jmk.core import UsageError


def run_cli(capsysbinary, *argv):
    code = main(list(argv))
    out, err = capsysbinary.readouterr()
    return code, out, err.decode()


def parse_csv(payload):
    return list(csv.reader(io.StringIO(payload.decode("ascii"))))


def test_coeffs_example(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "coeffs", "--ell", "0", "--lambda", "1", "--energy", "0.125", "--n", "10")
    assert code == 0
    rows = parse_csv(out)
    assert rows[0] == ["n", "s_n", "c_n"]
    assert len(rows) == 11
    assert float(rows[1][1]) == pytest.approx(2 / math.sqrt(math.pi), rel=1e-15)
    assert abs(float(rows[1][2])) <= 1e-15
    assert out.endswith(b"\r\n")


def test_verify_example(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "verify", "--suite", "recursion", "--ell", "2", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["meta"]["command"] == "verify" and doc["meta"]["version"] == __version__
    assert doc["rows"] and all(row["passed"] for row in doc["rows"])
    assert all(row["value"] <= row["threshold"] for row in doc["rows"])


def test_phaseshift_example(capsysbinary):
    code, out, _ = run_cli(
        capsysbinary, "phaseshift", "--pot", "squarewell:-2:1", "--ell", "0", "--egrid", "0.1:2.0:20", "--n", "40"
    )
    assert code == 0
    rows = parse_csv(out)
    assert rows[0] == ["E", "k", "delta", "branch", "N", "convergence_delta"]
    assert len(rows) == 21
    energies = [float(r[0]) for r in rows[1:]]
    assert energies == sorted(energies) and energies[0] == 0.1 and energies[-1] == 2.0


def test_phaseshift_thread_count_does_not_change_bytes(monkeypatch, capsysbinary):
    argv = ["phaseshift", "--pot", "gaussian:-1:1", "--egrid", "0.1:1.5:12"]
    outputs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("JMK_THREADS", threads)
        code, out, _ = run_cli(capsysbinary, *argv)
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1]


@pytest.mark.parametrize("fmt", ["csv", "json"])
@pytest.mark.parametrize(
    "argv",
    [
        ["coeffs", "--ell", "2", "--energy", "0.7"],
        ["wavefunction", "--ell", "1", "--energy", "0.5", "--n", "50", "--rgrid", "0.5:10:15"],
        ["jmatrix", "--ell", "1", "--energy", "0.3", "--n", "5"],
    ],
)
def test_byte_identical_reruns(tmp_path, argv, fmt):
    paths = [tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"]
    for p in paths:
        assert main(argv + ["--format", fmt, "--output", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_wavefunction_columns(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "wavefunction", "--energy", "0.125", "--rgrid", "1:10:10", "--n", "100")
    assert code == 0
    rows = parse_csv(out)
    assert rows[0] == ["r", "chi_sin_N", "chi_cos_N", "chi_reg", "chi_irr"]
    assert len(rows) == 11


def test_jmatrix_band(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "jmatrix", "--energy", "0.125", "--n", "3")
    assert code == 0
    rows = parse_csv(out)[1:]
    assert [(int(r[0]), int(r[1])) for r in rows] == [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 1), (2, 2)]
    assert float(rows[1][2]) == pytest.approx(0.5)


@pytest.mark.parametrize(
    "argv, code, tag",
    [
        (["coeffs", "--energy", "-1"], 1, "E_DOMAIN"),
        (["coeffs"], 2, "E_USAGE"),
        (["bogus"], 2, "E_USAGE"),
        (["coeffs", "--energy", "abc"], 2, "E_USAGE"),
        (["phaseshift", "--pot", "well:1:1", "--energy", "0.5"], 2, "E_USAGE"),
        (["phaseshift", "--pot", "zero", "--egrid", "1:0.5:3"], 2, "E_USAGE"),
        (["wavefunction", "--energy", "0.5", "--rgrid", "0:10:5"], 2, "E_USAGE"),
        (["coeffs", "--energy", "0.5", "--ell", "-1"], 1, "E_DOMAIN"),
        (["coeffs", "--energy", "0.5", "--output", "/nonexistent/dir/out.csv"], 1, "E_IO"),
    ],
)
def test_error_paths(capsysbinary, argv, code, tag):
    got, _, err = run_cli(capsysbinary, *argv)
    assert got == code
    lines = err.strip().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith(f"error[{tag}]: ")


def test_bad_thread_count(monkeypatch, capsysbinary):
    monkeypatch.setenv("JMK_THREADS", "0")
    code, _, err = run_cli(capsysbinary, "phaseshift", "--pot", "zero", "--egrid", "0.1:1:3")
    assert code == 2 and err.startswith("error[E_USAGE]")


def test_failed_verification_exit_code(monkeypatch, capsysbinary):
    from jmk import cli, verify

    def failing(name, channel, energies, N):
        return [verify.Check.upper("recursion", "forced", 1.0, 0.5)]

    monkeypatch.setattr(cli, "run_suite", failing)
    code, out, err = run_cli(capsysbinary, "verify")
    assert code == 1 and err.startswith("error[E_VERIFY]")
    assert parse_csv(out)[1][-1] == "false"


def test_emit_csv_header_only_and_schema():
    assert emit_csv(["a", "b"], []) == b"a,b\r\n"
    with pytest.raises(UsageError):
        emit_csv(["a", "b"], [[1]])
    assert emit_csv(["x"], [[None], [True], ['q"uote,']]) == b'x\r\n""\r\ntrue\r\n"q""uote,"\r\n'


def test_float_round_trip():
    import random

    rng = random.Random(11)
    values = [rng.uniform(-1, 1) * 10 ** rng.randint(-300, 300) for _ in range(500)] + [0.1, 1 / 3, 5e-324]
    rows = [[v] for v in values]
    back = [float(r[0]) for r in parse_csv(emit_csv(["v"], rows))[1:]]
    assert back == values
    doc = json.loads(emit_json(["v"], rows, {}))
    assert [r["v"] for r in doc["rows"]] == values


def test_json_round_trip_and_key_order():
    columns = ["n", "name", "value", "ok"]
    rows = [[1, "a", 0.25, True], [2, "b", -1e-300, False]]
    payload = emit_json(columns, rows, {"version": "x", "command": "c", "params": {}})
    doc = json.loads(payload)
    assert [[r[c] for c in columns] for r in doc["rows"]] == rows
    assert list(doc) == ["meta", "columns", "rows"]
    with pytest.raises(ValueError):
        emit_json(["v"], [[float("nan")]], {})


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "jmk", "--version"], capture_output=True, text=True, check=False)
    assert out.returncode == 0 and __version__ in out.stdout
