import csv
import io
import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from wld import cli


def run(capsys, *argv) -> tuple[int, str]:
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def schema(name: str) -> dict:
    return json.loads(resources.files("wld").joinpath("schemas", f"{name}.json").read_text())


def rows(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def test_b_table_rows(capsys):
    _, out = run(capsys, "b-table", "--r-max", "4")
    table = rows(out)
    assert list(table[0]) == ["r", "j", "numerator", "denominator"]
    assert len(table) == sum(2 * r - 1 for r in range(1, 5))
    got = {(int(t["r"]), int(t["j"])): (int(t["numerator"]), int(t["denominator"])) for t in table}
    assert got[(2, 0)] == (8, 1)
    assert got[(3, 3)] == (-8, 1)
    assert got[(4, 0)] == (64, 45)
    assert got[(4, 4)] == (0, 1)


def test_b_table_single_row(capsys):
    _, out = run(capsys, "b-table", "--r-max", "1")
    assert out == "r,j,numerator,denominator\n1,0,2,1\n"


def test_b_table_needs_override_above_default():
    with pytest.raises(SystemExit, match="allow-large"):
        cli.main(["b-table", "--r-max", "9"])


def test_b_table_json_validates(capsys):
    _, out = run(capsys, "b-table", "--r-max", "3", "--format", "json")
    data = json.loads(out)
    jsonschema.validate(data, schema("table"))
    assert data[0] == {"r": 1, "j": 0, "numerator": 2, "denominator": 1}


def test_density_curve_example(capsys):
    _, out = run(capsys, "density-curve", "--family", "theoremA", "--r", "1", "--x-min", "0.5", "--x-max", "0.5", "--npoints", "1")
    assert rows(out) == [{"x": "0.5", "W_theoremA": "1"}]


def test_density_curve_all_families_agree(capsys):
    _, out = run(capsys, "density-curve", "--r", "2", "--x-min", "-3", "--x-max", "3", "--npoints", "61")
    table = rows(out)
    assert len(table) == 61
    assert {"W_theoremA", "W_SOeven", "W_conjectureD", "W_Sp", "W_U"} <= set(table[0])
    for t in table:
        assert abs(float(t["W_theoremA"]) - float(t["W_SOeven"])) < 1e-10
        assert abs(float(t["W_conjectureD"]) - float(t["W_SOeven"])) < 1e-10


def test_density_curve_rejects_unknown_family():
    with pytest.raises(SystemExit):
        cli.main(["density-curve", "--family", "theoremA", "--r", "5"])


def test_measure_moments_columns(capsys):
    _, out = run(capsys, "measure-moments", "--p", "3", "--r", "2", "--ell-max", "4")
    table = rows(out)
    assert list(table[0]) == ["p", "r", "harmonic", "ell", "moment_quadrature", "moment_closed", "abs_diff"]
    assert [int(t["ell"]) for t in table] == list(range(5))
    assert all(float(t["abs_diff"]) < 1e-10 for t in table)
    assert float(table[0]["moment_closed"]) == 1


def test_measure_density_reconstruction(capsys):
    _, out = run(capsys, "measure-density", "--p", "5", "--r", "1", "--npoints", "21")
    table = rows(out)
    assert len(table) == 21
    assert max(abs(float(t["density"]) - float(t["reconstructed"])) for t in table) < 1e-8


def test_rmt_sim_json(capsys):
    _, out = run(capsys, "rmt-sim", "--N", "6", "--samples", "500", "--r", "1", "--seed", "3", "--threads", "1")
    data = json.loads(out)
    jsonschema.validate(data, schema("rmt-sim"))
    assert data["config"] == {"N": 6, "samples": 500, "r": 1, "seed": 3, "delta": 0.5, "test_function": "fejer"}
    assert data["std_error"] > 0


def test_rmt_sim_rejects_bad_config():
    with pytest.raises(SystemExit):
        cli.main(["rmt-sim", "--N", "1"])


def test_lemma41_json(capsys):
    _, out = run(capsys, "lemma41", "--n", "2", "--R", "1e8", "--limit", "10000")
    data = json.loads(out)
    jsonschema.validate(data, schema("lemma41"))
    assert data["rel_error"] == pytest.approx(abs(data["lhs"] - data["rhs"]) / data["rhs"])


def test_lemma41_refuses_short_table():
    with pytest.raises(SystemExit, match="table stops"):
        cli.main(["lemma41", "--R", "1e8", "--limit", "1000"])


def test_output_file_and_line_endings(tmp_path, capsys):
    target = tmp_path / "b.csv"
    cli.main(["b-table", "--r-max", "3", "-o", str(target)])
    assert capsys.readouterr().out == ""
    raw = target.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    raw.decode("utf-8")


def test_outputs_are_byte_identical(capsys):
    argv = ["rmt-sim", "--N", "5", "--samples", "300", "--seed", "11", "--threads", "1"]
    assert run(capsys, *argv) == run(capsys, *argv)
    argv = ["density-curve", "--r", "3", "--npoints", "17"]
    assert run(capsys, *argv) == run(capsys, *argv)


def test_threads_env_fallback(capsys, monkeypatch):
    argv = ["rmt-sim", "--N", "5", "--samples", "600", "--seed", "4"]
    monkeypatch.setenv("WLD_THREADS", "1")
    one = run(capsys, *argv)
    monkeypatch.setenv("WLD_THREADS", "3")
    assert run(capsys, *argv) == one


@pytest.fixture(scope="module")
def verify_fast():
    proc = subprocess.run([sys.executable, "-m", "wld.cli", "verify", "--level", "fast"], capture_output=True, text=True)
    return proc


def test_verify_fast_passes(verify_fast):
    assert verify_fast.returncode == 0, verify_fast.stderr
    data = json.loads(verify_fast.stdout)
    jsonschema.validate(data, schema("verify"))
    assert data["passed"] and data["failures"] == []
    assert {c["criterion"] for c in data["checks"]} == set(range(1, 11)) - {10} | {12}
    assert all("seconds" not in c for c in data["checks"])


TAMPER = """
import sys
from wld import residues
from wld.cli import main

original = residues.b_coefficient

def tampered(r, j, allow_large=False):
    value = original(r, j, allow_large)
    return -value if (r, j) == (3, 3) else value

residues.b_coefficient = tampered
sys.exit(main(["verify", "--level", "fast"]))
"""


def test_verify_detects_tampered_table():
    proc = subprocess.run([sys.executable, "-c", TAMPER], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "FAILED: b-table r=3" in proc.stderr
    data = json.loads(proc.stdout)
    assert "b-table r=3" in data["failures"] and not data["passed"]
