import json
import subprocess
import sys

import numpy as np
import pytest

from bowenseries.cli import load_polygon_json, main, polygon_to_dict
from bowenseries.geometry import make_polygon
from bowenseries.markov import matrix_from_csv


def run(*args):
    return subprocess.run([sys.executable, "-m", "bowenseries", *args], capture_output=True, text=True)


@pytest.mark.parametrize("g, n", [(2, 12), (3, 20)])
def test_polygon_json(tmp_path, g, n):
    assert main(["polygon", "--genus", str(g), "--out", str(tmp_path)]) == 0
    data = load_polygon_json((tmp_path / "polygon.json").read_text())
    assert data["n_sides"] == n and data["genus"] == g
    assert np.allclose(data["P"], make_polygon(g).P, atol=1e-15)
    svg = (tmp_path / "polygon.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<path") == n


def test_polygon_json_validation():
    data = polygon_to_dict(make_polygon(2))
    data["Q"] = data["Q"][:-1]
    with pytest.raises(ValueError):
        load_polygon_json(json.dumps(data))


def test_outputs_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        out = tmp_path / d
        assert main(["polygon", "--out", str(out)]) == 0
        assert main(["markov", "--spec", "all-Q", "--out", str(out)]) == 0
        assert main(["psi", "--epsilon", "1e-3", "--out", str(out)]) == 0
        assert main(["recode", "--nmax", "1", "--out", str(out)]) == 0
    for name in ("polygon.json", "polygon.svg", "matrix.csv", "spectral.json", "psi.csv", "recoding.jsonl"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_markov_outputs(tmp_path):
    assert main(["markov", "--spec", "all-P", "--out", str(tmp_path)]) == 0
    M = matrix_from_csv((tmp_path / "matrix.csv").read_text())
    assert M.shape == (24, 24) and set(np.unique(M)) == {0, 1}
    spec = json.loads((tmp_path / "spectral.json").read_text())
    assert spec["lambda"] == pytest.approx(5 + 2 * 6 ** 0.5)


def test_recode_report(tmp_path):
    assert main(["recode", "--nmax", "2", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "recoding.jsonl").read_text().splitlines()
    assert len(lines) == 24 + 228
    rec = json.loads(lines[0])
    assert set(rec) == {"omega", "q_words", "measure_P", "measure_Q_sum", "union_ok"}


def test_psi_csv(tmp_path):
    assert main(["psi", "--epsilon", "1e-3", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "psi.csv").read_text().startswith("x,psi\n")


def test_verify_quick_suites():
    r = run("verify", "--suite", "geometry,markov,symbolic")
    assert r.returncode == 0, r.stderr
    report = json.loads(r.stdout)
    assert report["ok"] and report["suites"] == ["geometry", "markov", "symbolic"]


def test_corrupted_generator_fails():
    r = run("verify", "--suite", "geometry,appendix", "--corrupt-generator", "3")
    assert r.returncode == 1
    assert "FAIL geometry." in r.stderr
    assert not json.loads(r.stdout)["ok"]


def test_entropy_eigen(tmp_path):
    r = run("entropy", "--spec", "all-P", "--method", "eigen", "--out", str(tmp_path))
    assert r.returncode == 0, r.stderr
    lines = r.stdout.splitlines()
    assert lines[0] == "genus,spec,method,estimate,reference,deviation,pass"
    assert lines[1].startswith("2,all-P,markov-eigen,2.29243166956")
    assert (tmp_path / "sweep.csv").read_text() == r.stdout


def test_entropy_json_bits(tmp_path):
    assert main(["entropy", "--spec", "all-Q", "--method", "eigen", "--bits", "--format", "json",
                 "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "sweep.json").read_text())
    assert doc["units"] == "bits"
    assert float(doc["rows"][0]["estimate"]) == pytest.approx(2.2924316696 / np.log(2), rel=1e-9)


def test_figures(tmp_path):
    assert main(["figures", "--epsilon", "1e-3", "--out", str(tmp_path)]) == 0
    for name in ("polygon.svg", "fP.svg", "conjugated.svg", "psi.svg", "TS.svg", "cylinders.svg"):
        assert (tmp_path / name).read_text().startswith("<svg")


def test_errors_exit_2(capsys):
    assert main(["polygon", "--genus", "1"]) == 2
    assert main(["entropy", "--spec", "nonsense", "--method", "eigen"]) == 2
    assert "error" in capsys.readouterr().err
