import json

import numpy as np
import pytest

from vorefine.cli import main
from vorefine.exactnum import format_exact, parse_exact


def run(tmp_path, *argv):
    return main(["--out", str(tmp_path), *argv])


def load(path):
    return json.loads(path.read_text())


@pytest.mark.parametrize("spec,product,ruled", [
    ("D:3", "3", True), ("cube:4", "0", False), ("E8", "1", True), ("tri2d", "-1/2", False),
])
def test_lattice(tmp_path, spec, product, ruled):
    assert run(tmp_path, "lattice", spec) == 0
    rep = load(tmp_path / "lattice.json")
    assert rep["inner_product"] == product and rep["ruled_out"] is ruled
    man = load(tmp_path / "manifest.json")
    assert man["command"] == "lattice" and man["outputs"] == ["lattice.json"]


def test_lattice_a2_from_generator(tmp_path):
    assert run(tmp_path, "lattice", "A:2") == 0
    rep = load(tmp_path / "lattice.json")
    assert rep["inner_product"] == "1+1/2*sqrt(3)" and rep["ruled_out"]


@pytest.mark.parametrize("argv", [
    ["lattice", "Q:3"], ["lattice", "A:1"],
    ["refine", "hexagonal", "--shift", "1/2+x"],
    ["refine", "square", "--preset", "lozenge"],
    ["error-exp", "--eps", ""], ["error-exp", "--eps", "5"], ["error-exp", "--eps", "-0.1"],
    ["spline-sample", "square", "1", "--resolution", "16"],
])
def test_bad_input_exits_nonzero(tmp_path, argv):
    assert run(tmp_path, *argv) != 0


def test_argparse_errors_exit_nonzero():
    with pytest.raises(SystemExit) as exc:
        main(["tess", "pentagonal"])
    assert exc.value.code != 0
    with pytest.raises(SystemExit) as exc:
        main(["error-exp"])
    assert exc.value.code != 0


@pytest.mark.parametrize("kind,scale,verdict,lines", [
    ("hexagonal", "1/2", "straddled", False),
    ("square", "1/2", "covered", True),
    ("trihexagonal", "1/2", "straddled", True),
])
def test_tess(tmp_path, kind, scale, verdict, lines):
    assert main(["--out", str(tmp_path), "--svg", "tess", kind, "--fine-scale", scale]) == 0
    rep = load(tmp_path / "tess.json")
    assert rep["straddle"]["verdict"] == verdict
    assert rep["all_lines_contained"] is lines
    assert (tmp_path / "tess.svg").read_text().startswith("<svg")


def test_refine_hexagonal(tmp_path):
    assert main(["--out", str(tmp_path), "--svg", "refine", "hexagonal"]) == 0
    rep = load(tmp_path / "refine.json")
    assert rep["verdict"] == "not_refinable"
    assert rep["straddle"]["verdict"] == "straddled"
    total = sum(parse_exact(c["multiplier"]) * c["target"] for c in rep["certificate"])
    assert total != 0
    svg = (tmp_path / "refine.svg").read_text()
    assert svg.count('fill="#ff7f0e"') == len(rep["certificate"])


def test_refine_triangular_with_spot_check(tmp_path):
    assert run(tmp_path, "refine", "triangular", "--check-points", "200") == 0
    rep = load(tmp_path / "refine.json")
    assert rep["verdict"] == "refinable"
    for cell in (0, 1):
        vals = [w["value"] for w in rep["weights"] if w["coarse_cell"][2] == cell]
        assert vals == ["1"] * 4
    assert rep["spot_check"]["mismatches"] == 0


def test_refine_explicit_shifts_match_preset(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--out", str(a), "refine", "hexagonal", "--preset", "lozenge", "--window", "2"]) == 0
    assert main(["--out", str(b), "refine", "hexagonal", "--shift", "0,0", "--shift", "0,1/2*sqrt(3)",
                 "--shift", "3/4,1/4*sqrt(3)", "--window", "2"]) == 0
    ra, rb = load(a / "refine.json"), load(b / "refine.json")
    assert ra["verdict"] == rb["verdict"] == "not_refinable"
    assert ra["certificate"] == rb["certificate"]
    assert rb["propagation"]["found"]


def test_exact_numbers_round_trip(tmp_path):
    assert run(tmp_path, "refine", "hexagonal", "--preset", "lozenge", "--window", "2") == 0
    rep = load(tmp_path / "refine.json")
    for s in rep["inputs"]["fine"]["shifts"]:
        for c in s:
            assert format_exact(parse_exact(c)) == c


def test_error_exp(tmp_path, capsys):
    assert run(tmp_path, "error-exp", "--eps", "0.01", "--levels", "0,1") == 0
    out = capsys.readouterr().out
    assert "anomaly: err(level+1) > err(level)" in out
    lines = (tmp_path / "error.csv").read_text().splitlines()
    assert lines[0] == "epsilon,level,error,quadrature_resolution" and len(lines) == 3


def test_spline_sample(tmp_path):
    assert run(tmp_path, "spline-sample", "hexagonal", "1", "--resolution", "64") == 0
    arr = np.load(tmp_path / "spline_hexagonal_m1_r64.npy")
    summ = load(tmp_path / "spline_hexagonal_m1_r64.json")
    assert list(arr.shape) == summ["shape"] and arr.min() >= 0
    assert float(summ["partition_of_unity_max_deviation"]) < 2e-2


def test_manifest_timestamp_override(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    assert run(tmp_path, "lattice", "E6") == 0
    assert load(tmp_path / "manifest.json")["timestamp"] == "1970-01-01T00:00:00+00:00"
