import json

import numpy as np
import pytest

from lacross.cli import main
from lacross.framesim import ShotBatch


def run(capsys, *args):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_pipeline(tmp_path, capsys):
    code_file, circ, dem, shots = (tmp_path / f for f in ("c.lcx", "c.circ", "c.dem", "s.b8"))
    rc, out, _ = run(capsys, "build-code", "--n", 3, "--k", 1, "--distance", 4, "--out", code_file)
    assert rc == 0 and json.loads(out)["D"] == 3
    rc, out, _ = run(capsys, "build-circuit", "--code", code_file, "--noise", "ag", "--p", 0.004,
                     "--out", circ, "--dem", dem)
    info = json.loads(out)
    assert rc == 0 and info["detectors"] == 24 and info["mechanisms"] > 0
    rc, _, _ = run(capsys, "sample", "--circuit", circ, "--shots", 2000, "--seed", 3, "--out", shots)
    assert rc == 0
    rc, out, _ = run(capsys, "decode", "--dem", dem, "--shots", shots)
    res = json.loads(out)
    assert rc == 0 and res["shots"] == 2000 and 0 < res["failures"] < 200


def test_build_code_with_poly(tmp_path, capsys):
    rc, out, _ = run(capsys, "build-code", "--n", 9, "--poly", "0,3", "--boundary", "pbc",
                     "--out", tmp_path / "x.lcx")
    assert rc == 0 and json.loads(out)["N"] == 162


def test_rydberg(capsys):
    rc, out, _ = run(capsys, "rydberg", "--mode", "paper")
    rows = json.loads(out)
    assert rc == 0 and [r["c_j"] for r in rows] == [1, 1.6, 2.5, 3.6, 4.8, 6.1, 7.5]
    rc, out, _ = run(capsys, "rydberg", "--omega-ref", "1.9e6x2pi")
    assert rc == 0 and json.loads(out)[0]["n_j"] == 56


def test_sweep_analyze(tmp_path, capsys):
    cfg = {"family": {"k": 1, "sizes": [3, 5], "name": "surface"}, "p_grid": [0.004, 0.012],
           "noise": "ag", "max_shots": 2048, "max_errors": 60, "seed": 1}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    csv_path = tmp_path / "out.csv"
    rc, _, _ = run(capsys, "sweep", "--config", path, "--out", csv_path)
    assert rc == 0 and len(csv_path.read_text().splitlines()) == 5
    rc, out, _ = run(capsys, "analyze", "--csv", csv_path, "--p-th", 0.01)
    (entry,) = json.loads(out)
    assert rc == 0 and len(entry["fits"]) == 2


def test_compare(tmp_path, capsys):
    cfg = {"family": {"k": 2, "sizes": [5]}, "p_grid": [0.002, 0.004], "noise": "hw",
           "max_shots": 2048, "max_errors": 50, "seed": 1}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    rc, out, _ = run(capsys, "compare", "--config", path, "--out", tmp_path / "cmp.csv")
    rep = json.loads(out)
    assert rc == 0 and rep["surface_distance"] == 2 and rep["copies"] == 4


def test_exit_codes(tmp_path, capsys):
    rc, _, err = run(capsys, "sweep", "--config", tmp_path / "missing.json")
    assert rc == 2 and "error" in err
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"family": {"k": 2, "sizes": [5]}, "p_grid": [0.5, 0.1]}))
    assert run(capsys, "sweep", "--config", bad)[0] == 2
    assert run(capsys, "rydberg", "--n-max", 30)[0] == 3
    dem = tmp_path / "d.dem"
    dem.write_text("# detectors 2 observables 1\nerror(0.1) D0 D1\nerror(0.1) D0 D1 L0\n")
    shots = tmp_path / "s.b8"
    ShotBatch(1, np.array([[True, False]]), np.array([[False]])).save(shots)
    assert run(capsys, "decode", "--dem", dem, "--shots", shots)[0] == 4
    with pytest.raises(SystemExit) as exc:
        main(["build-code"])
    assert exc.value.code == 2
