import json

import pytest

from lacross.analysis import read_csv
from lacross.decoder import DecoderConfig
from lacross.experiment import (
    ConfigError,
    ExperimentConfig,
    FamilySpec,
    NoMatchingPartition,
    point_seed,
    run_memory_experiment,
    run_point,
    surface_partition,
)
from lacross.circuit import NoiseModel
from lacross.codes import surface_code


def small_config(tmp_path, **kw):
    base = dict(family=FamilySpec(1, (3,), name="surface"), p_grid=(0.004, 0.008), noise="ag",
                max_shots=2048, max_errors=50, seed=7, output_csv=str(tmp_path / "out.csv"))
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_validation():
    fam = FamilySpec(2, (5,))
    with pytest.raises(ConfigError):
        ExperimentConfig(fam, (0.003, 0.001))
    with pytest.raises(ConfigError):
        ExperimentConfig(fam, (0.0,))
    with pytest.raises(ConfigError):
        ExperimentConfig(fam, (0.001,), noise="thermal")
    with pytest.raises(ConfigError):
        ExperimentConfig(fam, (0.001,), max_shots=0)
    with pytest.raises(ConfigError):
        FamilySpec(0, (5,))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"family": {"k": 2}, "p_grid": [0.001]})


def test_config_json_roundtrip(tmp_path):
    cfg = ExperimentConfig(FamilySpec(2, (5, 6)), (0.001, 0.002), decoder=DecoderConfig(osd_order=2))
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.load(path) == cfg
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(path)


def test_point_seed_depends_on_content():
    a = point_seed(1, {"n": 5, "p": 0.001})
    assert a == point_seed(1, {"p": 0.001, "n": 5})
    assert a != point_seed(2, {"n": 5, "p": 0.001})
    assert a != point_seed(1, {"n": 6, "p": 0.001})


def test_max_errors_and_shots_honoured():
    code = surface_code(3)
    res = run_point(code, NoiseModel.hardware_agnostic(0.02), 3, DecoderConfig(), 5, 50_000, 40)
    assert 40 <= res.failures and res.shots < 50_000
    res = run_point(code, NoiseModel.hardware_agnostic(0.001), 3, DecoderConfig(), 5, 1500, 10**6)
    assert res.shots == 1500


def test_sweep_is_byte_identical(tmp_path):
    a = small_config(tmp_path, output_csv=str(tmp_path / "a.csv"))
    b = small_config(tmp_path, output_csv=str(tmp_path / "b.csv"))
    run_memory_experiment(a)
    run_memory_experiment(b)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    c = small_config(tmp_path, seed=8, output_csv=str(tmp_path / "c.csv"))
    run_memory_experiment(c)
    assert (tmp_path / "a.csv").read_bytes() != (tmp_path / "c.csv").read_bytes()


def test_manifest_resume(tmp_path):
    manifest = tmp_path / "m.json"
    first = small_config(tmp_path, manifest=str(manifest), p_grid=(0.004,))
    run_memory_experiment(first)
    done = json.loads(manifest.read_text())["points"]
    assert len(done) == 1
    # tamper with the stored point: a resumed sweep must reuse it rather than resample
    key = next(iter(done))
    done[key] = {"shots": 1000, "failures": 1}
    manifest.write_text(json.dumps({"config_hash": "", "points": done}))
    full = small_config(tmp_path, manifest=str(manifest))
    (curve,) = run_memory_experiment(full)
    assert curve.shots[0] == 1000 and curve.failures[0] == 1
    assert len(json.loads(manifest.read_text())["points"]) == 2


def test_surface_distance_ordering(tmp_path):
    cfg = small_config(tmp_path, family=FamilySpec(1, (3, 5), name="surface"), p_grid=(0.002,),
                       max_shots=20_000, max_errors=100)
    c3, c5 = run_memory_experiment(cfg)
    assert c5.P_L[0] < c3.P_L[0]
    curves = read_csv(cfg.output_csv)
    assert [c.N for c in curves] == [13, 41]


def test_surface_partition():
    assert surface_partition(65, 9) == 2
    assert surface_partition(100, 4) == 4
    assert surface_partition(34, 4) == 2
    assert surface_partition(13, 1) == 3
    with pytest.raises(NoMatchingPartition):
        surface_partition(30, 9)


def test_shipped_configs_load():
    from pathlib import Path

    paths = sorted((Path(__file__).parent.parent / "configs").glob("*.json"))
    assert paths
    for path in paths:
        ExperimentConfig.load(path)
