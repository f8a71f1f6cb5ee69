import numpy as np
import pytest

from lacross.circuit import (
    PAPER_C_TABLE,
    NoiseModel,
    build_syndrome_circuit,
    circuit_from_text,
    circuit_to_text,
    instrument,
    schedule_cnots,
)
from lacross.codes import lacross_code, surface_code
from lacross.framesim import fault_signatures, sample


def one_round_layers(circ):
    layers = circ.gate_layers()
    per_round = len(layers) // circ.rounds
    return layers[:per_round]


@pytest.mark.parametrize("k,depth", [(1, 6), (2, 10), (3, 10), (4, 10)])
def test_round_depth(k, depth):
    code = lacross_code(2 * k + 3, k)
    circ = build_syndrome_circuit(code, rounds=2)
    assert len(one_round_layers(circ)) == depth


@pytest.mark.parametrize("k", [2, 3])
def test_layers_are_disjoint_and_cover_checks(k):
    code = lacross_code(2 * k + 3, k)
    layers = schedule_cnots(code)
    for pairs in layers:
        used = [q for pair in pairs for q in pair]
        assert len(used) == len(set(used))
    coupled = sorted(p for pairs in layers for p in pairs)
    assert len(coupled) == code.hx.nnz + code.hz.nnz


def test_arm_layers_hold_only_long_gates():
    code = lacross_code(7, 3)
    circ = build_syndrome_circuit(code, rounds=1)
    ranges = [set(ins.ranges) for ins in circ.instructions if ins.name == "CX"]
    assert ranges[0] == {5} and ranges[1] == {5}
    assert ranges[-1] == {5} and ranges[-2] == {5}
    assert all(r == {1} for r in ranges[2:6])


@pytest.mark.parametrize("basis", ["Z", "X"])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_detectors_deterministic(k, basis):
    code = lacross_code(2 * k + 2, k)
    circ = build_syndrome_circuit(code, rounds=2, basis=basis)
    noisy = instrument(circ, NoiseModel.hardware_agnostic(1e-3))
    fault_signatures(noisy)  # raises on a non-deterministic detector
    batch = sample(circ, 64, seed=3)
    assert not batch.detector_bits.any() and not batch.observable_bits.any()


def test_detector_counts():
    code = surface_code(3)
    circ = build_syndrome_circuit(code, rounds=3)
    assert circ.num_detectors == code.num_z_checks * 4
    assert circ.num_observables == 1
    assert circ.num_measurements == 3 * (code.num_x_checks + code.num_z_checks) + code.N


def test_hardware_specific_values():
    m = NoiseModel.hardware_specific(0.002)
    assert m.p1 == pytest.approx(2e-4)
    assert m.p_prep == pytest.approx(4e-3) and m.p_meas == pytest.approx(4e-3)
    assert m.p2(1) == pytest.approx(2e-3)
    assert m.p2(3) == pytest.approx(5e-3)
    with pytest.raises(ValueError):
        m.p2(9)


def test_hardware_agnostic_values():
    m = NoiseModel.hardware_agnostic(0.003)
    assert (m.p1, m.p_prep, m.p_meas) == (0.003, 0.0, 0.0)
    assert m.p2(7) == 0.003


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel.from_name("thermal", 0.001)
    with pytest.raises(ValueError):
        NoiseModel.hardware_specific(0.2)  # 7.5 p > 1
    with pytest.raises(ValueError):
        NoiseModel.hardware_specific(0.001, {1: 1.0, 2: 0.5})
    with pytest.raises(ValueError):
        NoiseModel.hardware_specific(0.001, {1: 2.0})


def test_missing_range_constant_raises():
    code = lacross_code(7, 3)
    circ = build_syndrome_circuit(code, rounds=1)
    with pytest.raises(ValueError):
        instrument(circ, NoiseModel.hardware_specific(1e-3, {1: 1.0, 2: 1.6, 3: 2.5}))


def test_channel_audit_34_4_3():
    code = lacross_code(5, 2)
    circ = instrument(build_syndrome_circuit(code), NoiseModel.hardware_specific(1e-3))
    cx_ranges = np.concatenate([ins.ranges for ins in circ.instructions if ins.name == "CX"])
    assert (cx_ranges == 1).sum() == 288 and (cx_ranges == 3).sum() == 144
    dep2 = {}
    for ins in circ.instructions:
        if ins.name == "DEP2":
            dep2[ins.arg] = dep2.get(ins.arg, 0) + len(ins.targets) // 2
    assert min(dep2) == pytest.approx(1e-3) and max(dep2) == pytest.approx(PAPER_C_TABLE[3] * 1e-3)
    assert dep2[min(dep2)] == 288 and dep2[max(dep2)] == 144
    with pytest.raises(ValueError):
        instrument(circ, NoiseModel.hardware_agnostic(1e-3))


def test_text_roundtrip():
    code = lacross_code(5, 2)
    circ = instrument(build_syndrome_circuit(code, rounds=2), NoiseModel.hardware_specific(1e-3))
    text = circuit_to_text(circ)
    back = circuit_from_text(text)
    assert circuit_to_text(back) == text
    assert back.detectors == circ.detectors and back.observables == circ.observables
    assert back.num_measurements == circ.num_measurements


def test_bad_inputs():
    code = surface_code(3)
    with pytest.raises(ValueError):
        build_syndrome_circuit(code, rounds=0)
    with pytest.raises(ValueError):
        build_syndrome_circuit(code, basis="Y")
    with pytest.raises(ValueError):
        circuit_from_text("FOO 1 2\n")
