import itertools

import numpy as np
import pytest

from lacross.circuit import NoiseModel, build_syndrome_circuit, instrument
from lacross.codes import lacross_code, surface_code
from lacross.decoder import BpOsdDecoder, DecoderConfig, InvalidSyndrome, bp_minsum, decode_batch
from lacross.framesim import DetectorErrorModel, code_capacity_dem, extract_dem, sample
from lacross.gf2 import BinaryMatrix


def dem_from(h, priors, lo=None):
    h = np.asarray(h, dtype=np.uint8)
    lo = np.zeros((1, h.shape[1]), dtype=np.uint8) if lo is None else np.asarray(lo, dtype=np.uint8)
    return DetectorErrorModel(BinaryMatrix(h), BinaryMatrix(lo), np.asarray(priors, dtype=float))


REP3 = [[1, 1, 0], [0, 1, 1]]


@pytest.mark.parametrize("mode", ["off", "osd0", "combinationSweep"])
def test_zero_syndrome_gives_zero_correction(mode):
    dem = code_capacity_dem(surface_code(3), 0.05)
    res = BpOsdDecoder(dem, DecoderConfig(osd_mode=mode)).decode(np.zeros(dem.num_detectors))
    assert res.converged and not res.correction.any()


@pytest.mark.parametrize("syn,err", [((1, 0), 0), ((1, 1), 1), ((0, 1), 2)])
def test_repetition_code_ml(syn, err):
    res = BpOsdDecoder(dem_from(REP3, [0.1] * 3)).decode(syn)
    assert res.converged
    assert np.flatnonzero(res.correction).tolist() == [err]


def test_bp_exact_on_tree():
    # a path graph is a tree, so min-sum hard decisions are ML
    priors = [0.1, 0.05, 0.2]
    post, hard, conv = bp_minsum(dem_from(REP3, priors), [1, 0], DecoderConfig(bp_iterations=10))
    assert conv and hard.tolist() == [1, 0, 0]
    assert post[0] < 0 < post[1]


def test_degree_one_check_forces_variable():
    dem = dem_from([[1]], [0.01])
    post, hard, conv = bp_minsum(dem, [1])
    assert conv and hard.tolist() == [1]
    assert post[0] < -1e6


@pytest.mark.parametrize("error", ["X", "Z"])
def test_corrects_all_weight_one(error):
    code = surface_code(3)
    dem = code_capacity_dem(code, 0.05, error)
    dec = BpOsdDecoder(dem)
    h, lo = dem.H.view().astype(int), dem.L.view().astype(int)
    for q in range(-1, code.N):
        e = np.zeros(code.N, dtype=int)
        if q >= 0:
            e[q] = 1
        res = dec.decode((h @ e) % 2)
        assert np.array_equal(res.predicted_observables, (lo @ e) % 2 == 1)


def test_matches_most_likely_error_on_weight_two():
    code = surface_code(3)
    dem = code_capacity_dem(code, 0.05)
    h, lo = dem.H.view().astype(int), dem.L.view().astype(int)
    n = code.N
    errs = (np.arange(2**n)[:, None] >> np.arange(n)) & 1
    syn_key = ((errs @ h.T) % 2) @ (1 << np.arange(h.shape[0]))
    log_cls = ((errs @ lo.T) % 2)[:, 0]
    w = errs.sum(axis=1)
    dec = BpOsdDecoder(dem)
    ties = 0
    for sup in itertools.combinations(range(n), 2):
        e = np.zeros(n, dtype=int)
        e[list(sup)] = 1
        s = (h @ e) % 2
        m = syn_key == s @ (1 << np.arange(h.shape[0]))
        best = set(log_cls[m][w[m] == w[m].min()])
        res = dec.decode(s)
        assert res.correction.sum() == w[m].min()
        if len(best) > 1:
            ties += 1
            continue
        assert int(res.predicted_observables[0]) == best.pop()
    assert 0 < ties < 78


def test_order_zero_sweep_equals_osd0():
    code = lacross_code(5, 2)
    circ = instrument(build_syndrome_circuit(code, rounds=2), NoiseModel.hardware_specific(3e-3))
    dem = extract_dem(circ)
    batch = sample(circ, 400, seed=4)
    a = BpOsdDecoder(dem, DecoderConfig(osd_mode="combinationSweep", osd_order=0, cs_window=0))
    b = BpOsdDecoder(dem, DecoderConfig(osd_mode="osd0"))
    for s in batch.detector_bits[:200]:
        assert np.array_equal(a.decode(s).correction, b.decode(s).correction)


def test_llr_scaling_invariance():
    dem = code_capacity_dem(surface_code(3), 0.05)
    llr = np.log(0.95 / 0.05)
    scaled = dem_from(dem.H.view(), [1 / (1 + np.exp(2 * llr))] * dem.num_mechanisms, dem.L.view())
    rng = np.random.default_rng(7)
    a, b = BpOsdDecoder(dem), BpOsdDecoder(scaled)
    for _ in range(50):
        s = rng.integers(0, 2, dem.num_detectors)
        assert np.array_equal(a.decode(s).correction, b.decode(s).correction)


@pytest.fixture(scope="module")
def k3_batch():
    code = lacross_code(7, 3)
    circ = instrument(build_syndrome_circuit(code, rounds=4), NoiseModel.hardware_specific(3e-3))
    return extract_dem(circ), sample(circ, 3000, seed=9)


def test_osd_stages_improve(k3_batch):
    dem, batch = k3_batch
    fails = {mode: decode_batch(dem, batch, DecoderConfig(osd_mode=mode))[0]
             for mode in ("off", "osd0", "combinationSweep")}
    assert fails["combinationSweep"] <= fails["osd0"] < fails["off"]


def test_osd_output_satisfies_syndrome(k3_batch):
    dem, batch = k3_batch
    dec = BpOsdDecoder(dem)
    h = dem.H.view().astype(np.int64)
    for s in batch.detector_bits[:100]:
        res = dec.decode(s)
        assert np.array_equal((h @ res.correction) % 2, s.astype(int))
        post, _, _ = dec.bp(s)
        forced = dec.osd(s, post)
        assert np.array_equal((h @ forced.correction) % 2, s.astype(int))


def test_decode_many_matches_decode(k3_batch):
    dem, batch = k3_batch
    dec = BpOsdDecoder(dem)
    syn = batch.detector_bits[:64]
    pred, conv = dec.decode_many(syn)
    for i, s in enumerate(syn):
        res = dec.decode(s)
        assert np.array_equal(pred[i], res.predicted_observables)
        assert conv[i] == res.converged


def test_invalid_syndrome_raises():
    dem = dem_from([[1, 1], [1, 1]], [0.1, 0.1])
    dec = BpOsdDecoder(dem)
    with pytest.raises(InvalidSyndrome):
        dec.decode([1, 0])
    with pytest.raises(InvalidSyndrome):
        dec.decode_many(np.array([[0, 0], [1, 0]]))
    with pytest.raises(ValueError):
        dec.decode([1, 0, 1])


def test_config_validation():
    with pytest.raises(ValueError):
        DecoderConfig(scaling_factor=0)
    with pytest.raises(ValueError):
        DecoderConfig(osd_mode="exhaustive")
    with pytest.raises(ValueError):
        DecoderConfig(bp_iterations=0)
    assert DecoderConfig.surface().scaling_factor == 0.625
