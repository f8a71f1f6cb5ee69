import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lacross.codes import (
    build_seed,
    check_qubit,
    code_from_text,
    code_to_text,
    distance_bruteforce,
    hypergraph_product,
    lacross_code,
    surface_code,
)


def commute(code):
    return not ((code.hx.view().astype(int) @ code.hz.view().T.astype(int)) % 2).any()


def test_surface_code_13():
    code = surface_code(3)
    assert code.params == (13, 1, 3)
    assert distance_bruteforce(code, 4) == 3


def test_k3_n7_is_65_9_4():
    code = lacross_code(7, 3, "obc")
    assert (code.N, code.K) == (65, 9)
    assert code.with_distance(5).D == 4


def test_poly_1_x3_sizes():
    for boundary, N in (("pbc", 162), ("obc", 117)):
        seed = build_seed(9, 3, boundary, poly=(0, 3))
        assert hypergraph_product(seed, seed).N == N


@pytest.mark.parametrize("n,params", [(5, (34, 4, 3)), (6, (52, 4, 4)), (8, (100, 4, 5))])
def test_k2_family(n, params):
    code = lacross_code(n, 2, "obc")
    assert (code.N, code.K) == params[:2]
    assert code.D == params[2]


def test_pbc_seed_is_circulant():
    seed = build_seed(6, 2, "pbc")
    h = seed.H.to_dense()
    assert h.shape == (6, 6)
    assert np.array_equal(np.roll(h, 1, axis=0), np.roll(h, -1, axis=1))


def test_seed_validation():
    with pytest.raises(ValueError):
        build_seed(3, 3)
    with pytest.raises(ValueError):
        build_seed(5, 2, "open")
    with pytest.raises(ValueError):
        hypergraph_product(build_seed(5, 2, "obc"), build_seed(5, 2, "pbc"))


@settings(max_examples=20)
@given(st.integers(2, 4), st.integers(0, 12), st.sampled_from(["obc", "pbc"]))
def test_structural_invariants(k, n, boundary):
    n = max(n, k + 1)
    code = lacross_code(n, k, boundary)
    assert commute(code)
    K = code.K
    overlap = (code.logicals_x.astype(int) @ code.logicals_z.T.astype(int)) % 2
    assert np.array_equal(overlap, np.eye(K, dtype=int))
    assert code.hx.view().sum(axis=1).max() <= 6
    assert code.hz.view().sum(axis=1).max() <= 6
    # logicals commute with the opposite-type stabilizers
    assert not ((code.hz.view().astype(int) @ code.logicals_x.T) % 2).any()
    assert not ((code.hx.view().astype(int) @ code.logicals_z.T) % 2).any()


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_layout_ranges(k):
    code = lacross_code(2 * k + 3, k, "obc")
    lay = code.layout
    ranges = set()
    for kind, h in (("X", code.hx), ("Z", code.hz)):
        for row in range(h.rows):
            anc = check_qubit(code, kind, row)
            ranges |= {lay.distance(anc, q) for q in h.row_support(row)}
    assert ranges == ({1} if k == 1 else {1, 2 * k - 1})


def test_layout_roles_and_unique_sites():
    code = lacross_code(7, 3)
    lay = code.layout
    assert lay.num_qubits == code.N + code.num_x_checks + code.num_z_checks
    assert len({tuple(c) for c in lay.coords.tolist()}) == lay.num_qubits
    assert lay.roles.count("data") == code.N


def test_squeezed_never_longer():
    code = lacross_code(7, 3, "obc")
    sq = code.with_layout("squeezed").layout
    for q1 in range(0, sq.num_qubits, 7):
        for q2 in range(0, sq.num_qubits, 5):
            assert sq.distance(q1, q2) <= code.layout.distance(q1, q2)


def test_pbc_distances_wrap():
    code = lacross_code(6, 2, "pbc")
    lay = code.layout
    assert lay.period == (12, 12)
    assert max(lay.distance(0, q) for q in range(lay.num_qubits)) <= 6


def test_text_roundtrip(tmp_path):
    code = lacross_code(6, 2).with_distance(5)
    back = code_from_text(code_to_text(code))
    assert back.hx == code.hx and back.hz == code.hz
    assert np.array_equal(back.logicals_x, code.logicals_x)
    assert back.params == code.params
    assert np.array_equal(back.layout.coords, code.layout.coords)
    assert back.layout.roles == code.layout.roles


def test_distance_bound_none_below_true_distance():
    assert distance_bruteforce(surface_code(4), 3) is None
