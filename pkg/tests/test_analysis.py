import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lacross.analysis import (
    DecodingCurve,
    DegenerateExponents,
    InsufficientData,
    NoCrossing,
    accumulate_rounds,
    beta_surface,
    crossing_point,
    crossing_point_numeric,
    curve_crossings,
    effective_distance,
    estimate_threshold,
    fit_power_law,
    fit_subthreshold,
    lambda_k,
    per_round_logical,
    read_csv,
    sc_family_curve,
    write_csv,
)


def synthetic_curve(N, D, p, A, p_th, slope, shots=10**9, rounds=1, k=2):
    P = A * (np.asarray(p) / p_th) ** slope
    fails = np.round(P * shots).astype(np.int64)
    return DecodingCurve.from_counts("syn", k, N, N, 4, D, "hw", rounds, p, [shots] * len(p), fails)


def test_per_round_identities():
    assert per_round_logical(0.0, 5) == 0.0
    assert per_round_logical(1.0, 5) == 1.0
    assert per_round_logical(0.3, 1) == pytest.approx(0.3)
    assert per_round_logical(1 - 0.9**4, 4) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        per_round_logical(1.2, 3)


@given(st.floats(0, 0.999), st.integers(1, 20))
def test_per_round_inverse(p, D):
    assert accumulate_rounds(per_round_logical(p, D), D) == pytest.approx(p, abs=1e-12)


def test_sc_family_combination():
    single = DecodingCurve.from_counts("surface", 1, 2, 5, 1, 2, "hw", 1, [0.001], [10**6], [1000])
    nine = sc_family_curve(single, 9)
    assert nine.P_L[0] == pytest.approx(8.964e-3, rel=1e-3)
    assert nine.N == 45 and nine.K == 9
    assert nine.stderr[0] == pytest.approx(9 * 0.999**8 * single.stderr[0])


def test_geometry_helpers():
    assert beta_surface(9) == pytest.approx(0.11785, abs=1e-5)
    assert [effective_distance(d) for d in (3, 4, 5)] == [2, 2, 3]
    lam = lambda_k(65, 4, 3)
    assert (lam * 4 - 3) ** 2 + (lam * 4) ** 2 == pytest.approx(65)


def test_synthetic_threshold():
    p = np.geomspace(1e-3, 1e-2, 9)
    # curves of the form a_i (p/p_th)^s_i all meet at p_th when a_i are equal
    curves = [synthetic_curve(N, D, p, 0.01, 4e-3, s) for N, D, s in ((34, 3, 2), (52, 4, 3), (100, 5, 4))]
    th = estimate_threshold(curves)
    assert th.p_th == pytest.approx(4e-3, rel=1e-3)
    assert th.low <= th.p_th <= th.high
    assert estimate_threshold(curves[::-1]).p_th == th.p_th


def test_no_crossing():
    p = np.geomspace(1e-3, 1e-2, 5)
    a = synthetic_curve(34, 3, p, 0.05, 1e-1, 2)
    b = synthetic_curve(52, 4, p, 0.01, 1e-1, 2)
    assert curve_crossings(a, b) == []
    with pytest.raises(NoCrossing):
        estimate_threshold([a, b])
    with pytest.raises(InsufficientData):
        estimate_threshold([a])


def test_synthetic_fit_exact():
    p = np.geomspace(5e-4, 2e-3, 6)
    A, slope, _, resid = fit_power_law(p, 0.07 * (p / 3e-3) ** 2.37, 3e-3)
    assert slope == pytest.approx(2.37, rel=1e-6)
    assert A == pytest.approx(0.07, rel=1e-6)
    assert resid < 1e-9


def test_fit_subthreshold_uses_only_subthreshold_points():
    p = np.geomspace(5e-4, 8e-3, 8)
    c = synthetic_curve(65, 4, p, 0.02, 3e-3, 2.0)
    fit = fit_subthreshold(c, 3e-3)
    assert fit.points == int((p < 3e-3).sum())
    assert fit.slope == pytest.approx(2.0, rel=1e-3)
    assert fit.D_e == 2 and fit.fixed_exponent == 2.0
    assert fit.beta == pytest.approx(fit.slope / math.sqrt(65))
    with pytest.raises(InsufficientData):
        fit_subthreshold(c, 5e-4)


def test_closed_form_matches_root_finder():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        A_l, A_s = 10 ** rng.uniform(-3, 1, 2)
        pth_l, pth_s = 10 ** rng.uniform(-3, -1.5, 2)
        b_l, b_s = rng.uniform(0.05, 0.6, 2)
        if abs(b_l - b_s) < 1e-3:
            continue
        N = int(rng.integers(10, 10**4))
        closed = crossing_point(A_l, pth_l, b_l, A_s, pth_s, b_s, N).p_star
        numeric = crossing_point_numeric(A_l, pth_l, b_l, A_s, pth_s, b_s, N)
        assert closed == pytest.approx(numeric, rel=1e-10)


def test_crossing_point_decreasing_with_positive_limit():
    args = dict(A_ldpc=0.05, pth_ldpc=4e-3, beta_ldpc=0.25, A_sc=0.1, pth_sc=8e-3, beta_sc=beta_surface(9))
    ps = [crossing_point(N=N, **args).p_star for N in (50, 100, 400, 1600, 10**4, 10**6)]
    assert all(b < a for a, b in zip(ps, ps[1:]))
    limit = crossing_point(N=100, **args).p_star_limit
    assert 0 < limit < ps[-1]
    assert ps[-1] == pytest.approx(limit, rel=1e-2)


def test_degenerate_exponents():
    with pytest.raises(DegenerateExponents):
        crossing_point(0.1, 1e-2, 0.2, 0.2, 1e-2, 0.2, 100)


def test_csv_roundtrip(tmp_path):
    p = [1e-3, 2e-3, 4e-3]
    c = DecodingCurve.from_counts("lacross", 2, 5, 34, 4, 3, "hw", 3, p, [1000, 2000, 3000], [3, 40, 900])
    path = tmp_path / "out.csv"
    write_csv([c], path)
    (back,) = read_csv(path)
    assert back.rounds == 3 and back.label == c.label
    assert np.array_equal(back.p, c.p)
    assert np.array_equal(back.failures, c.failures)
    assert np.allclose(back.P_L, c.P_L, rtol=0, atol=0)
    write_csv([c], path, append=True)
    assert len(path.read_text().splitlines()) == 1 + 6
