"""Logical error statistics, threshold location, power-law fits and crossing points."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np
from scipy.optimize import brentq

CSV_COLUMNS = ("family", "k", "n", "N", "K", "D", "noise", "p", "shots", "failures", "p_L", "P_L", "stderr")


_ONE_MINUS = float(np.nextafter(1.0, 0.0))


class NoCrossing(ValueError):
    pass


class InsufficientData(ValueError):
    pass


class DegenerateExponents(ValueError):
    pass


def per_round_logical(p_L, D):
    """P_L = 1 - (1 - p_L)^(1/D)."""
    p_L = np.asarray(p_L, dtype=np.float64)
    if np.any((p_L < 0) | (p_L > 1)) or D < 1:
        raise ValueError("need 0 <= p_L <= 1 and D >= 1")
    out = -np.expm1(np.log1p(-np.minimum(p_L, _ONE_MINUS)) / D)
    out = np.where(p_L >= 1, 1.0, out)
    return float(out) if out.ndim == 0 else out


def accumulate_rounds(P_L, D):
    """Inverse of :func:`per_round_logical`: 1 - (1 - P_L)^D."""
    P_L = np.asarray(P_L, dtype=np.float64)
    out = -np.expm1(D * np.log1p(-np.minimum(P_L, _ONE_MINUS)))
    out = np.where(P_L >= 1, 1.0, out)
    return float(out) if out.ndim == 0 else out


def effective_distance(D: int) -> int:
    return (D + 1) // 2


def beta_surface(K: int) -> float:
    """Exponent coefficient of K unrotated surface-code copies sharing N qubits."""
    return 1.0 / (2.0 * math.sqrt(2.0 * K))


def lambda_k(N: int, D: int, k: int) -> float:
    """Solve N = (lambda D - k)^2 + (lambda D)^2 for lambda."""
    return (k + math.sqrt(2 * N - k * k)) / 2.0 / D


@dataclass(frozen=True, eq=False)
class DecodingCurve:
    family: str
    k: int
    n: int
    N: int
    K: int
    D: int
    noise: str
    rounds: int
    p: np.ndarray = field(repr=False)
    shots: np.ndarray = field(repr=False)
    failures: np.ndarray = field(repr=False)
    P_L: np.ndarray = field(repr=False)
    stderr: np.ndarray = field(repr=False)

    @classmethod
    def from_counts(cls, family, k, n, N, K, D, noise, rounds, p, shots, failures) -> "DecodingCurve":
        p = np.asarray(p, dtype=np.float64)
        order = np.argsort(p, kind="stable")
        p = p[order]
        shots = np.asarray(shots, dtype=np.int64)[order]
        failures = np.asarray(failures, dtype=np.int64)[order]
        if np.any(shots < 1) or np.any(failures < 0) or np.any(failures > shots):
            raise ValueError("need shots >= 1 and 0 <= failures <= shots")
        p_L = failures / shots
        P = per_round_logical(p_L, rounds)
        P = np.atleast_1d(P)
        err = np.sqrt(P * (1 - P) / shots)
        return cls(family, k, n, N, K, D, noise, rounds, p, shots, failures, P, err)

    @property
    def p_L(self) -> np.ndarray:
        return self.failures / self.shots

    @property
    def label(self) -> str:
        return f"{self.family}[[{self.N},{self.K},{self.D}]]"

    def rows(self) -> list[dict]:
        out = []
        for i in range(len(self.p)):
            out.append({
                "family": self.family, "k": self.k, "n": self.n, "N": self.N, "K": self.K, "D": self.D,
                "noise": self.noise, "p": repr(float(self.p[i])), "shots": int(self.shots[i]),
                "failures": int(self.failures[i]), "p_L": repr(float(self.p_L[i])),
                "P_L": repr(float(self.P_L[i])), "stderr": repr(float(self.stderr[i])),
            })
        return out


def sc_family_curve(single: DecodingCurve, K: int) -> DecodingCurve:
    """K independent copies: P = 1 - (1 - P1)^K with propagated error."""
    if K < 1:
        raise ValueError("K must be >= 1")
    P1, s1 = single.P_L, single.stderr
    P = -np.expm1(K * np.log1p(-np.minimum(P1, _ONE_MINUS)))
    err = K * (1 - P1) ** (K - 1) * s1
    return replace(single, K=single.K * K, N=single.N * K, P_L=P, stderr=err,
                   family=f"{single.family}x{K}")


# ---------------------------------------------------------------- thresholds


def _usable(c: DecodingCurve):
    ok = c.P_L > 0
    return np.log(c.p[ok]), np.log(c.P_L[ok])


def curve_crossings(a: DecodingCurve, b: DecodingCurve) -> list[float]:
    """Crossings of two curves under log-log linear interpolation."""
    xa, ya = _usable(a)
    xb, yb = _usable(b)
    if len(xa) < 2 or len(xb) < 2:
        return []
    lo, hi = max(xa[0], xb[0]), min(xa[-1], xb[-1])
    if lo >= hi:
        return []
    grid = np.union1d(xa[(xa >= lo) & (xa <= hi)], xb[(xb >= lo) & (xb <= hi)])
    grid = np.union1d(grid, [lo, hi])
    diff = np.interp(grid, xa, ya) - np.interp(grid, xb, yb)
    out = []
    for i in range(len(grid) - 1):
        d0, d1 = diff[i], diff[i + 1]
        if d0 == 0:
            out.append(math.exp(grid[i]))
        elif d0 * d1 < 0:
            t = d0 / (d0 - d1)
            out.append(math.exp(grid[i] + t * (grid[i + 1] - grid[i])))
    if diff[-1] == 0:
        out.append(math.exp(grid[-1]))
    return sorted(set(out))


@dataclass(frozen=True)
class ThresholdEstimate:
    p_th: float
    low: float
    high: float
    crossings: tuple[tuple[int, int, float], ...]

    @property
    def midpoint(self) -> float:
        return math.sqrt(self.low * self.high)

    @property
    def width(self) -> float:
        return self.high - self.low


def estimate_threshold(curves) -> ThresholdEstimate:
    """Threshold from pairwise crossings; the two largest codes set ``p_th``.

    ``low``/``high`` bracket all pairwise crossings.  Input order does not
    matter.
    """
    curves = sorted(curves, key=lambda c: (c.N, c.D, c.n))
    if len(curves) < 2:
        raise InsufficientData("need at least two curves")
    found = []
    for (i, a), (j, b) in combinations(enumerate(curves), 2):
        for x in curve_crossings(a, b):
            found.append((curves[i].N, curves[j].N, x))
    if not found:
        raise NoCrossing("curves do not cross in the sampled range")
    top = [x for na, nb, x in found if na == curves[-2].N and nb == curves[-1].N]
    xs = [x for _, _, x in found]
    p_th = top[0] if len(top) == 1 else float(np.exp(np.median(np.log(top if top else xs))))
    return ThresholdEstimate(p_th, min(xs), max(xs), tuple(found))


# ---------------------------------------------------------------- fits


@dataclass(frozen=True)
class SubthresholdFit:
    A: float
    p_th: float
    slope: float
    slope_stderr: float
    D_e: int
    A_fixed: float
    fixed_exponent: float
    beta: float
    lambda_k: float
    residual: float
    points: int

    def to_json(self) -> dict:
        return {"A": self.A, "p_th": self.p_th, "D_e": self.D_e, "beta": self.beta,
                "lambda_k": self.lambda_k, "residual": self.residual, "slope": self.slope,
                "slope_stderr": self.slope_stderr, "A_fixed": self.A_fixed,
                "fixed_exponent": self.fixed_exponent, "points": self.points}


def _wls(x, y, w):
    W = np.sum(w)
    xm, ym = np.sum(w * x) / W, np.sum(w * y) / W
    sxx = np.sum(w * (x - xm) ** 2)
    slope = np.sum(w * (x - xm) * (y - ym)) / sxx
    icpt = ym - slope * xm
    res = y - (icpt + slope * x)
    dof = max(len(x) - 2, 1)
    chi2 = np.sum(w * res**2)
    s_slope = math.sqrt(chi2 / dof / sxx) if len(x) > 2 else float("nan")
    return slope, icpt, res, s_slope


def fit_power_law(p, P_L, p_th, weights=None):
    """(A, slope, slope_stderr, residual) for log P_L = log A + slope log(p/p_th)."""
    x = np.log(np.asarray(p, dtype=np.float64) / p_th)
    y = np.log(np.asarray(P_L, dtype=np.float64))
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=np.float64)
    if len(x) < 2 or np.ptp(x) == 0:
        raise InsufficientData("need at least two distinct points")
    slope, icpt, res, s_slope = _wls(x, y, w)
    resid = float(math.sqrt(np.sum(w * res**2) / np.sum(w)))
    return math.exp(icpt), float(slope), s_slope, resid


def fit_subthreshold(curve: DecodingCurve, p_th: float, alpha: float | None = None) -> SubthresholdFit:
    """Weighted fit of P_L = A (p/p_th)^slope on sub-threshold, nonzero points.

    The constrained fit fixes the exponent to D_e, or to alpha*D when
    ``alpha`` is given.
    """
    ok = (curve.p < p_th) & (curve.failures > 0)
    if ok.sum() < 2:
        raise InsufficientData(f"{int(ok.sum())} usable sub-threshold points")
    p, P, err = curve.p[ok], curve.P_L[ok], curve.stderr[ok]
    rel = err / P
    w = 1.0 / np.maximum(rel, 1e-12) ** 2
    A, slope, s_slope, resid = fit_power_law(p, P, p_th, w)
    D_e = effective_distance(curve.D)
    fixed = alpha * curve.D if alpha is not None else float(D_e)
    x = np.log(p / p_th)
    y = np.log(P)
    A_fixed = math.exp(np.sum(w * (y - fixed * x)) / np.sum(w))
    return SubthresholdFit(
        A=A, p_th=p_th, slope=slope, slope_stderr=s_slope, D_e=D_e, A_fixed=A_fixed,
        fixed_exponent=fixed, beta=slope / math.sqrt(curve.N),
        lambda_k=lambda_k(curve.N, curve.D, curve.k), residual=resid, points=int(ok.sum()),
    )


# ---------------------------------------------------------------- crossing point


@dataclass(frozen=True)
class CrossingReport:
    p_star: float
    p_star_limit: float
    p_star_empirical: float | None = None


def crossing_point(A_ldpc, pth_ldpc, beta_ldpc, A_sc, pth_sc, beta_sc, N) -> CrossingReport:
    """Closed-form p* where A_sc (p/pth_sc)^(b_sc sqrt N) = A_ldpc (p/pth_ldpc)^(b_ldpc sqrt N)."""
    db = beta_sc - beta_ldpc
    if db == 0:
        raise DegenerateExponents("beta_sc equals beta_ldpc")
    # evaluated in logs: limit = (pth_sc^b_sc / pth_ldpc^b_ldpc)^(1/db), factor = (A_ldpc/A_sc)^(1/(db sqrt N))
    log_limit = (beta_sc * math.log(pth_sc) - beta_ldpc * math.log(pth_ldpc)) / db
    log_factor = (math.log(A_ldpc) - math.log(A_sc)) / (db * math.sqrt(N))
    return CrossingReport(math.exp(log_limit + log_factor), math.exp(log_limit))


def crossing_point_numeric(A_ldpc, pth_ldpc, beta_ldpc, A_sc, pth_sc, beta_sc, N) -> float:
    """Root of the log-difference of the two power laws, by bracketing in log p."""
    rn = math.sqrt(N)

    def f(lp):
        return (math.log(A_sc) + beta_sc * rn * (lp - math.log(pth_sc))
                - math.log(A_ldpc) - beta_ldpc * rn * (lp - math.log(pth_ldpc)))

    lo, hi = -1.0, 1.0
    while f(lo) * f(hi) > 0:
        lo, hi = lo * 2, hi * 2
        if hi > 1e6:
            raise DegenerateExponents("no sign change")
    return math.exp(brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500))


def empirical_crossing(ldpc: DecodingCurve, sc: DecodingCurve) -> float | None:
    xs = curve_crossings(ldpc, sc)
    return xs[0] if xs else None


# ---------------------------------------------------------------- csv


def write_csv(curves, path, append: bool = False) -> None:
    mode = "a" if append else "w"
    with open(path, mode, newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        if not append or fh.tell() == 0:
            w.writeheader()
        for c in curves:
            w.writerows(c.rows())


def read_csv(path) -> list[DecodingCurve]:
    """Group CSV rows into curves keyed by (family, k, n, N, K, D, noise).

    P_L and stderr are taken from the file; the rounds count is recovered
    from p_L and P_L (falling back to D when every point is failure-free).
    """
    groups: dict[tuple, list[dict]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["family"], int(row["k"]), int(row["n"]), int(row["N"]), int(row["K"]),
                   int(row["D"]), row["noise"])
            groups.setdefault(key, []).append(row)
    curves = []
    for key, rows in groups.items():
        family, k, n, N, K, D, noise = key
        rows = sorted(rows, key=lambda r: float(r["p"]))
        rounds = D
        for r in rows:
            pl, Pl = float(r["p_L"]), float(r["P_L"])
            if 0 < Pl < 1 and 0 < pl < 1:
                rounds = int(round(math.log1p(-pl) / math.log1p(-Pl)))
                break
        c = DecodingCurve.from_counts(
            family, k, n, N, K, D, noise, rounds,
            [float(r["p"]) for r in rows], [int(r["shots"]) for r in rows], [int(r["failures"]) for r in rows])
        curves.append(replace(c, P_L=np.array([float(r["P_L"]) for r in rows]),
                              stderr=np.array([float(r["stderr"]) for r in rows])))
    return curves
