"""Cyclic seed codes, their hypergraph product and the lattice layout.

Qubit ordering of a product code is fixed: the ``n1*n2`` primal qubits
``(a, b)`` in row-major order, then the ``r1*r2`` dual qubits ``(c, d)``.
X checks are indexed ``(c, b)`` and Z checks ``(a, d)``, both row-major.

The layout interleaves everything on one square lattice like an unrotated
surface code::

    primal (a, b) -> (2a, 2b)        X ancilla (c, b) -> (2c+1, 2b)
    dual   (c, d) -> (2c+1, 2d+1)    Z ancilla (a, d) -> (2a, 2d+1)

so one step of a seed code is two lattice sites, and the seed offset ``k``
turns into an arm of ``2k-1`` sites.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable

import numpy as np

from . import gf2
from .gf2 import BinaryMatrix

BOUNDARIES = ("pbc", "obc")
LAYOUT_MODES = ("pbc", "obc", "squeezed")


def lacross_poly(k: int) -> tuple[int, ...]:
    """Exponents of h(x) = 1 + x + x^k (k=1 gives the repetition code 1 + x)."""
    return tuple(sorted({0, 1, k}))


@dataclass(frozen=True)
class SeedCode:
    n: int
    poly: tuple[int, ...]
    boundary: str
    H: BinaryMatrix = field(repr=False)

    @property
    def degree(self) -> int:
        return max(self.poly)

    @property
    def r(self) -> int:
        return self.H.rows

    @cached_property
    def k_logical(self) -> int:
        return self.n - gf2.rank(self.H)

    @cached_property
    def k_transpose(self) -> int:
        return self.r - gf2.rank(self.H)

    @cached_property
    def distance(self) -> int | None:
        """Minimum codeword weight of ker(H); None when the code is trivial."""
        return classical_distance(self.H)

    @cached_property
    def transpose_distance(self) -> int | None:
        return classical_distance(self.H.T)


def build_seed(n: int, k: int, boundary: str = "obc", poly: Iterable[int] | None = None) -> SeedCode:
    """Parity checks of the cyclic code with polynomial ``poly`` (default 1+x+x^k).

    PBC gives the ``n x n`` circulant; OBC keeps the ``n - deg`` shifts that do
    not wrap around.
    """
    if boundary not in BOUNDARIES:
        raise ValueError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got n={n}, k={k}")
    exps = tuple(sorted(set(lacross_poly(k) if poly is None else poly)))
    if exps[0] != 0 or exps[-1] >= n:
        raise ValueError(f"polynomial exponents {exps} invalid for n={n}")
    deg = exps[-1]
    rows = n if boundary == "pbc" else n - deg
    h = np.zeros((rows, n), dtype=np.uint8)
    for i in range(rows):
        for e in exps:
            h[i, (i + e) % n] ^= 1
    return SeedCode(n=n, poly=exps, boundary=boundary, H=BinaryMatrix(h))


def classical_distance(h: BinaryMatrix, max_dim: int = 22) -> int | None:
    basis = gf2.kernel_basis(h)
    dim = basis.shape[0]
    if dim == 0:
        return None
    if dim > max_dim:
        raise ValueError(f"kernel dimension {dim} too large for enumeration")
    coeffs = ((np.arange(1, 2**dim)[:, None] >> np.arange(dim)) & 1).astype(np.int64)
    words = (coeffs @ basis.astype(np.int64)) & 1
    return int(words.sum(axis=1).min())


@dataclass(frozen=True, eq=False)
class QubitLayout:
    """Lattice coordinates for data qubits followed by X then Z ancillas."""

    coords: np.ndarray = field(repr=False)
    roles: tuple[str, ...] = field(repr=False)
    mode: str
    period: tuple[int, int] | None = None

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.int64)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def num_qubits(self) -> int:
        return len(self.roles)

    def distance(self, q1: int, q2: int) -> int:
        d = np.abs(self.coords[q1] - self.coords[q2])
        if self.period is not None:
            d = np.minimum(d, np.asarray(self.period) - d)
        return int(d.max())


def gate_range(layout: QubitLayout, qubit_a: int, qubit_b: int) -> int:
    """Lattice-site separation (Chebyshev) used to pick the range constant."""
    return layout.distance(qubit_a, qubit_b)


@dataclass(frozen=True, eq=False)
class CssCode:
    hx: BinaryMatrix = field(repr=False)
    hz: BinaryMatrix = field(repr=False)
    logicals_x: np.ndarray = field(repr=False)
    logicals_z: np.ndarray = field(repr=False)
    seeds: tuple[SeedCode, SeedCode] | None = field(default=None, repr=False)
    d_bound: int | None = None
    d_exact: int | None = None
    layout: QubitLayout | None = field(default=None, repr=False)
    name: str = ""

    @property
    def N(self) -> int:
        return self.hx.cols

    @property
    def K(self) -> int:
        return self.logicals_x.shape[0]

    @property
    def D(self) -> int | None:
        return self.d_exact if self.d_exact is not None else self.d_bound

    @property
    def params(self) -> tuple[int, int, int | None]:
        return (self.N, self.K, self.D)

    @property
    def num_x_checks(self) -> int:
        return self.hx.rows

    @property
    def num_z_checks(self) -> int:
        return self.hz.rows

    def with_layout(self, mode: str | None = None) -> "CssCode":
        return replace(self, layout=assign_layout(self, mode))

    def with_distance(self, w_max: int) -> "CssCode":
        return replace(self, d_exact=distance_bruteforce(self, w_max))


def hypergraph_product(a: SeedCode, b: SeedCode, layout: str | None = None) -> CssCode:
    """HX = [H1 (x) I | I (x) H2^T],  HZ = [I (x) H2 | H1^T (x) I]."""
    if a.boundary != b.boundary:
        raise ValueError(f"seed boundaries differ: {a.boundary} vs {b.boundary}")
    h1, h2 = a.H, b.H
    r1, n1 = h1.shape
    r2, n2 = h2.shape
    hx = gf2.hstack([gf2.kron(h1, BinaryMatrix.identity(n2)), gf2.kron(BinaryMatrix.identity(r1), h2.T)])
    hz = gf2.hstack([gf2.kron(BinaryMatrix.identity(n1), h2), gf2.kron(h1.T, BinaryMatrix.identity(r2))])
    dists = [d for d in (a.distance, b.distance, a.transpose_distance, b.transpose_distance) if d is not None]
    code = CssCode(
        hx=hx,
        hz=hz,
        logicals_x=np.zeros((0, hx.cols), dtype=np.uint8),
        logicals_z=np.zeros((0, hx.cols), dtype=np.uint8),
        seeds=(a, b),
        d_bound=min(dists) if dists else None,
        name=f"hgp[{a.n},{a.degree},{a.boundary}]x[{b.n},{b.degree},{b.boundary}]",
    )
    lx, lz = logical_basis(code)
    code = replace(code, logicals_x=lx, logicals_z=lz)
    return replace(code, layout=assign_layout(code, layout))


def lacross_code(n: int, k: int, boundary: str = "obc", layout: str | None = None) -> CssCode:
    """Equal-seed product of two 1 + x + x^k seeds."""
    seed = build_seed(n, k, boundary)
    return hypergraph_product(seed, seed, layout=layout)


def surface_code(d: int) -> CssCode:
    """Unrotated distance-d surface code, [[d^2 + (d-1)^2, 1, d]]."""
    return lacross_code(d, 1, "obc")


def expected_logical_count(code: CssCode) -> int:
    return code.N - gf2.rank(code.hx) - gf2.rank(code.hz)


def logical_basis(code: CssCode) -> tuple[np.ndarray, np.ndarray]:
    """Paired X/Z logical bases with identity overlap-parity matrix.

    Product codes get the canonical product basis, where every logical is a
    seed codeword laid along one lattice row or column.  Other CSS codes fall
    back to kernel-modulo-stabilizer reduction followed by pairing.
    """
    K = expected_logical_count(code)
    if code.seeds is not None:
        lx, lz = _product_logicals(*code.seeds)
    else:
        lx, lz = _generic_logicals(code.hx, code.hz)
    if lx.shape[0] != K or lz.shape[0] != K:
        raise RuntimeError(f"logical basis has {lx.shape[0]}/{lz.shape[0]} operators, expected K={K}")
    overlap = (lx.astype(np.int64) @ lz.T.astype(np.int64)) & 1
    if not np.array_equal(overlap, np.eye(K, dtype=np.int64)):
        raise RuntimeError("logical basis is not symplectically paired")
    if ((code.hz.view().astype(np.int64) @ lx.T) & 1).any() or ((code.hx.view().astype(np.int64) @ lz.T) & 1).any():
        raise RuntimeError("logical operator anticommutes with a stabilizer")
    return lx, lz


def _systematic_kernel(h: BinaryMatrix) -> tuple[np.ndarray, tuple[int, ...]]:
    """Kernel basis in reduced form; basis[:, pivots] is the identity."""
    basis = gf2.kernel_basis(h)
    if basis.shape[0] == 0:
        return basis, ()
    red = gf2.rref(basis)
    return red.matrix, red.pivots


def _product_logicals(a: SeedCode, b: SeedCode) -> tuple[np.ndarray, np.ndarray]:
    h1, h2 = a.H, b.H
    r1, n1 = h1.shape
    r2, n2 = h2.shape
    N = n1 * n2 + r1 * r2
    g1, piv1 = _systematic_kernel(h1)
    g2, piv2 = _systematic_kernel(h2)
    t1, tpiv1 = _systematic_kernel(h1.T)
    t2, tpiv2 = _systematic_kernel(h2.T)
    lx, lz = [], []
    # primal sector: Z = g1_i (x) e_{piv2_j},  X = e_{piv1_i} (x) g2_j
    for i in range(g1.shape[0]):
        for j in range(g2.shape[0]):
            z = np.zeros(N, dtype=np.uint8)
            z[: n1 * n2] = np.kron(g1[i], _unit(n2, piv2[j]))
            x = np.zeros(N, dtype=np.uint8)
            x[: n1 * n2] = np.kron(_unit(n1, piv1[i]), g2[j])
            lz.append(z)
            lx.append(x)
    # dual sector: Z = e_{tpiv1_i} (x) t2_j,  X = t1_i (x) e_{tpiv2_j}
    for i in range(t1.shape[0]):
        for j in range(t2.shape[0]):
            z = np.zeros(N, dtype=np.uint8)
            z[n1 * n2 :] = np.kron(_unit(r1, tpiv1[i]), t2[j])
            x = np.zeros(N, dtype=np.uint8)
            x[n1 * n2 :] = np.kron(t1[i], _unit(r2, tpiv2[j]))
            lz.append(z)
            lx.append(x)
    if not lx:
        return np.zeros((0, N), dtype=np.uint8), np.zeros((0, N), dtype=np.uint8)
    return np.array(lx, dtype=np.uint8), np.array(lz, dtype=np.uint8)


def _unit(n: int, i: int) -> np.ndarray:
    e = np.zeros(n, dtype=np.uint8)
    e[i] = 1
    return e


def _coset_representatives(kernel_of: BinaryMatrix, modulo: BinaryMatrix) -> np.ndarray:
    acc = modulo.view()
    base_rank = gf2.rank(acc)
    reps = []
    for v in gf2.kernel_basis(kernel_of):
        trial = np.vstack([acc, v[None, :]])
        r = gf2.rank(trial)
        if r > base_rank:
            reps.append(v)
            acc, base_rank = trial, r
    return np.array(reps, dtype=np.uint8).reshape(len(reps), kernel_of.cols)


def _generic_logicals(hx: BinaryMatrix, hz: BinaryMatrix) -> tuple[np.ndarray, np.ndarray]:
    lx = _coset_representatives(hz, hx)
    lz = _coset_representatives(hx, hz)
    if lx.shape[0] != lz.shape[0]:
        raise RuntimeError("unequal numbers of X and Z logical representatives")
    if lx.shape[0] == 0:
        return lx, lz
    overlap = (lx.astype(np.int64) @ lz.T.astype(np.int64)) & 1
    lz = ((gf2.inverse(overlap).T.astype(np.int64) @ lz.astype(np.int64)) & 1).astype(np.uint8)
    return lx, lz


# ---------------------------------------------------------------- layout


def qubit_labels(code: CssCode) -> dict[str, list[tuple[int, int]]]:
    """Seed-grid labels: primal (a, b), dual (c, d), X checks (c, b), Z checks (a, d)."""
    a, b = code.seeds
    n1, r1, n2, r2 = a.n, a.r, b.n, b.r
    return {
        "primal": [(i, j) for i in range(n1) for j in range(n2)],
        "dual": [(i, j) for i in range(r1) for j in range(r2)],
        "xcheck": [(i, j) for i in range(r1) for j in range(n2)],
        "zcheck": [(i, j) for i in range(n1) for j in range(r2)],
    }


def assign_layout(code: CssCode, mode: str | None = None) -> QubitLayout:
    if code.seeds is None:
        raise ValueError("layouts are only defined for two-seed product codes")
    a, b = code.seeds
    boundary = a.boundary
    mode = mode or boundary
    if mode not in LAYOUT_MODES:
        raise ValueError(f"layout mode must be one of {LAYOUT_MODES}, got {mode!r}")
    if (boundary == "pbc") != (mode == "pbc"):
        raise ValueError(f"layout mode {mode!r} incompatible with {boundary} seeds")
    labels = qubit_labels(code)
    coords = (
        [(2 * i, 2 * j) for i, j in labels["primal"]]
        + [(2 * i + 1, 2 * j + 1) for i, j in labels["dual"]]
        + [(2 * i + 1, 2 * j) for i, j in labels["xcheck"]]
        + [(2 * i, 2 * j + 1) for i, j in labels["zcheck"]]
    )
    roles = ("data",) * code.N + ("ancX",) * code.num_x_checks + ("ancZ",) * code.num_z_checks
    coords = np.array(coords, dtype=np.int64)
    period = None
    if mode == "pbc":
        period = (2 * a.n, 2 * b.n)
    elif mode == "squeezed":
        coords = _squeeze(coords)
    return QubitLayout(coords=coords, roles=roles, mode=mode, period=period)


def _squeeze(coords: np.ndarray) -> np.ndarray:
    """Drop unoccupied lattice rows and columns, keeping order."""
    out = coords.copy()
    for axis in range(2):
        used = np.unique(coords[:, axis])
        out[:, axis] = np.searchsorted(used, coords[:, axis])
    return out


def check_qubit(code: CssCode, kind: str, row: int) -> int:
    """Circuit index of the ancilla measuring ``row`` of HX (kind='X') or HZ."""
    if kind == "X":
        return code.N + row
    return code.N + code.num_x_checks + row


# ---------------------------------------------------------------- distance


def distance_bruteforce(code: CssCode, w_max: int) -> int | None:
    """Exact distance if some logical has weight <= w_max, else None.

    Searches for a support with trivial syndrome and nontrivial logical
    action by meeting in the middle: two half-weight subsets with equal
    syndromes and different logical signatures.
    """
    if w_max < 1:
        raise ValueError("w_max must be >= 1")
    best = None
    for checks, logs in ((code.hz, code.logicals_z), (code.hx, code.logicals_x)):
        d = _min_logical_weight(checks.view(), logs, w_max if best is None else min(w_max, best - 1))
        if d is not None and (best is None or d < best):
            best = d
    return best


def _pack_columns(m: np.ndarray) -> np.ndarray:
    """Pack each column of ``m`` into bytes (shape: cols x nbytes)."""
    if m.shape[0] == 0:
        return np.zeros((m.shape[1], 1), dtype=np.uint8)
    return np.packbits(m.T, axis=1, bitorder="little")


def _subset_words(cols: np.ndarray, n: int, w: int) -> np.ndarray:
    if w == 0:
        return np.zeros((1, cols.shape[1]), dtype=np.uint8)
    combos = np.array(list(itertools.combinations(range(n), w)), dtype=np.int64)
    return np.bitwise_xor.reduce(cols[combos], axis=1)


def _min_logical_weight(checks: np.ndarray, logicals: np.ndarray, w_max: int) -> int | None:
    n = checks.shape[1]
    if logicals.shape[0] == 0 or w_max < 1:
        return None
    syn = _pack_columns(checks)
    log = _pack_columns(logicals)
    both = np.hstack([syn, log])
    ns = syn.shape[1]
    halves = {}
    for w in range(1, w_max + 1):
        w1, w2 = w // 2, w - w // 2
        for s in {w1, w2}:
            if s not in halves:
                halves[s] = _subset_words(both, n, s)
        left, right = halves[w1], halves[w2]
        table: dict[bytes, set[bytes]] = {}
        for row in left:
            table.setdefault(row[:ns].tobytes(), set()).add(row[ns:].tobytes())
        for row in right:
            hit = table.get(row[:ns].tobytes())
            if hit and (len(hit) > 1 or row[ns:].tobytes() not in hit):
                return w
    return None


# ---------------------------------------------------------------- export


def code_to_text(code: CssCode) -> str:
    """Structured text: header, HX/HZ blocks, logicals, layout."""
    out = ["# lacross code", f"name {code.name}", f"N {code.N}", f"K {code.K}"]
    out.append(f"D_bound {code.d_bound if code.d_bound is not None else '-'}")
    out.append(f"D_exact {code.d_exact if code.d_exact is not None else '-'}")
    if code.seeds:
        for i, s in enumerate(code.seeds, 1):
            out.append(f"seed{i} {s.n} {s.boundary} " + " ".join(map(str, s.poly)))
    out.append("[HX]")
    out.append(code.hx.to_text().rstrip())
    out.append("[HZ]")
    out.append(code.hz.to_text().rstrip())
    for tag, logs in (("LX", code.logicals_x), ("LZ", code.logicals_z)):
        out.append(f"[{tag}]")
        for row in logs:
            out.append(" ".join(map(str, np.flatnonzero(row).tolist())))
    if code.layout is not None:
        lay = code.layout
        per = "-" if lay.period is None else f"{lay.period[0]} {lay.period[1]}"
        out.append(f"[LAYOUT] {lay.mode} {per}")
        for q, ((x, y), role) in enumerate(zip(lay.coords.tolist(), lay.roles)):
            out.append(f"{q} {x} {y} {role}")
    return "\n".join(out) + "\n"


def code_from_text(text: str) -> CssCode:
    header: dict[str, str] = {}
    blocks: dict[str, list[str]] = {}
    current = None
    layout_hdr: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            tag, _, rest = line[1:].partition("]")
            current = tag
            blocks[tag] = []
            if tag == "LAYOUT":
                layout_hdr = rest.split()
            continue
        if current is None:
            key, _, val = line.partition(" ")
            header[key] = val
        else:
            blocks[current].append(line)
    hx = BinaryMatrix.from_text("\n".join(blocks["HX"]))
    hz = BinaryMatrix.from_text("\n".join(blocks["HZ"]))
    N = hx.cols

    def logicals(tag):
        rows = []
        for ln in blocks.get(tag, []):
            v = np.zeros(N, dtype=np.uint8)
            v[[int(t) for t in ln.split()]] = 1
            rows.append(v)
        return np.array(rows, dtype=np.uint8).reshape(len(rows), N)

    seeds = None
    if "seed1" in header and "seed2" in header:
        parsed = []
        for key in ("seed1", "seed2"):
            parts = header[key].split()
            n, boundary, poly = int(parts[0]), parts[1], tuple(int(t) for t in parts[2:])
            parsed.append(build_seed(n, max(poly), boundary, poly=poly))
        seeds = tuple(parsed)
    layout = None
    if "LAYOUT" in blocks:
        mode = layout_hdr[0]
        period = None if layout_hdr[1] == "-" else (int(layout_hdr[1]), int(layout_hdr[2]))
        rows = [ln.split() for ln in blocks["LAYOUT"]]
        coords = np.array([[int(r[1]), int(r[2])] for r in rows], dtype=np.int64)
        layout = QubitLayout(coords=coords, roles=tuple(r[3] for r in rows), mode=mode, period=period)

    def opt_int(key):
        val = header.get(key, "-")
        return None if val == "-" else int(val)

    return CssCode(
        hx=hx,
        hz=hz,
        logicals_x=logicals("LX"),
        logicals_z=logicals("LZ"),
        seeds=seeds,
        d_bound=opt_int("D_bound"),
        d_exact=opt_int("D_exact"),
        layout=layout,
        name=header.get("name", ""),
    )
