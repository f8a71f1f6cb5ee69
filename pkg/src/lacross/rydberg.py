"""Rydberg-blockade CZ gate errors as a function of interatomic distance.

Gate infidelity combines Rydberg decay and Doppler dephasing,
``1 - F = 2.96 gamma/Omega + 7.12 Delta^2/Omega^2``.  For each separation
``j R`` the principal quantum number is chosen as the best integer ``n`` that
still blockades (``B >= factor * Omega``), using the scalings
``Omega ~ n^-3/2``, ``gamma ~ n^-3`` and ``B ~ n^11 / d^6``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import atomic_mass, k as k_B

from .circuit import PAPER_C_TABLE
from .codes import QubitLayout

TWO_PI = 2 * math.pi
CS133_MASS = 132.905451933 * atomic_mass
# two-photon 6s -> 7p1/2 -> ns excitation with counter-propagating 459 nm and 1039 nm beams
K_EFF_DEFAULT = TWO_PI * (1 / 459e-9 - 1 / 1039e-9)
TAU_EXPONENT = 18 / 25


class Infeasible(ValueError):
    pass


@dataclass(frozen=True)
class RydbergConfig:
    """Physical inputs.  SI units: metres, seconds, kelvin, rad/s."""

    R: float = 3e-6
    T: float = 10e-6
    mass: float = CS133_MASS
    k_eff: float = K_EFF_DEFAULT
    n_ref: int = 75
    omega_ref: float = TWO_PI * 1.9e6
    gamma_ref: float = 1 / 430e-6
    # van der Waals shift at (n_ref, R); corresponds to C6 = 2pi x 0.2 THz um^6
    b_ref: float = TWO_PI * 0.2e12 / 3.0**6
    blockade_factor: float = 3.0
    n_max_of_j: dict | None = None
    n_search_max: int = 200
    tau_ref: float = 250e-9
    extra_dephasing: float = 0.0  # optional additive infidelity term, off by default

    def __post_init__(self):
        for name in ("R", "mass", "k_eff", "n_ref", "omega_ref", "b_ref", "tau_ref"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.T < 0 or self.gamma_ref < 0:
            raise ValueError("T and gamma_ref must be non-negative")
        if self.blockade_factor < 1:
            raise ValueError("blockade_factor must be >= 1")

    def n_max(self, j: int) -> int:
        if self.n_max_of_j and j in self.n_max_of_j:
            return int(self.n_max_of_j[j])
        return self.n_search_max


def doppler_dephasing(cfg: RydbergConfig) -> float:
    return cfg.k_eff * math.sqrt(k_B * cfg.T / cfg.mass)


def cz_infidelity(gamma, omega, delta):
    if np.any(np.asarray(omega) <= 0) or np.any(np.asarray(gamma) < 0) or np.any(np.asarray(delta) < 0):
        raise ValueError("need omega > 0, gamma >= 0, delta >= 0")
    return 2.96 * gamma / omega + 7.12 * delta**2 / omega**2


def scaled_params(n, cfg: RydbergConfig, distance: float | None = None):
    """(Omega(n), gamma(n), B(n, distance)); distance defaults to the lattice spacing."""
    n = np.asarray(n, dtype=np.float64)
    if np.any(n <= 0):
        raise ValueError("n must be positive")
    d = cfg.R if distance is None else distance
    x = n / cfg.n_ref
    omega = cfg.omega_ref * x**-1.5
    gamma = cfg.gamma_ref * x**-3
    b = cfg.b_ref * x**11 * (cfg.R / d) ** 6
    return omega, gamma, b


def _infidelity_at(n, cfg, delta):
    omega, gamma, _ = scaled_params(n, cfg)
    return cz_infidelity(gamma, omega, delta) + cfg.extra_dephasing


def blockade_min_n(j: int, cfg: RydbergConfig) -> float:
    """Continuous n at which B(n, jR) = factor * Omega(n); grows as (jR)^(12/25)."""
    ratio = cfg.blockade_factor * cfg.omega_ref / cfg.b_ref * j**6
    return cfg.n_ref * ratio ** (1 / 12.5)


@dataclass(frozen=True)
class OptimalN:
    j: int
    n: int
    infidelity: float
    at_blockade_boundary: bool


def optimal_n(j: int, cfg: RydbergConfig) -> OptimalN:
    if j < 1:
        raise ValueError("j must be >= 1")
    n_lo = max(1, math.ceil(blockade_min_n(j, cfg) - 1e-9))
    # guard against rounding at the boundary
    while n_lo > 1:
        om, _, b = scaled_params(n_lo - 1, cfg, j * cfg.R)
        if b >= cfg.blockade_factor * om:
            n_lo -= 1
        else:
            break
    om, _, b = scaled_params(n_lo, cfg, j * cfg.R)
    while b < cfg.blockade_factor * om:
        n_lo += 1
        om, _, b = scaled_params(n_lo, cfg, j * cfg.R)
    n_hi = cfg.n_max(j)
    if n_hi < n_lo:
        raise Infeasible(f"j={j}: blockade needs n >= {n_lo} but n_max = {n_hi}")
    ns = np.arange(n_lo, n_hi + 1)
    inf = _infidelity_at(ns, cfg, doppler_dephasing(cfg))
    i = int(np.argmin(inf))
    return OptimalN(j, int(ns[i]), float(inf[i]), i == 0)


@dataclass(frozen=True)
class RangeErrorTable:
    mode: str
    c_of_range: dict = field(default_factory=dict)
    n_of_range: dict = field(default_factory=dict)
    infidelity_of_range: dict = field(default_factory=dict)
    duration_of_range: dict = field(default_factory=dict)

    def rows(self) -> list[dict]:
        return [{"j": j, "n_j": self.n_of_range.get(j), "infidelity": self.infidelity_of_range.get(j),
                 "c_j": self.c_of_range[j], "tau_j": self.duration_of_range[j]}
                for j in sorted(self.c_of_range)]


def gate_duration(j: int, cfg: RydbergConfig) -> float:
    return cfg.tau_ref * j**TAU_EXPONENT


def range_table(cfg: RydbergConfig | None = None, j_max: int = 7, mode: str = "model") -> RangeErrorTable:
    cfg = cfg or RydbergConfig()
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    taus = {j: gate_duration(j, cfg) for j in range(1, j_max + 1)}
    if mode == "paper":
        if j_max > max(PAPER_C_TABLE):
            raise ValueError(f"paper table only covers j <= {max(PAPER_C_TABLE)}")
        return RangeErrorTable("paper", {j: PAPER_C_TABLE[j] for j in range(1, j_max + 1)}, {}, {}, taus)
    if mode != "model":
        raise ValueError(f"unknown mode {mode!r}")
    opts = [optimal_n(j, cfg) for j in range(1, j_max + 1)]
    base = opts[0].infidelity
    return RangeErrorTable(
        "model",
        {o.j: o.infidelity / base for o in opts},
        {o.j: o.n for o in opts},
        {o.j: o.infidelity for o in opts},
        taus,
    )


# ---------------------------------------------------------------- parallel schedule


@dataclass(frozen=True)
class ParallelSchedule:
    cell: int
    groups: tuple[tuple[int, ...], ...]  # ancilla qubit indices measured together
    min_separation: int
    max_range: int
    min_atom_separation: int | None = None

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    @property
    def blockade_safe(self) -> bool:
        """Simultaneous stabilizers (and so their gates) sit further apart than the longest gate."""
        return self.min_separation > self.max_range

    @property
    def atom_safe(self) -> bool | None:
        """Every atom of one simultaneous gate is further than the longest gate from every other gate."""
        if self.min_atom_separation is None:
            return None
        return self.min_atom_separation > self.max_range


def parallel_schedule(layout: QubitLayout, k: int, max_range: int | None = None, cell: int | None = None,
                      cnot_layers=None) -> ParallelSchedule:
    """Group stabilizers by their position inside ``cell`` x ``cell`` squares.

    The default cell is 2(k+1).  Ancillas with the same position in different
    cells are measured together, giving cell^2 / 2 groups (ancillas occupy
    half of each cell).  ``min_separation`` is the smallest Chebyshev distance
    between two ancillas of one group; it is also the displacement between
    any two of their simultaneous gates.  With ``cnot_layers`` (one round of
    (control, target) pairs per layer) the closest approach between atoms of
    different simultaneous gates is reported too.
    """
    cell = 2 * (k + 1) if cell is None else int(cell)
    if cell < 2 or cell % 2:
        raise ValueError("cell must be an even integer >= 2")
    coords = layout.coords
    anc = [q for q, r in enumerate(layout.roles) if r in ("ancX", "ancZ")]
    slots: dict[tuple[int, int], list[int]] = {}
    for q in anc:
        x, y = int(coords[q][0]), int(coords[q][1])
        slots.setdefault((x % cell, y % cell), []).append(q)
    # every slot with (x + y) odd is an ancilla site in the bulk
    all_slots = [(a, b) for a in range(cell) for b in range(cell) if (a + b) % 2 == 1]
    groups = tuple(tuple(slots.get(s, ())) for s in all_slots)
    extra = sorted(set(slots) - set(all_slots))
    groups += tuple(tuple(slots[s]) for s in extra)
    min_sep = 10**9
    for g in groups:
        for i in range(len(g)):
            for j in range(i + 1, len(g)):
                min_sep = min(min_sep, layout.distance(g[i], g[j]))
    atom_sep = None
    if cnot_layers is not None:
        atom_sep = 10**9
        for g in groups:
            members = set(g)
            for pairs in cnot_layers:
                act = [p for p in pairs if p[0] in members or p[1] in members]
                for i in range(len(act)):
                    for j in range(i + 1, len(act)):
                        d = min(layout.distance(a, b) for a in act[i] for b in act[j])
                        atom_sep = min(atom_sep, d)
    if max_range is None:
        max_range = max(2 * k - 1, 1)
    return ParallelSchedule(cell, groups, min_sep, max_range, atom_sep)


def atom_safe_cell(k: int) -> int:
    """Smallest even cell for which lock-step arms of length 2k-1 never come within 2k-1 sites."""
    arm = max(2 * k - 1, 1)
    cell = 2 * arm + 1
    return cell + cell % 2
