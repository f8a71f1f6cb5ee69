"""Syndrome-extraction circuits and circuit-level depolarizing noise.

A stabilizer couples its ancilla to six data qubits through the links
``(sector, offset)``: ``sector`` is ``primal`` or ``dual`` and ``offset`` one
of the polynomial exponents.  Offsets 0 and 1 are nearest neighbours on the
lattice; the largest offset ``k > 1`` is the long arm.  A schedule is a list
of CNOT layers, each naming which link every X (resp. Z) ancilla fires.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .codes import CssCode, QubitLayout, check_qubit, gate_range

# Published range constants c_j = (1 - F_j)/(1 - F_1) for j = 1..7 lattice sites.
PAPER_C_TABLE: dict[int, float] = {1: 1.0, 2: 1.6, 3: 2.5, 4: 3.6, 5: 4.8, 6: 6.1, 7: 7.5}

# Layer -> tuple of (check type, sector, link).  "near0"/"near1" are offsets 0
# and 1, "arm" the largest offset.  X arms go first so that every X/Z check
# pair sharing two qubits is coupled in a consistent order on both.
DEFAULT_SCHEDULE: tuple[tuple[tuple[str, str, str], ...], ...] = (
    (("X", "primal", "arm"),),
    (("X", "dual", "arm"),),
    (("X", "dual", "near1"), ("Z", "primal", "near0")),
    (("X", "primal", "near1"), ("Z", "dual", "near0")),
    (("X", "primal", "near0"), ("Z", "dual", "near1")),
    (("X", "dual", "near0"), ("Z", "primal", "near1")),
    (("Z", "primal", "arm"),),
    (("Z", "dual", "arm"),),
)

GATES = ("R", "H", "CX", "M", "MR")
NOISE = ("DEP1", "DEP2", "XERR")


@dataclass(frozen=True)
class Instruction:
    name: str
    targets: tuple[int, ...]
    arg: float | None = None
    ranges: tuple[int, ...] = ()


@dataclass(frozen=True, eq=False)
class NoisyCircuit:
    """Instruction stream (``TICK`` separates layers) plus detector bookkeeping."""

    num_qubits: int
    instructions: tuple[Instruction, ...]
    detectors: tuple[tuple[int, ...], ...]
    observables: tuple[tuple[int, ...], ...]
    rounds: int
    basis: str = "Z"
    num_measurements: int = 0
    qubit_layout: QubitLayout | None = field(default=None, repr=False)

    @property
    def num_detectors(self) -> int:
        return len(self.detectors)

    @property
    def num_observables(self) -> int:
        return len(self.observables)

    def layers(self) -> list[list[Instruction]]:
        out: list[list[Instruction]] = [[]]
        for ins in self.instructions:
            if ins.name == "TICK":
                out.append([])
            else:
                out[-1].append(ins)
        return [layer for layer in out if layer]

    def gate_layers(self, names=("H", "CX")) -> list[list[Instruction]]:
        """Layers containing unitary gates (idle steps are not counted)."""
        return [ly for ly in self.layers() if any(i.name in names for i in ly)]

    def count(self, name: str) -> int:
        """Number of operations of ``name`` (pairs for two-qubit instructions)."""
        per = 2 if name in ("CX", "DEP2") else 1
        return sum(len(i.targets) // per for i in self.instructions if i.name == name)

    def to_text(self) -> str:
        return circuit_to_text(self)


# ---------------------------------------------------------------- noise model


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    p: float
    p1: float
    p_prep: float
    p_meas: float
    c_of_range: Mapping[int, float] | None = None

    def __post_init__(self):
        if self.kind not in ("hardwareSpecific", "hardwareAgnostic"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        for name in ("p", "p1", "p_prep", "p_meas"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name}={val} outside [0, 1]")
        if self.c_of_range is not None:
            js = sorted(self.c_of_range)
            cs = [self.c_of_range[j] for j in js]
            if any(b < a for a, b in zip(cs, cs[1:])):
                raise ValueError("range constants must be nondecreasing in j")
            if any(not 0.0 <= c * self.p <= 1.0 for c in cs):
                raise ValueError("range-scaled two-qubit probability outside [0, 1]")

    @classmethod
    def hardware_specific(cls, p: float, c_table: Mapping[int, float] | None = None) -> "NoiseModel":
        table = dict(PAPER_C_TABLE if c_table is None else c_table)
        if table.get(1) != 1.0:
            raise ValueError("hardware-specific model needs c_1 = 1")
        return cls("hardwareSpecific", p, p / 10, 2 * p, 2 * p, table)

    @classmethod
    def hardware_agnostic(cls, p: float) -> "NoiseModel":
        return cls("hardwareAgnostic", p, p, 0.0, 0.0, None)

    @classmethod
    def from_name(cls, name: str, p: float, c_table: Mapping[int, float] | None = None) -> "NoiseModel":
        key = name.lower()
        if key in ("hw", "hardwarespecific", "hardware-specific", "specific"):
            return cls.hardware_specific(p, c_table)
        if key in ("ag", "agnostic", "hardwareagnostic", "hardware-agnostic"):
            return cls.hardware_agnostic(p)
        raise ValueError(f"unknown noise model {name!r}")

    def p2(self, j: int) -> float:
        if self.c_of_range is None:
            return self.p
        if j not in self.c_of_range:
            raise ValueError(f"no range constant for gate range j={j}")
        return self.c_of_range[j] * self.p

    @property
    def short(self) -> str:
        return "hw" if self.kind == "hardwareSpecific" else "ag"


# ---------------------------------------------------------------- construction


def _link_offsets(code: CssCode) -> dict[str, int]:
    poly = code.seeds[0].poly
    if code.seeds[1].poly != poly:
        raise ValueError("schedule needs equal seed polynomials")
    links = {}
    for e in poly:
        if e == 0:
            links["near0"] = 0
        elif e == 1:
            links["near1"] = 1
        elif "arm" not in links:
            links["arm"] = e
        else:
            raise ValueError(f"polynomial {poly} has more than one long-range term")
    return links


def _link_partner(code: CssCode, kind: str, row: int, sector: str, e: int) -> int | None:
    """Data qubit reached from check ``row`` via link (sector, e), if any."""
    a_seed, b_seed = code.seeds
    n1, r1, n2, r2 = a_seed.n, a_seed.r, b_seed.n, b_seed.r
    pbc = a_seed.boundary == "pbc"
    if kind == "X":
        c, b = divmod(row, n2)
        if sector == "primal":
            a = c + e
            a = a % n1 if pbc else a
            return a * n2 + b if 0 <= a < n1 else None
        d = b - e
        d = d % r2 if pbc else d
        return n1 * n2 + c * r2 + d if 0 <= d < r2 else None
    a, d = divmod(row, r2)
    if sector == "primal":
        b = d + e
        b = b % n2 if pbc else b
        return a * n2 + b if 0 <= b < n2 else None
    c = a - e
    c = c % r1 if pbc else c
    return n1 * n2 + c * r2 + d if 0 <= c < r1 else None


def schedule_cnots(code: CssCode, schedule=DEFAULT_SCHEDULE) -> list[list[tuple[int, int]]]:
    """CNOT (control, target) pairs per layer for one round; empty layers dropped.

    Fails if the schedule misses a check-matrix entry, hits one twice, or uses
    a qubit twice within a layer.
    """
    links = _link_offsets(code)
    layers = []
    covered = {"X": set(), "Z": set()}
    for spec in schedule:
        pairs = []
        for kind, sector, link in spec:
            if link not in links:
                continue
            rows = code.num_x_checks if kind == "X" else code.num_z_checks
            for row in range(rows):
                q = _link_partner(code, kind, row, sector, links[link])
                if q is None:
                    continue
                anc = check_qubit(code, kind, row)
                if (row, q) in covered[kind]:
                    raise ValueError(f"schedule couples {kind} check {row} to qubit {q} twice")
                covered[kind].add((row, q))
                pairs.append((anc, q) if kind == "X" else (q, anc))
        if pairs:
            used = [q for pair in pairs for q in pair]
            if len(used) != len(set(used)):
                raise ValueError("schedule layer uses a qubit twice")
            layers.append(pairs)
    for kind, h in (("X", code.hx), ("Z", code.hz)):
        if covered[kind] != set(h.entries()):
            raise ValueError(f"schedule does not reproduce the {kind} check matrix")
    return layers


def build_syndrome_circuit(
    code: CssCode,
    layout: QubitLayout | None = None,
    rounds: int | None = None,
    basis: str = "Z",
    schedule=DEFAULT_SCHEDULE,
) -> NoisyCircuit:
    """Noiseless memory experiment: ``rounds`` syndrome rounds then data readout."""
    layout = layout or code.layout
    if layout is None:
        raise ValueError("code has no layout")
    rounds = code.D if rounds is None else rounds
    if rounds is None or rounds < 1:
        raise ValueError("rounds must be a positive integer")
    if basis not in ("Z", "X"):
        raise ValueError("basis must be 'Z' or 'X'")
    N, mx, mz = code.N, code.num_x_checks, code.num_z_checks
    nq = N + mx + mz
    if layout.num_qubits != nq:
        raise ValueError("layout does not match code")
    data = tuple(range(N))
    xanc = tuple(range(N, N + mx))
    ancillas = tuple(range(N, nq))
    cx_layers = schedule_cnots(code, schedule)
    cx_ins = []
    for pairs in cx_layers:
        flat = tuple(q for pair in pairs for q in pair)
        ranges = tuple(gate_range(layout, c, t) for c, t in pairs)
        cx_ins.append(Instruction("CX", flat, ranges=ranges))

    ins: list[Instruction] = []
    tick = Instruction("TICK", ())
    ins.append(Instruction("R", tuple(range(nq))))
    ins.append(tick)
    if basis == "X":
        ins += [Instruction("H", data), tick]
    nmeas = 0
    anc_meas = []
    for _ in range(rounds):
        if xanc:
            ins += [Instruction("H", xanc), tick]
        for cx in cx_ins:
            ins += [cx, tick]
        if xanc:
            ins += [Instruction("H", xanc), tick]
        ins += [Instruction("MR", ancillas), tick]
        anc_meas.append(np.arange(nmeas, nmeas + len(ancillas)))
        nmeas += len(ancillas)
    if basis == "X":
        ins += [Instruction("H", data), tick]
    ins.append(Instruction("M", data))
    data_meas = np.arange(nmeas, nmeas + N)
    nmeas += N

    checks = code.hz if basis == "Z" else code.hx
    offset = mx if basis == "Z" else 0
    logicals = code.logicals_z if basis == "Z" else code.logicals_x
    detectors = []
    for r in range(rounds):
        for i in range(checks.rows):
            m = int(anc_meas[r][offset + i])
            detectors.append((m,) if r == 0 else (int(anc_meas[r - 1][offset + i]), m))
    for i in range(checks.rows):
        support = tuple(int(data_meas[q]) for q in checks.row_support(i))
        detectors.append(support + (int(anc_meas[-1][offset + i]),))
    observables = tuple(tuple(int(data_meas[q]) for q in np.flatnonzero(lg)) for lg in logicals)
    return NoisyCircuit(
        num_qubits=nq,
        instructions=tuple(ins),
        detectors=tuple(detectors),
        observables=observables,
        rounds=rounds,
        basis=basis,
        num_measurements=nmeas,
        qubit_layout=layout,
    )


def instrument(circuit: NoisyCircuit, model: NoiseModel) -> NoisyCircuit:
    """Attach depolarizing and flip channels after gates, flips before readout."""
    out: list[Instruction] = []

    def flip(p, targets):
        if p > 0 and targets:
            out.append(Instruction("XERR", tuple(targets), p))

    for ins in circuit.instructions:
        if ins.name in NOISE:
            raise ValueError("circuit is already instrumented")
        if ins.name in ("M", "MR"):
            flip(model.p_meas, ins.targets)
        out.append(ins)
        if ins.name in ("R", "MR"):
            flip(model.p_prep, ins.targets)
        elif ins.name == "H" and model.p1 > 0:
            out.append(Instruction("DEP1", ins.targets, model.p1))
        elif ins.name == "CX":
            by_prob: dict[float, list[int]] = {}
            for idx, j in enumerate(ins.ranges):
                p2 = model.p2(j)
                by_prob.setdefault(p2, []).extend(ins.targets[2 * idx : 2 * idx + 2])
            for p2 in sorted(by_prob):
                if p2 > 0:
                    out.append(Instruction("DEP2", tuple(by_prob[p2]), p2))
    return NoisyCircuit(
        num_qubits=circuit.num_qubits,
        instructions=tuple(out),
        detectors=circuit.detectors,
        observables=circuit.observables,
        rounds=circuit.rounds,
        basis=circuit.basis,
        num_measurements=circuit.num_measurements,
        qubit_layout=circuit.qubit_layout,
    )


# ---------------------------------------------------------------- text format


def _fmt_p(p: float) -> str:
    return repr(float(p))


def circuit_to_text(circuit: NoisyCircuit) -> str:
    lines = [f"# qubits {circuit.num_qubits} rounds {circuit.rounds} basis {circuit.basis}"]
    for ins in circuit.instructions:
        t = ins.targets
        if ins.name == "TICK":
            lines.append("TICK")
        elif ins.name == "CX":
            lines.extend(f"CX {t[2 * i]} {t[2 * i + 1]} {j}" for i, j in enumerate(ins.ranges))
        elif ins.name == "DEP2":
            lines.extend(f"DEP2 {_fmt_p(ins.arg)} {t[i]} {t[i + 1]}" for i in range(0, len(t), 2))
        elif ins.name in NOISE:
            lines.append(f"{ins.name} {_fmt_p(ins.arg)} " + " ".join(map(str, t)))
        else:
            lines.append(ins.name + " " + " ".join(map(str, t)))
    lines.extend("DETECTOR " + " ".join(map(str, d)) for d in circuit.detectors)
    lines.extend(f"OBSERVABLE {i} " + " ".join(map(str, o)) for i, o in enumerate(circuit.observables))
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str) -> NoisyCircuit:
    """Parse :func:`circuit_to_text` output.  Consecutive same-kind lines merge."""
    num_qubits = rounds = None
    basis = "Z"
    ins: list[Instruction] = []
    detectors, observables = [], {}
    nmeas = 0
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            kv = dict(zip(parts[::2], parts[1::2]))
            num_qubits = int(kv.get("qubits", num_qubits or 0))
            rounds = int(kv.get("rounds", rounds or 0))
            basis = kv.get("basis", basis)
            continue
        name, *rest = line.split()
        if name == "TICK":
            ins.append(Instruction("TICK", ()))
        elif name == "CX":
            c, t, j = (int(x) for x in rest)
            prev = ins[-1] if ins else None
            if prev is not None and prev.name == "CX":
                ins[-1] = Instruction("CX", prev.targets + (c, t), ranges=prev.ranges + (j,))
            else:
                ins.append(Instruction("CX", (c, t), ranges=(j,)))
        elif name in NOISE:
            p = float(rest[0])
            targets = tuple(int(x) for x in rest[1:])
            prev = ins[-1] if ins else None
            if name == "DEP2" and prev is not None and prev.name == "DEP2" and prev.arg == p:
                ins[-1] = Instruction("DEP2", prev.targets + targets, p)
            else:
                ins.append(Instruction(name, targets, p))
        elif name == "DETECTOR":
            detectors.append(tuple(int(x) for x in rest))
        elif name == "OBSERVABLE":
            observables[int(rest[0])] = tuple(int(x) for x in rest[1:])
        elif name in GATES:
            targets = tuple(int(x) for x in rest)
            if name in ("M", "MR"):
                nmeas += len(targets)
            ins.append(Instruction(name, targets))
        else:
            raise ValueError(f"unknown instruction {name!r}")
    if num_qubits is None:
        num_qubits = 1 + max(max(i.targets) for i in ins if i.targets)
    return NoisyCircuit(
        num_qubits=num_qubits,
        instructions=tuple(ins),
        detectors=tuple(detectors),
        observables=tuple(observables[i] for i in sorted(observables)),
        rounds=rounds or 0,
        basis=basis,
        num_measurements=nmeas,
    )
