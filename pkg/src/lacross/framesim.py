"""Pauli-frame sampling and detector-error-model extraction.

The two routes are independent on purpose.  ``sample`` pushes random Pauli
frames forward through the circuit.  ``extract_dem`` walks the circuit
backwards, carrying for every detector and observable the Pauli operator it
is sensitive to; a fault flips a detector iff it anticommutes with that
sensitivity at the fault location.  The backward walk also proves that every
detector is deterministic in the absence of noise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import GATES, NOISE, NoisyCircuit
from .gf2 import BinaryMatrix

CHUNK = 1024

# Pauli (x, z) components.  Index 0 is the identity.
PAULI1 = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=np.uint8)  # I X Y Z
PAULI2 = np.array([[*PAULI1[i], *PAULI1[j]] for i in range(4) for j in range(4)], dtype=np.uint8)


class NonDeterministicDetector(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Fault:
    """One Pauli component of a noise channel, located after instruction ``index``."""

    index: int
    qubits: tuple[int, ...]
    xs: tuple[int, ...]
    zs: tuple[int, ...]
    prob: float


@dataclass(frozen=True, eq=False)
class DetectorErrorModel:
    H: BinaryMatrix = field(repr=False)
    L: BinaryMatrix = field(repr=False)
    priors: np.ndarray = field(repr=False)

    @property
    def num_detectors(self) -> int:
        return self.H.rows

    @property
    def num_observables(self) -> int:
        return self.L.rows

    @property
    def num_mechanisms(self) -> int:
        return self.H.cols

    def undetectable_logical(self) -> np.ndarray:
        """Mechanisms that flip an observable without firing any detector."""
        return np.flatnonzero(~self.H.view().any(axis=0) & self.L.view().any(axis=0))

    def to_text(self) -> str:
        lines = [f"# detectors {self.num_detectors} observables {self.num_observables}"]
        h, lo = self.H.view(), self.L.view()
        for j, q in enumerate(self.priors):
            terms = [f"D{i}" for i in np.flatnonzero(h[:, j])] + [f"L{i}" for i in np.flatnonzero(lo[:, j])]
            lines.append(f"error({float(q)!r}) " + " ".join(terms))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DetectorErrorModel":
        ndet = nobs = 0
        cols, priors = [], []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                kv = dict(zip(parts[::2], parts[1::2]))
                ndet = int(kv.get("detectors", ndet))
                nobs = int(kv.get("observables", nobs))
                continue
            head, _, rest = line.partition(")")
            if not head.startswith("error("):
                raise ValueError(f"bad DEM line {line!r}")
            priors.append(float(head[len("error(") :]))
            dets = [int(t[1:]) for t in rest.split() if t.startswith("D")]
            obs = [int(t[1:]) for t in rest.split() if t.startswith("L")]
            cols.append((dets, obs))
        h = np.zeros((ndet, len(cols)), dtype=np.uint8)
        lo = np.zeros((nobs, len(cols)), dtype=np.uint8)
        for j, (dets, obs) in enumerate(cols):
            h[dets, j] = 1
            lo[obs, j] = 1
        return cls(BinaryMatrix(h), BinaryMatrix(lo), np.array(priors, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class ShotBatch:
    shots: int
    detector_bits: np.ndarray = field(repr=False)
    observable_bits: np.ndarray = field(repr=False)
    seed: int | None = None
    first_chunk: int = 0

    def save(self, path) -> None:
        header = {
            "shots": self.shots,
            "detectors": int(self.detector_bits.shape[1]),
            "observables": int(self.observable_bits.shape[1]),
            "seed": self.seed,
            "first_chunk": self.first_chunk,
        }
        with open(path, "wb") as fh:
            fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
            fh.write(np.packbits(self.detector_bits.astype(np.uint8), axis=1, bitorder="little").tobytes())
            fh.write(np.packbits(self.observable_bits.astype(np.uint8), axis=1, bitorder="little").tobytes())

    @classmethod
    def load(cls, path) -> "ShotBatch":
        raw = Path(path).read_bytes()
        head, _, body = raw.partition(b"\n")
        meta = json.loads(head)
        shots, nd, no = meta["shots"], meta["detectors"], meta["observables"]
        bd, bo = (nd + 7) // 8, (no + 7) // 8
        buf = np.frombuffer(body, dtype=np.uint8)
        det = buf[: shots * bd].reshape(shots, bd)
        obs = buf[shots * bd : shots * (bd + bo)].reshape(shots, bo)
        det = np.unpackbits(det, axis=1, count=nd, bitorder="little").astype(bool)
        obs = np.unpackbits(obs, axis=1, count=no, bitorder="little").astype(bool)
        return cls(shots, det, obs, meta.get("seed"), meta.get("first_chunk", 0))


# ---------------------------------------------------------------- faults


def enumerate_faults(circuit: NoisyCircuit) -> list[Fault]:
    """Every Pauli component of every noise channel, in circuit order."""
    faults = []
    for idx, ins in enumerate(circuit.instructions):
        if ins.name == "DEP1":
            for q in ins.targets:
                for pk in range(1, 4):
                    x, z = PAULI1[pk]
                    faults.append(Fault(idx, (q,), (int(x),), (int(z),), ins.arg / 3))
        elif ins.name == "DEP2":
            for i in range(0, len(ins.targets), 2):
                q1, q2 = ins.targets[i], ins.targets[i + 1]
                for pk in range(1, 16):
                    x1, z1, x2, z2 = PAULI2[pk]
                    faults.append(Fault(idx, (q1, q2), (int(x1), int(x2)), (int(z1), int(z2)), ins.arg / 15))
        elif ins.name == "XERR":
            for q in ins.targets:
                faults.append(Fault(idx, (q,), (1,), (0,), ins.arg))
    return faults


def _target_matrix(circuit: NoisyCircuit) -> np.ndarray:
    """(measurements x targets) incidence; targets are detectors then observables."""
    nt = circuit.num_detectors + circuit.num_observables
    mt = np.zeros((circuit.num_measurements, nt), dtype=bool)
    for i, d in enumerate(circuit.detectors):
        for m in d:
            mt[m, i] ^= True
    for i, o in enumerate(circuit.observables):
        for m in o:
            mt[m, circuit.num_detectors + i] ^= True
    return mt


def fault_signatures(circuit: NoisyCircuit) -> tuple[list[Fault], np.ndarray]:
    """Backward sensitivity pass: (faults, signatures) with one bool row per fault.

    Raises :class:`NonDeterministicDetector` when some detector or observable
    depends on a random measurement outcome.
    """
    mt = _target_matrix(circuit)
    nt = mt.shape[1]
    nq = circuit.num_qubits
    sx = np.zeros((nq, nt), dtype=bool)
    sz = np.zeros((nq, nt), dtype=bool)
    meas_ptr = circuit.num_measurements
    per_instr: dict[int, list[np.ndarray]] = {}

    def check_clear(qs, what):
        bad = sx[list(qs)].any(axis=0)
        if bad.any():
            which = np.flatnonzero(bad)
            raise NonDeterministicDetector(f"targets {which[:10].tolist()} are random at {what}")

    for idx in range(len(circuit.instructions) - 1, -1, -1):
        ins = circuit.instructions[idx]
        name, t = ins.name, ins.targets
        if name == "TICK":
            continue
        if name in NOISE:
            qs = np.array(t, dtype=np.int64)
            if name == "XERR":
                per_instr[idx] = [sz[qs]]
            elif name == "DEP1":
                rows = np.empty((len(qs), 3, nt), dtype=bool)
                for pk in range(1, 4):
                    x, z = PAULI1[pk]
                    rows[:, pk - 1] = (sz[qs] & bool(x)) ^ (sx[qs] & bool(z))
                per_instr[idx] = [rows.reshape(-1, nt)]
            else:
                q1, q2 = qs[0::2], qs[1::2]
                rows = np.empty((len(q1), 15, nt), dtype=bool)
                for pk in range(1, 16):
                    x1, z1, x2, z2 = (bool(v) for v in PAULI2[pk])
                    rows[:, pk - 1] = (sz[q1] & x1) ^ (sx[q1] & z1) ^ (sz[q2] & x2) ^ (sx[q2] & z2)
                per_instr[idx] = [rows.reshape(-1, nt)]
        elif name == "H":
            qs = list(t)
            sx[qs], sz[qs] = sz[qs].copy(), sx[qs].copy()
        elif name == "CX":
            c, tg = list(t[0::2]), list(t[1::2])
            sx[tg] ^= sx[c]
            sz[c] ^= sz[tg]
        elif name == "R":
            check_clear(t, f"reset (instruction {idx})")
            sz[list(t)] = False
        elif name in ("M", "MR"):
            qs = list(t)
            if name == "MR":
                check_clear(t, f"reset (instruction {idx})")
                sz[qs] = False
            check_clear(t, f"measurement (instruction {idx})")
            meas_ptr -= len(qs)
            sz[qs] ^= mt[meas_ptr : meas_ptr + len(qs)]
        else:
            raise ValueError(f"unsupported (non-Clifford or unknown) instruction {name!r}")
    if meas_ptr != 0:
        raise ValueError("measurement count mismatch")
    if sx.any():
        raise NonDeterministicDetector("targets depend on the unprepared initial state")
    faults = enumerate_faults(circuit)
    blocks = [per_instr[i][0] for i in sorted(per_instr)]
    sigs = np.vstack(blocks) if blocks else np.zeros((0, nt), dtype=bool)
    assert sigs.shape[0] == len(faults)
    return faults, sigs


def extract_dem(circuit: NoisyCircuit) -> DetectorErrorModel:
    """Merge fault signatures into independent mechanisms.

    Components of a channel with total probability p get prior p/3 (one-qubit)
    or p/15 (two-qubit).  Identical signatures combine by XOR probability,
    all-zero signatures are dropped.
    """
    faults, sigs = fault_signatures(circuit)
    nd, no = circuit.num_detectors, circuit.num_observables
    if not faults:
        return DetectorErrorModel(BinaryMatrix.zeros(nd, 0), BinaryMatrix.zeros(no, 0), np.zeros(0))
    probs = np.array([f.prob for f in faults], dtype=np.float64)
    keep = sigs.any(axis=1) & (probs > 0)
    sigs, probs = sigs[keep], probs[keep]
    if sigs.shape[0] == 0:
        return DetectorErrorModel(BinaryMatrix.zeros(nd, 0), BinaryMatrix.zeros(no, 0), np.zeros(0))
    packed = np.packbits(sigs, axis=1, bitorder="little")
    uniq, inverse = np.unique(packed, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    if np.any(probs >= 0.5):
        raise ValueError("component probability >= 0.5")
    log_bias = np.zeros(uniq.shape[0])
    np.add.at(log_bias, inverse, np.log1p(-2.0 * probs))
    merged = 0.5 * (1.0 - np.exp(log_bias))
    if np.any(merged > 0.5):
        raise ValueError("merged mechanism probability exceeds 0.5")
    cols = np.unpackbits(uniq, axis=1, count=nd + no, bitorder="little")
    # order mechanisms by first appearance in the circuit for readability
    first = np.full(uniq.shape[0], len(inverse))
    np.minimum.at(first, inverse, np.arange(len(inverse)))
    order = np.argsort(first, kind="stable")
    cols, merged = cols[order], merged[order]
    return DetectorErrorModel(BinaryMatrix(cols[:, :nd].T), BinaryMatrix(cols[:, nd:].T), merged)


# ---------------------------------------------------------------- forward frames


def _detector_index(groups, num_measurements: int) -> np.ndarray:
    width = max((len(g) for g in groups), default=0)
    idx = np.full((len(groups), max(width, 1)), num_measurements, dtype=np.int64)
    for i, g in enumerate(groups):
        idx[i, : len(g)] = g
    return idx


class _FrameRunner:
    """Propagates ``shots`` Pauli frames; ``on_noise`` decides what gets injected."""

    def __init__(self, circuit: NoisyCircuit):
        self.circuit = circuit
        for ins in circuit.instructions:
            if ins.name not in GATES and ins.name not in NOISE and ins.name != "TICK":
                raise ValueError(f"unsupported instruction {ins.name!r}")
        self.det_idx = _detector_index(circuit.detectors, circuit.num_measurements)
        self.obs_idx = _detector_index(circuit.observables, circuit.num_measurements)

    def run(self, shots: int, on_noise) -> tuple[np.ndarray, np.ndarray]:
        c = self.circuit
        x = np.zeros((c.num_qubits, shots), dtype=bool)
        z = np.zeros((c.num_qubits, shots), dtype=bool)
        meas = np.zeros((c.num_measurements + 1, shots), dtype=bool)
        mptr = 0
        for idx, ins in enumerate(c.instructions):
            name, t = ins.name, ins.targets
            if name == "TICK":
                continue
            if name in NOISE:
                on_noise(idx, ins, x, z)
            elif name == "H":
                qs = list(t)
                x[qs], z[qs] = z[qs].copy(), x[qs].copy()
            elif name == "CX":
                ctl, tgt = list(t[0::2]), list(t[1::2])
                x[tgt] ^= x[ctl]
                z[ctl] ^= z[tgt]
            elif name == "R":
                x[list(t)] = False
                z[list(t)] = False
            else:
                qs = list(t)
                meas[mptr : mptr + len(qs)] = x[qs]
                mptr += len(qs)
                if name == "MR":
                    x[qs] = False
                    z[qs] = False
        det = np.bitwise_xor.reduce(meas[self.det_idx], axis=1) if c.num_detectors else np.zeros((0, shots), bool)
        obs = np.bitwise_xor.reduce(meas[self.obs_idx], axis=1) if c.num_observables else np.zeros((0, shots), bool)
        return det.T.copy(), obs.T.copy()


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(chunk)])))


def _bernoulli_positions(rng: np.random.Generator, p: float, size: int) -> np.ndarray:
    """Indices in range(size) of independent Bernoulli(p) successes."""
    if p <= 0 or size == 0:
        return np.zeros(0, dtype=np.int64)
    if p >= 0.25:
        return np.flatnonzero(rng.random(size) < p)
    out = []
    pos = -1
    while True:
        expect = int((size - pos) * p * 1.2) + 16
        gaps = rng.geometric(p, size=expect)
        cand = pos + np.cumsum(gaps)
        out.append(cand[cand < size])
        if cand[-1] >= size:
            break
        pos = int(cand[-1])
    return np.concatenate(out)


def _random_noise(rng: np.random.Generator, shots: int):
    def apply(idx, ins, x, z):
        t = np.asarray(ins.targets, dtype=np.int64)
        if ins.name == "DEP2":
            nloc = len(t) // 2
        else:
            nloc = len(t)
        hits = _bernoulli_positions(rng, ins.arg, nloc * shots)
        if hits.size == 0:
            return
        loc, shot = np.divmod(hits, shots)
        if ins.name == "XERR":
            x[t[loc], shot] ^= True
        elif ins.name == "DEP1":
            pk = rng.integers(1, 4, size=hits.size)
            q = t[loc]
            x[q, shot] ^= PAULI1[pk, 0].astype(bool)
            z[q, shot] ^= PAULI1[pk, 1].astype(bool)
        else:
            pk = rng.integers(1, 16, size=hits.size)
            q1, q2 = t[2 * loc], t[2 * loc + 1]
            x[q1, shot] ^= PAULI2[pk, 0].astype(bool)
            z[q1, shot] ^= PAULI2[pk, 1].astype(bool)
            x[q2, shot] ^= PAULI2[pk, 2].astype(bool)
            z[q2, shot] ^= PAULI2[pk, 3].astype(bool)

    return apply


def sample(circuit: NoisyCircuit, shots: int, seed: int = 0, first_chunk: int = 0) -> ShotBatch:
    """Monte Carlo detector/observable samples.

    Shot ``i`` is drawn from the counter-based stream of chunk
    ``first_chunk + i // CHUNK``, so results do not depend on how a run is
    split into batches as long as batches start on chunk boundaries.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    runner = _FrameRunner(circuit)
    dets, obss = [], []
    nchunks = -(-shots // CHUNK)
    for ci in range(nchunks):
        rng = _chunk_rng(seed, first_chunk + ci)
        d, o = runner.run(CHUNK, _random_noise(rng, CHUNK))
        dets.append(d)
        obss.append(o)
    det = np.vstack(dets)[:shots]
    obs = np.vstack(obss)[:shots]
    return ShotBatch(shots, det, obs, seed, first_chunk)


def inject_faults(circuit: NoisyCircuit, faults: list[Fault]) -> tuple[np.ndarray, np.ndarray]:
    """Run one deterministic shot per fault; returns (detector bits, observable bits)."""
    by_instr: dict[int, list[int]] = {}
    for col, f in enumerate(faults):
        by_instr.setdefault(f.index, []).append(col)

    def apply(idx, ins, x, z):
        for col in by_instr.get(idx, ()):
            f = faults[col]
            for q, fx, fz in zip(f.qubits, f.xs, f.zs):
                x[q, col] ^= bool(fx)
                z[q, col] ^= bool(fz)

    return _FrameRunner(circuit).run(max(len(faults), 1), apply)


def code_capacity_dem(code, p: float, error: str = "X") -> DetectorErrorModel:
    """Independent ``error``-type flips of probability p on every data qubit, perfect checks."""
    if error not in ("X", "Z"):
        raise ValueError("error must be 'X' or 'Z'")
    checks, logicals = (code.hz, code.logicals_z) if error == "X" else (code.hx, code.logicals_x)
    return DetectorErrorModel(checks, BinaryMatrix(logicals), np.full(code.N, float(p)))
