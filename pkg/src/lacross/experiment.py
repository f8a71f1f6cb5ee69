"""Memory-experiment sweeps: build, sample, decode, record.

Every (code size, p) point owns a seed derived from the master seed and the
point's content, and its shots come from consecutive chunks of that seed's
stream.  Completed points are kept in a JSON manifest keyed by a hash of the
point description so an interrupted sweep resumes where it stopped.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .analysis import (
    CSV_COLUMNS,
    CrossingReport,
    DecodingCurve,
    crossing_point,
    empirical_crossing,
    fit_subthreshold,
    sc_family_curve,
    write_csv,
)
from .circuit import NoiseModel, build_syndrome_circuit, instrument
from .codes import CssCode, lacross_code, surface_code
from .decoder import BpOsdDecoder, DecoderConfig, InvalidSyndrome
from .framesim import CHUNK, extract_dem, sample
from .rydberg import RydbergConfig, range_table

log = logging.getLogger(__name__)

MAX_BATCH_CHUNKS = 32


class ConfigError(ValueError):
    pass


class NoMatchingPartition(ValueError):
    pass


@dataclass(frozen=True)
class FamilySpec:
    k: int
    sizes: tuple[int, ...]
    boundary: str = "obc"
    layout: str | None = None
    name: str = "lacross"

    def __post_init__(self):
        if self.k < 1 or not self.sizes:
            raise ConfigError("family needs k >= 1 and at least one size")
        if self.boundary not in ("obc", "pbc"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    family: FamilySpec
    p_grid: tuple[float, ...]
    noise: str = "hw"
    c_source: str = "paper"
    rounds: int | None = None
    max_shots: int = 100_000
    max_errors: int = 1000
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    seed: int = 0
    basis: str = "Z"
    output_csv: str | None = None
    manifest: str | None = None

    def __post_init__(self):
        if self.max_shots < 1 or self.max_errors < 1:
            raise ConfigError("shot policy must be positive")
        if list(self.p_grid) != sorted(self.p_grid) or not self.p_grid:
            raise ConfigError("p grid must be non-empty and sorted")
        if any(not 0 < p < 1 for p in self.p_grid):
            raise ConfigError("p values must lie in (0, 1)")
        if self.c_source not in ("paper", "model"):
            raise ConfigError(f"unknown c source {self.c_source!r}")
        if self.basis not in ("X", "Z"):
            raise ConfigError("basis must be X or Z")
        if self.rounds is not None and self.rounds < 1:
            raise ConfigError("rounds must be >= 1")
        try:
            NoiseModel.from_name(self.noise, self.p_grid[0])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"]["sizes"] = list(self.family.sizes)
        d["p_grid"] = list(self.p_grid)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            d = dict(d)
            fam = dict(d.pop("family"))
            fam["sizes"] = tuple(int(n) for n in fam["sizes"])
            d["family"] = FamilySpec(**fam)
            d["p_grid"] = tuple(float(p) for p in d["p_grid"])
            if "decoder" in d:
                d["decoder"] = DecoderConfig(**d["decoder"])
            return cls(**d)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad experiment config: {exc}") from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None


def _digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def point_seed(master: int, key: dict) -> int:
    return int(_digest({"seed": master, **key})[:15], 16)


def c_table(source: str, j_max: int = 7, rydberg: RydbergConfig | None = None) -> dict[int, float]:
    return range_table(rydberg, j_max, "paper" if source == "paper" else "model").c_of_range


def noise_model(kind: str, p: float, c_source: str = "paper") -> NoiseModel:
    table = c_table(c_source) if kind in ("hw", "hardwareSpecific") else None
    return NoiseModel.from_name(kind, p, table)


@dataclass(frozen=True)
class PointResult:
    shots: int
    failures: int


def run_point(code: CssCode, model: NoiseModel, rounds: int, decoder: DecoderConfig, seed: int,
              max_shots: int, max_errors: int, basis: str = "Z") -> PointResult:
    """Sample and decode until ``max_errors`` failures or ``max_shots`` shots.

    Batches are whole chunks; a batch is sized to expect about ten failures
    from the running failure rate.
    """
    circuit = instrument(build_syndrome_circuit(code, rounds=rounds, basis=basis), model)
    dem = extract_dem(circuit)
    dec = BpOsdDecoder(dem, decoder)
    shots = failures = 0
    chunk = 0
    max_chunks = -(-max_shots // CHUNK)
    while failures < max_errors and chunk < max_chunks:
        if failures == 0:
            want = 1 if shots == 0 else min(2 * (shots // CHUNK), MAX_BATCH_CHUNKS)
        else:
            rate = failures / shots
            want = math.ceil(min(10, max_errors - failures) / rate / CHUNK)
        n_chunks = max(1, min(want, MAX_BATCH_CHUNKS, max_chunks - chunk))
        batch_shots = min(n_chunks * CHUNK, max_shots - shots)
        batch = sample(circuit, batch_shots, seed=seed, first_chunk=chunk)
        pred, _ = dec.decode_many(batch.detector_bits)
        failures += int((pred != batch.observable_bits).any(axis=1).sum())
        shots += batch_shots
        chunk += n_chunks
    return PointResult(shots, failures)


class Manifest:
    """JSON record of completed points, rewritten atomically after each point."""

    def __init__(self, path: str | None, config_hash: str):
        self.path = path
        self.data = {"config_hash": config_hash, "points": {}}
        if path and os.path.exists(path):
            loaded = json.loads(Path(path).read_text())
            self.data["points"] = loaded.get("points", {})

    def get(self, key: str):
        return self.data["points"].get(key)

    def put(self, key: str, value: dict) -> None:
        self.data["points"][key] = value
        if self.path:
            tmp = f"{self.path}.tmp"
            Path(tmp).write_text(json.dumps(self.data, sort_keys=True, indent=1))
            os.replace(tmp, self.path)


def _family_code(spec: FamilySpec, n: int) -> CssCode:
    if spec.k == 1 and spec.boundary == "obc" and spec.name == "surface":
        return surface_code(n)
    code = lacross_code(n, spec.k, spec.boundary, spec.layout)
    if code.D is None:
        code = code.with_distance(12)
    return code


def run_memory_experiment(cfg: ExperimentConfig, codes: dict | None = None) -> list[DecodingCurve]:
    """One curve per family size.  ``codes`` may override the code used for a size."""
    cfg_hash = _digest(cfg.to_dict())
    manifest = Manifest(cfg.manifest, cfg_hash)
    curves = []
    for n in cfg.family.sizes:
        code = (codes or {}).get(n) or _family_code(cfg.family, n)
        rounds = cfg.rounds or code.D
        ps, shots, fails = [], [], []
        for p in cfg.p_grid:
            key = {"family": cfg.family.name, "k": cfg.family.k, "n": n, "boundary": cfg.family.boundary,
                   "layout": cfg.family.layout, "N": code.N, "noise": cfg.noise, "c_source": cfg.c_source,
                   "p": p, "rounds": rounds, "max_shots": cfg.max_shots, "max_errors": cfg.max_errors,
                   "decoder": asdict(cfg.decoder), "basis": cfg.basis}
            hkey = _digest({"seed": cfg.seed, **key})
            done = manifest.get(hkey)
            if done is None:
                model = noise_model(cfg.noise, p, cfg.c_source)
                try:
                    res = run_point(code, model, rounds, cfg.decoder, point_seed(cfg.seed, key),
                                    cfg.max_shots, cfg.max_errors, cfg.basis)
                except InvalidSyndrome:
                    raise
                except ValueError as exc:
                    raise ValueError(f"n={n}, p={p}: {exc}") from exc
                done = {"shots": res.shots, "failures": res.failures}
                manifest.put(hkey, done)
                log.info("%s n=%d p=%g: %d/%d", cfg.family.name, n, p, done["failures"], done["shots"])
            ps.append(p)
            shots.append(done["shots"])
            fails.append(done["failures"])
        curves.append(DecodingCurve.from_counts(
            cfg.family.name, cfg.family.k, n, code.N, code.K, code.D, cfg.noise, rounds, ps, shots, fails))
    if cfg.output_csv:
        write_csv(curves, cfg.output_csv)
    return curves


# ---------------------------------------------------------------- surface-code comparison


def surface_partition(N: int, K: int) -> int:
    """Largest surface-code distance d >= 2 with K copies of d^2 + (d-1)^2 qubits fitting in N."""
    d = 1
    while K * ((d + 1) ** 2 + d**2) <= N:
        d += 1
    if d < 2:
        raise NoMatchingPartition(f"{K} surface codes of distance >= 2 do not fit in {N} qubits")
    return d


@dataclass(frozen=True)
class Comparison:
    ldpc: DecodingCurve
    surface_single: DecodingCurve
    surface: DecodingCurve
    d_surface: int
    report: CrossingReport | None


def run_comparison(cfg: ExperimentConfig, n: int | None = None, p_th_ldpc: float | None = None,
                   p_th_sc: float | None = None) -> Comparison:
    """LDPC point vs K surface-code copies at matched N and K, both run for D_ldpc rounds.

    The empirical crossing is always reported; the closed-form p* needs the
    two family thresholds, which a single-size comparison cannot measure.
    """
    n = n if n is not None else cfg.family.sizes[0]
    ldpc_cfg = replace(cfg, family=replace(cfg.family, sizes=(n,)), output_csv=None)
    code = _family_code(cfg.family, n)
    d_sc = surface_partition(code.N, code.K)
    rounds = cfg.rounds or code.D
    ldpc = run_memory_experiment(replace(ldpc_cfg, rounds=rounds), {n: code})[0]
    sc_cfg = replace(ldpc_cfg, family=FamilySpec(1, (d_sc,), "obc", None, "surface"), rounds=rounds,
                     decoder=replace(cfg.decoder, scaling_factor=0.625))
    single = run_memory_experiment(sc_cfg)[0]
    sc = sc_family_curve(single, code.K)
    p_star = limit = float("nan")
    if p_th_ldpc is not None and p_th_sc is not None:
        fl = fit_subthreshold(ldpc, p_th_ldpc)
        fs = fit_subthreshold(sc, p_th_sc)
        rep = crossing_point(fl.A, p_th_ldpc, fl.beta, fs.A, p_th_sc, fs.beta, code.N)
        p_star, limit = rep.p_star, rep.p_star_limit
    report = CrossingReport(p_star, limit, empirical_crossing(ldpc, sc))
    if cfg.output_csv:
        write_csv([ldpc, sc], cfg.output_csv)
    return Comparison(ldpc, single, sc, d_sc, report)


__all__ = [
    "CSV_COLUMNS", "Comparison", "ConfigError", "ExperimentConfig", "FamilySpec", "Manifest",
    "NoMatchingPartition", "PointResult", "noise_model", "point_seed", "run_comparison",
    "run_memory_experiment", "run_point", "surface_partition",
]
