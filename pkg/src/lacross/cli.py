"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 infeasible physics,
4 decode-integrity failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import analysis
from .circuit import build_syndrome_circuit, circuit_from_text, circuit_to_text, instrument
from .codes import build_seed, code_from_text, code_to_text, hypergraph_product, lacross_code
from .decoder import BpOsdDecoder, DecoderConfig, InvalidSyndrome
from .experiment import ConfigError, ExperimentConfig, noise_model, run_comparison, run_memory_experiment
from .framesim import DetectorErrorModel, ShotBatch, extract_dem, sample
from .rydberg import TWO_PI, Infeasible, RydbergConfig, range_table

EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_INTEGRITY = 2, 3, 4


def _angular(text: str) -> float:
    """Parse '1.9e6x2pi' (Hz times 2 pi) or a plain number in rad/s."""
    t = text.strip().lower()
    if t.endswith("x2pi"):
        return float(t[:-4]) * TWO_PI
    return float(t)


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_build_code(a) -> int:
    if a.poly:
        poly = tuple(int(x) for x in a.poly.split(","))
        seed = build_seed(a.n, max(poly), a.boundary, poly)
        code = hypergraph_product(seed, seed, layout=a.layout)
    else:
        code = lacross_code(a.n, a.k, a.boundary, a.layout)
    if a.distance is not None:
        code = code.with_distance(a.distance)
    Path(a.out).write_text(code_to_text(code))
    N, K, D = code.params
    _emit({"N": N, "K": K, "D": D, "file": a.out}, None)
    return 0


def cmd_build_circuit(a) -> int:
    code = code_from_text(Path(a.code).read_text())
    circ = build_syndrome_circuit(code, rounds=a.rounds, basis=a.basis)
    if a.noise != "none":
        circ = instrument(circ, noise_model(a.noise, a.p, a.c_source))
    Path(a.out).write_text(circuit_to_text(circ))
    info = {"qubits": circ.num_qubits, "rounds": circ.rounds, "detectors": circ.num_detectors,
            "observables": circ.num_observables, "file": a.out}
    if a.dem:
        dem = extract_dem(circ)
        Path(a.dem).write_text(dem.to_text())
        info["mechanisms"] = dem.num_mechanisms
    _emit(info, None)
    return 0


def cmd_rydberg(a) -> int:
    kw = {}
    if a.omega_ref is not None:
        kw["omega_ref"] = _angular(a.omega_ref)
    if a.temperature is not None:
        kw["T"] = a.temperature
    if a.spacing is not None:
        kw["R"] = a.spacing
    if a.n_max is not None:
        kw["n_search_max"] = a.n_max
    cfg = RydbergConfig(**kw)
    table = range_table(cfg, a.j_max, a.mode)
    _emit(table.rows(), a.out)
    return 0


def cmd_sample(a) -> int:
    circ = circuit_from_text(Path(a.circuit).read_text())
    batch = sample(circ, a.shots, seed=a.seed)
    batch.save(a.out)
    _emit({"shots": batch.shots, "detectors": int(batch.detector_bits.shape[1]),
           "observables": int(batch.observable_bits.shape[1]), "seed": a.seed, "file": a.out}, None)
    return 0


def _decoder_config(a) -> DecoderConfig:
    mode = {"cs": "combinationSweep", "osd0": "osd0", "off": "off"}[a.osd]
    return DecoderConfig(a.bp_iters, a.scale, mode, a.order)


def cmd_decode(a) -> int:
    dem = DetectorErrorModel.from_text(Path(a.dem).read_text())
    batch = ShotBatch.load(a.shots)
    if batch.detector_bits.shape[1] != dem.num_detectors:
        raise ConfigError("batch and DEM disagree on the number of detectors")
    dec = BpOsdDecoder(dem, _decoder_config(a))
    pred, _ = dec.decode_many(batch.detector_bits)
    fails = int((pred != batch.observable_bits).any(axis=1).sum())
    p_L = fails / batch.shots
    _emit({"shots": batch.shots, "failures": fails, "p_L": p_L,
           "stderr": math.sqrt(p_L * (1 - p_L) / batch.shots)}, a.out)
    return 0


def _load_config(a) -> ExperimentConfig:
    cfg = ExperimentConfig.load(a.config)
    over = {}
    if getattr(a, "out", None):
        over["output_csv"] = a.out
    if getattr(a, "manifest", None):
        over["manifest"] = a.manifest
    if getattr(a, "seed", None) is not None:
        over["seed"] = a.seed
    return replace(cfg, **over) if over else cfg


def cmd_sweep(a) -> int:
    cfg = _load_config(a)
    curves = run_memory_experiment(cfg)
    if not cfg.output_csv:
        print(",".join(analysis.CSV_COLUMNS))
        for c in curves:
            for row in c.rows():
                print(",".join(str(row[k]) for k in analysis.CSV_COLUMNS))
    return 0


def cmd_compare(a) -> int:
    cfg = _load_config(a)
    comp = run_comparison(cfg, a.n, a.p_th_ldpc, a.p_th_sc)
    rep = comp.report
    _emit({"ldpc": comp.ldpc.label, "surface_distance": comp.d_surface, "copies": comp.ldpc.K,
           "p_star": rep.p_star, "p_star_limit": rep.p_star_limit, "p_star_empirical": rep.p_star_empirical,
           "csv": cfg.output_csv}, a.report)
    return 0


def cmd_analyze(a) -> int:
    curves = analysis.read_csv(a.csv)
    groups: dict[tuple, list] = {}
    for c in curves:
        groups.setdefault((c.family, c.k, c.noise), []).append(c)
    out = []
    for (family, k, noise), cs in sorted(groups.items()):
        entry = {"family": family, "k": k, "noise": noise, "codes": [c.label for c in cs]}
        p_th = a.p_th
        if len(cs) >= 2:
            try:
                th = analysis.estimate_threshold(cs)
                entry["threshold"] = {"p_th": th.p_th, "low": th.low, "high": th.high}
                p_th = p_th or th.p_th
            except ValueError as exc:
                entry["threshold"] = {"error": str(exc)}
        fits = []
        if p_th:
            for c in cs:
                try:
                    fits.append({"code": c.label, **analysis.fit_subthreshold(c, p_th).to_json()})
                except ValueError as exc:
                    fits.append({"code": c.label, "error": str(exc)})
        entry["fits"] = fits
        out.append(entry)
    _emit(out, a.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lacross", description="La-cross code memory experiments")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-code", help="build a product code and write a .lcx file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--poly", help="comma-separated seed exponents, overrides --k")
    p.add_argument("--boundary", choices=("obc", "pbc"), default="obc")
    p.add_argument("--layout", choices=("obc", "pbc", "squeezed"))
    p.add_argument("--distance", type=int, metavar="W_MAX", help="brute-force distance up to this weight")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_code)

    p = sub.add_parser("build-circuit", help="emit a syndrome-extraction circuit")
    p.add_argument("--code", required=True)
    p.add_argument("--rounds", type=int)
    p.add_argument("--noise", choices=("hw", "ag", "none"), default="hw")
    p.add_argument("--p", type=float, default=0.002)
    p.add_argument("--c-source", choices=("paper", "model"), default="paper")
    p.add_argument("--basis", choices=("X", "Z"), default="Z")
    p.add_argument("--out", required=True)
    p.add_argument("--dem", help="also write the detector error model here")
    p.set_defaults(func=cmd_build_circuit)

    p = sub.add_parser("rydberg", help="range-dependent gate error table")
    p.add_argument("--j-max", type=int, default=7)
    p.add_argument("--mode", choices=("model", "paper"), default="model")
    p.add_argument("--omega-ref", help="Rabi frequency at n_ref, e.g. 1.9e6x2pi")
    p.add_argument("--temperature", type=float)
    p.add_argument("--spacing", type=float)
    p.add_argument("--n-max", type=int, help="upper bound on the principal quantum number")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rydberg)

    p = sub.add_parser("sample", help="Monte Carlo detector samples")
    p.add_argument("--circuit", required=True)
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("decode", help="decode a shot batch with BP+OSD")
    p.add_argument("--dem", required=True)
    p.add_argument("--shots", required=True, help="batch file written by 'sample'")
    p.add_argument("--bp-iters", type=int, default=4)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--osd", choices=("cs", "osd0", "off"), default="cs")
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_decode)

    for name, func, helptext in (("sweep", cmd_sweep, "run a memory-experiment sweep"),
                                 ("compare", cmd_compare, "LDPC vs surface-code copies")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", help="CSV output (overrides config)")
        p.add_argument("--manifest", help="resume manifest (overrides config)")
        p.add_argument("--seed", type=int)
        if name == "compare":
            p.add_argument("--n", type=int)
            p.add_argument("--p-th-ldpc", type=float)
            p.add_argument("--p-th-sc", type=float)
            p.add_argument("--report")
        p.set_defaults(func=func)

    p = sub.add_parser("analyze", help="thresholds and fits from a sweep CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--p-th", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(message)s")
    try:
        return a.func(a)
    except InvalidSyndrome as exc:
        print(f"decode integrity failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
