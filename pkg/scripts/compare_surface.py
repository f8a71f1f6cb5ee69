"""LDPC code vs K surface-code copies on the same number of qubits.

    python scripts/compare_surface.py configs/k3_compare.json --p-th-ldpc 0.0035 --p-th-sc 0.008
"""

import argparse
import logging
from pathlib import Path

from lacross.experiment import ExperimentConfig, run_comparison


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--n", type=int, help="family size (default: first in the config)")
    ap.add_argument("--p-th-ldpc", type=float)
    ap.add_argument("--p-th-sc", type=float)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    cfg = ExperimentConfig.load(args.config)
    for path in (cfg.output_csv, cfg.manifest):
        if path:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
    comp = run_comparison(cfg, args.n, args.p_th_ldpc, args.p_th_sc)
    print(f"{'p':>8}  {comp.ldpc.label:>18}  {comp.surface.label:>20}")
    for i, p in enumerate(comp.ldpc.p):
        print(f"{p:8.2e}  {comp.ldpc.P_L[i]:18.3e}  {comp.surface.P_L[i]:20.3e}")
    rep = comp.report
    if rep.p_star_empirical is not None:
        print(f"empirical crossing p* = {rep.p_star_empirical:.2e}")
    else:
        print("curves do not cross in the sampled range")
    if args.p_th_ldpc and args.p_th_sc:
        print(f"power-law crossing p* = {rep.p_star:.2e}, large-N limit {rep.p_star_limit:.2e}")


if __name__ == "__main__":
    main()
