"""Run a family sweep from a JSON config and report the threshold and sub-threshold fits.

    python scripts/threshold_sweep.py configs/k2_hw_threshold.json
"""

import argparse
import json
import logging
from pathlib import Path

from lacross.analysis import NoCrossing, estimate_threshold, fit_subthreshold
from lacross.experiment import ExperimentConfig, run_memory_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--report", help="write the summary JSON here")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    cfg = ExperimentConfig.load(args.config)
    for path in (cfg.output_csv, cfg.manifest):
        if path:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
    curves = run_memory_experiment(cfg)
    for c in curves:
        print(f"{c.label:>22}  " + "  ".join(f"{P:.2e}" for P in c.P_L))

    summary = {"codes": [c.label for c in curves]}
    try:
        th = estimate_threshold(curves)
    except NoCrossing:
        print("no crossing in the sampled range")
    else:
        print(f"p_th = {100 * th.p_th:.3f}%  (pairwise crossings {100 * th.low:.3f}-{100 * th.high:.3f}%)")
        summary["threshold"] = {"p_th": th.p_th, "low": th.low, "high": th.high}
        fits = []
        for c in curves:
            try:
                fit = fit_subthreshold(c, th.p_th)
            except ValueError:
                continue
            print(f"{c.label:>22}  slope {fit.slope:.2f} +/- {fit.slope_stderr:.2f}  (D_e = {fit.D_e})")
            fits.append({"code": c.label, **fit.to_json()})
        summary["fits"] = fits
    if args.report:
        Path(args.report).write_text(json.dumps(summary, indent=2) + "\n")


if __name__ == "__main__":
    main()
