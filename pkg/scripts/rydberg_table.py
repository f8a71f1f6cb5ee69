"""Range constants c_j from the Rydberg model over a sweep of reference Rabi frequencies."""

import argparse

from lacross.circuit import PAPER_C_TABLE
from lacross.rydberg import TWO_PI, RydbergConfig, doppler_dephasing, range_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omegas", default="0.5,1,1.9,5,15", help="Omega_ref / 2pi in MHz, comma separated")
    ap.add_argument("--temperature", type=float, default=10e-6)
    args = ap.parse_args()

    base = RydbergConfig(T=args.temperature)
    print(f"Doppler dephasing {doppler_dephasing(base):.1f} rad/s")
    print(f"{'Omega/2pi':>10} " + " ".join(f"{'c' + str(j):>6}" for j in range(1, 8)) + "   n_j")
    for f in (float(x) for x in args.omegas.split(",")):
        table = range_table(RydbergConfig(T=args.temperature, omega_ref=TWO_PI * f * 1e6))
        cs = " ".join(f"{table.c_of_range[j]:6.2f}" for j in range(1, 8))
        ns = ",".join(str(table.n_of_range[j]) for j in range(1, 8))
        print(f"{f:8.2f}MHz {cs}   {ns}")
    print(f"{'published':>10} " + " ".join(f"{PAPER_C_TABLE[j]:6.2f}" for j in range(1, 8)))


if __name__ == "__main__":
    main()
