#!/usr/bin/env python3
"""Thermal, disorder, and dephasing sweeps at the sizes used in the write-up.

Produces results/robustness/{thermal,disorder_*,dephasing}/. The full set
takes a few minutes; --quick trims ensembles and windows.
"""

import argparse
import sys

from spinbus.cli import run

S1_N8 = ["--n", "8", "--m", "2", "--j-user", "0.04", "--b-user", "0.15,-0.05"]
S2_N8 = ["--n", "8", "--m", "2", "--strategy", "s2", "--b-edge", "25", "--b-user", "0.25,-0.15"]
S1_N6 = ["--n", "6", "--m", "2", "--j-user", "0.04", "--b-user", "0.15,-0.05"]
S2_N6 = ["--n", "6", "--m", "2", "--strategy", "s2", "--b-edge", "26", "--b-user", "0.3,-0.2"]


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--out", default="results/robustness")
    ap.add_argument("--workers", default="1")
    args = ap.parse_args()
    n_real = "20" if args.quick else "100"
    t_max = "200" if args.quick else "500"
    common = ["--t-max", t_max, "--no-timestamp", "--seed", "11", "--workers", args.workers]

    jobs = [
        (["thermal", *S1_N6, "--kbt-values", "0.01,0.05,0.1,0.2,0.5,1,2,5,10",
          "--out", f"{args.out}/thermal_weak_coupling"], "thermal s1"),
        (["thermal", *S2_N6, "--kbt-values", "0.01,0.05,0.1,0.2,0.5,1,2,5,10",
          "--out", f"{args.out}/thermal_edge_field"], "thermal s2"),
        (["disorder", *S1_N8, "--axis", "delta0", "--axis-values", "0:0.15:0.025",
          "--n-realizations", n_real, "--out", f"{args.out}/disorder_user_coupling"], "disorder delta0"),
        (["disorder", *S2_N8, "--axis", "delta", "--axis-values", "0:0.1:0.02",
          "--n-realizations", n_real, "--out", f"{args.out}/disorder_chain_coupling"], "disorder delta"),
        (["disorder", *S1_N8, "--axis", "eta", "--axis-values", "0:0.15:0.025",
          "--n-realizations", n_real, "--out", f"{args.out}/disorder_user_field"], "disorder eta"),
        (["dephasing", *S1_N8, "--gamma-values", "0,0.00025,0.0005,0.001,0.0015,0.002",
          "--out", f"{args.out}/dephasing_weak_coupling"], "dephasing s1"),
        (["dephasing", *S2_N8, "--gamma-values", "0,0.00025,0.0005,0.001,0.0015,0.002",
          "--out", f"{args.out}/dephasing_edge_field"], "dephasing s2"),
    ]
    for argv, label in jobs:
        print(f"running {label} ...", flush=True)
        code = run(argv + common)
        if code:
            return code
    print(f"wrote robustness data under {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
