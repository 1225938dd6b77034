#!/usr/bin/env python3
"""Reproduce the two N=20 demonstration runs (time traces + input-state scans).

Writes CSVs under results/demo/. Pass --quick for a shorter time window.
"""

import argparse
import sys

from spinbus.cli import run


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--out", default="results/demo")
    args = ap.parse_args()
    t_max = "120" if args.quick else "500"

    runs = {
        "weak_coupling": [
            "--n", "20", "--m", "2", "--strategy", "s1",
            "--j-user", "0.04", "--b-user", "0.35,-0.25",
        ],
        "edge_field": [
            "--n", "20", "--m", "2", "--strategy", "s2",
            "--b-edge", "21", "--b-user", "0.3,-0.35",
        ],
    }
    for name, flags in runs.items():
        code = run(
            ["evolve", *flags, "--t-max", t_max, "--out", f"{args.out}/{name}", "--no-timestamp"]
        )
        if code:
            return code
        code = run(
            ["state-scan", *flags, "--tau", "321" if name == "edge_field" else "429",
             "--theta-points", "41", "--out", f"{args.out}/{name}", "--no-timestamp"]
        )
        if code:
            return code
    print(f"wrote demonstration data under {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
