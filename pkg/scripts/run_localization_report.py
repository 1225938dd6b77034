#!/usr/bin/env python3
"""Eigenstate-localization reports for the two regimes behind the protocol."""

import argparse
import sys

from spinbus.cli import run


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/localization")
    args = ap.parse_args()
    jobs = {
        "weak_coupling": ["--n", "12", "--m", "2", "--j-user", "0.04", "--b-user", "0.4,-0.5"],
        "edge_field": ["--n", "12", "--m", "2", "--j-user", "1", "--b-edge", "25",
                        "--b-user", "0.15,-0.45"],
    }
    for name, flags in jobs.items():
        code = run(["ipr", *flags, "--out", f"{args.out}/{name}", "--no-timestamp"])
        if code:
            return code
    print(f"wrote localization reports under {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
