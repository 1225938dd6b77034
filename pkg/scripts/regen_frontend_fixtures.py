#!/usr/bin/env python3
"""Regenerate the frontend's fixture CSVs from the simulator CLI.

Every fixture is small, seeded, and written without a timestamp so reruns
are byte-identical.
"""

import sys
from pathlib import Path

from spinbus.cli import run

FIXTURES = Path(__file__).resolve().parent.parent / "frontend" / "test" / "fixtures"

JOBS = [
    ("timeseries.csv", "evolve", "evolve.csv",
     ["--n", "6", "--m", "2", "--strategy", "s1", "--j-user", "0.04",
      "--b-user", "0.35,-0.25", "--t-max", "60"]),
    ("timeseries_edge_field.csv", "evolve", "evolve.csv",
     ["--n", "6", "--m", "2", "--strategy", "s2", "--b-edge", "21",
      "--b-user", "0.3,-0.35", "--t-max", "60"]),
    ("timeseries_single_user.csv", "evolve", "evolve.csv",
     ["--n", "4", "--m", "1", "--j-user", "0.2", "--b-user", "0.1", "--t-max", "30"]),
    ("sweep_thermal.csv", "thermal", "thermal.csv",
     ["--n", "4", "--m", "2", "--j-user", "0.04", "--b-user", "0.15,-0.05",
      "--kbt-values", "0.01,0.1,0.5,1,2,5", "--t-max", "60"]),
    ("sweep_disorder.csv", "disorder", "disorder.csv",
     ["--n", "5", "--m", "2", "--j-user", "0.04", "--b-user", "0.15,-0.05",
      "--axis", "delta0", "--axis-values", "0,0.05,0.1,0.15",
      "--n-realizations", "10", "--t-max", "60", "--seed", "3"]),
    ("sweep_disorder_field.csv", "disorder", "disorder.csv",
     ["--n", "5", "--m", "2", "--j-user", "0.04", "--b-user", "0.15,-0.05",
      "--axis", "eta", "--axis-values", "0,0.05,0.1,0.15",
      "--n-realizations", "10", "--t-max", "60", "--seed", "4"]),
    ("sweep_dephasing.csv", "dephasing", "dephasing.csv",
     ["--n", "4", "--m", "2", "--j-user", "0.1", "--b-user", "0.2,-0.2",
      "--gamma-values", "0,0.001,0.002,0.004", "--t-max", "40"]),
    ("heatmap.csv", "state-scan", "state_scan.csv",
     ["--n", "5", "--m", "2", "--j-user", "0.04", "--b-user", "0.35,-0.25",
      "--tau", "40", "--theta-points", "21"]),
    ("stem.csv", "ipr", "ipr.csv",
     ["--n", "8", "--m", "2", "--j-user", "0.04", "--b-user", "0.4,-0.5"]),
]


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    for target, sub, produced, flags in JOBS:
        out = Path("/tmp/fixture_gen") / target
        code = run([sub, *flags, "--out", str(out), "--no-timestamp"])
        if code:
            return code
        (FIXTURES / target).write_bytes((out / produced).read_bytes())
        print(f"wrote {FIXTURES / target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
