"""Batch command-line driver.

Every study is a subcommand writing CSV data plus a JSON summary into an
output directory. A flat key-value config file supplies defaults and any
explicit flag overrides it. Energies are ratios to the chain coupling J and
times are in 1/J throughout. Exit codes: 0 ok, 2 config error, 3 resource
guard, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import parse_flat_config
from .errors import NumericalError, ResourceLimitError, ValidationError
from .fidelity import average_fidelity_series
from .hamiltonian import DisorderSpec, SystemSpec
from .lattice import make_layout
from .localization import ipr_one_excitation, ipr_two_excitation
from .optimizer import (
    Strategy,
    StrategySpec,
    default_strategy_spec,
    optimize_strategy,
)
from .robustness import (
    DISORDER_AXES,
    dephasing_sweep,
    disorder_ensemble,
    state_scan,
    thermal_sweep,
)
from .serialize import (
    fidelity_series_csv,
    ipr_csv,
    state_scan_csv,
    summary_json,
    sweep_csv,
)

_STRATEGY_ALIASES = {
    "s1": Strategy.WEAK_COUPLING,
    "weak-coupling": Strategy.WEAK_COUPLING,
    "s2": Strategy.EDGE_FIELD,
    "edge-field": Strategy.EDGE_FIELD,
    "s3": Strategy.HYBRID,
    "hybrid": Strategy.HYBRID,
}


def parse_values(text: str) -> list[float]:
    """Comma list ('0.35,-0.25') or inclusive range syntax ('0:0.15:0.05')."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"range syntax is start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    return [float(p) for p in text.split(",") if p.strip()]


class _Resolver:
    """Merge precedence: explicit CLI flag > config file > default."""

    def __init__(self, args: argparse.Namespace, config_path: str | None):
        self.args = vars(args)
        self.cfg = {}
        if config_path:
            self.cfg = parse_flat_config(Path(config_path).read_text())
        self.resolved: dict = {}

    _UNTRACKED = {"out", "config", "no-timestamp", "workers"}

    def get(self, key: str, default=None, cast=None, required: bool = False):
        value = self.args.get(key.replace("-", "_"))
        if value is None:
            value = self.cfg.get(key, default)
        if value is None and required:
            raise ValidationError(f"missing required option --{key}")
        if value is not None and cast is not None:
            value = cast(value)
        if value is not None and key not in self._UNTRACKED:
            self.resolved[key] = value
        return value


def _as_float_list(v) -> list[float]:
    if isinstance(v, str):
        return parse_values(v)
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    return [float(v)]


def _system_spec(r: _Resolver) -> SystemSpec:
    n = r.get("n", cast=int, required=True)
    m = r.get("m", cast=int, required=True)
    strategy = r.get("strategy")
    b_user = r.get("b-user", cast=_as_float_list, required=True)
    j_user = r.get("j-user", cast=float)
    b_edge = r.get("b-edge", cast=float)
    if strategy is not None:
        s = _STRATEGY_ALIASES.get(str(strategy))
        if s is None:
            raise ValidationError(f"unknown strategy {strategy!r}")
        if s is Strategy.WEAK_COUPLING and b_edge is None:
            b_edge = 0.0
        if s is Strategy.EDGE_FIELD and j_user is None:
            j_user = 1.0
    if j_user is None:
        raise ValidationError("missing required option --j-user")
    if b_edge is None:
        b_edge = 0.0
    kwargs = {}
    per_bond = r.get("per-bond")
    if per_bond is not None:
        kwargs["per_bond"] = tuple(_as_float_list(per_bond))
    per_user = r.get("per-user")
    if per_user is not None:
        kwargs["per_user"] = tuple(_as_float_list(per_user))
    r.resolved.update({"j-user": j_user, "b-edge": b_edge, "b-user": list(b_user)})
    return SystemSpec(
        layout=make_layout(n, m),
        j_user=float(j_user),
        b_edge=float(b_edge),
        b_user=tuple(b_user),
        **kwargs,
    )


def _window(r: _Resolver) -> tuple[float, float]:
    t_min = r.get("t-min", 1.0, float)
    t_max = r.get("t-max", 500.0, float)
    return (t_min, t_max)


def _write(out_dir: Path, name: str, content: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(content)


def _run_evolve(r: _Resolver, out: Path, timestamp: bool, seed: int, workers: int) -> dict:
    spec = _system_spec(r)
    t_min, t_max = _window(r)
    dt = r.get("dt", 1.0, float)
    n_pts = int(np.floor((t_max - t_min) / dt + 1e-9)) + 1
    times = t_min + dt * np.arange(n_pts)
    series = average_fidelity_series(spec, times)
    _write(out, "evolve.csv", fidelity_series_csv(series, r.resolved, timestamp))
    best = int(np.argmax(series.f_t))
    results = {
        "f_t_max": float(series.f_t[best]),
        "tau": float(series.times[best]),
        "f_c_at_tau": None if series.f_c is None else float(series.f_c[best]),
    }
    _write(out, "evolve_summary.json", summary_json("evolve", r.resolved, results, seed))
    return results


def _strategy_spec_from(r: _Resolver, m: int) -> StrategySpec:
    strategy = _STRATEGY_ALIASES.get(str(r.get("strategy", required=True)))
    if strategy is None:
        raise ValidationError("unknown strategy")
    base = default_strategy_spec(
        strategy,
        m,
        time_window=_window(r),
        coarse_dt=r.get("coarse-dt", 1.0, float),
        refine_dt=r.get("refine-dt", 0.05, float),
    )
    j_grid = r.get("j-user-grid")
    b_edge_grid = r.get("b-edge-grid")
    b_user_grid = r.get("b-user-grid")
    kwargs = {}
    if j_grid is not None:
        kwargs["j_user_grid"] = tuple(_as_float_list(j_grid))
    if b_edge_grid is not None:
        kwargs["b_edge_grid"] = tuple(_as_float_list(b_edge_grid))
    if b_user_grid is not None:
        kwargs["b_user_grids"] = tuple(tuple(_as_float_list(b_user_grid)) for _ in range(m))
    if kwargs:
        base = StrategySpec(
            strategy=base.strategy,
            j_user_grid=kwargs.get("j_user_grid", base.j_user_grid),
            b_edge_grid=kwargs.get("b_edge_grid", base.b_edge_grid),
            b_user_grids=kwargs.get("b_user_grids", base.b_user_grids),
            time_window=base.time_window,
            coarse_dt=base.coarse_dt,
            refine_dt=base.refine_dt,
        )
    return base


def _run_optimize(r: _Resolver, out: Path, timestamp: bool, seed: int, workers: int) -> dict:
    n = r.get("n", cast=int, required=True)
    m = r.get("m", cast=int, required=True)
    sspec = _strategy_spec_from(r, m)
    result = optimize_strategy(sspec, n, m, workers=workers)
    _write(out, "optimize_series.csv", fidelity_series_csv(result.series, r.resolved, timestamp))
    results = result.summary_dict()
    _write(out, "optimize_summary.json", summary_json("optimize", r.resolved, results, seed))
    return results


def _run_table(r: _Resolver, out: Path, timestamp: bool, seed: int, workers: int) -> dict:
    n_list = [int(x) for x in _as_float_list(r.get("n-list", required=True))]
    m = r.get("m", cast=int, required=True)
    sspec = _strategy_spec_from(r, m)
    rows = []
    for n in n_list:
        res = optimize_strategy(sspec, n, m, workers=workers)
        rows.append(res.summary_dict())
    lines = ["n,f_t_max,f_c_at_tau,tau,j_user,b_edge," + ",".join(f"b_user_{a+1}" for a in range(m))]
    for row in rows:
        p = row["params"]
        f_c = "" if row["f_c_at_tau"] is None else f"{row['f_c_at_tau']:.12g}"
        cells = [
            str(row["n"]),
            f"{row['f_t_max']:.12g}",
            f_c,
            f"{row['tau']:.12g}",
            f"{p['j_user']:.12g}",
            f"{p['b_edge']:.12g}",
        ] + [f"{b:.12g}" for b in p["b_user"]]
        lines.append(",".join(cells))
    _write(out, "table.csv", "\n".join(lines) + "\n")
    results = {"rows": rows}
    _write(out, "table_summary.json", summary_json("table", r.resolved, results, seed))
    return results


def _run_thermal(r: _Resolver, out: Path, timestamp: bool, seed: int, workers: int) -> dict:
    spec = _system_spec(r)
    kbts = _as_float_list(r.get("kbt-values", required=True))
    sweep = thermal_sweep(spec, _window(r), kbts, sample_dt=r.get("sample-dt", 1.0, float))
    _write(out, "thermal.csv", sweep_csv(sweep, r.resolved, timestamp))
    results = {"kbt": list(sweep.values), "f_t_max": list(sweep.mean)}
    _write(out, "thermal_summary.json", summary_json("thermal", r.resolved, results, seed))
    return results


def _run_disorder(r: _Resolver, out: Path, timestamp: bool, seed: int, workers: int) -> dict:
    spec = _system_spec(r)
    axis = r.get("axis", required=True)
    if axis not in DISORDER_AXES:
        raise ValidationError(f"--axis must be one of {DISORDER_AXES}")
    values = _as_float_list(r.get("axis-values", required=True))
    disorder = DisorderSpec(
        delta=r.get("delta", 0.0, float),
        delta0=r.get("delta0", 0.0, float),
        eta=r.get("eta", 0.0, float),
        eta0=r.get("eta0", 0.0, float),
        n_realizations=r.get("n-realizations", 100, int),
        master_seed=seed,
    )
    sweep = disorder_ensemble(
        spec,
        _window(r),
        disorder,
        axis,
        values,
        coarse_dt=r.get("coarse-dt", 1.0, float),
        refine_dt=r.get("refine-dt", 0.05, float),
        workers=workers,
    )
    _write(out, "disorder.csv", sweep_csv(sweep, r.resolved, timestamp))
    results = {"axis": axis, "values": list(sweep.values), "mean": list(sweep.mean), "std": list(sweep.std)}
    _write(out, "disorder_summary.json", summary_json("disorder", r.resolved, results, seed))
    return results


def _run_dephasing(r: _Resolver, out: Path, timestamp: bool, seed: int, workers: int) -> dict:
    spec = _system_spec(r)
    gammas = _as_float_list(r.get("gamma-values", required=True))
    sweep = dephasing_sweep(
        spec,
        _window(r),
        gammas,
        sample_dt=r.get("sample-dt", 1.0, float),
        method=r.get("method", "splitstep"),
        step=r.get("step", cast=float),
    )
    _write(out, "dephasing.csv", sweep_csv(sweep, r.resolved, timestamp))
    results = {"gamma": list(sweep.values), "f_t_max": list(sweep.mean)}
    _write(out, "dephasing_summary.json", summary_json("dephasing", r.resolved, results, seed))
    return results


def _run_state_scan(r: _Resolver, out: Path, timestamp: bool, seed: int, workers: int) -> dict:
    spec = _system_spec(r)
    tau = r.get("tau", cast=float, required=True)
    n_theta = r.get("theta-points", 41, int)
    theta = np.linspace(0.0, np.pi, n_theta)
    grid, surface, phis = state_scan(spec, tau, theta, phi_seed=seed)
    _write(out, "state_scan.csv", state_scan_csv(grid, surface, r.resolved, timestamp))
    results = {
        "phi": list(phis),
        "min_f_t": float(surface.min()),
        "max_f_t": float(surface.max()),
    }
    _write(out, "state_scan_summary.json", summary_json("state-scan", r.resolved, results, seed))
    return results


def _run_ipr(r: _Resolver, out: Path, timestamp: bool, seed: int, workers: int) -> dict:
    spec = _system_spec(r)
    sectors = [int(x) for x in _as_float_list(r.get("sectors", "1,2"))]
    reports = []
    for k in sectors:
        if k == 1:
            reports.append(ipr_one_excitation(spec))
        elif k == 2:
            reports.append(ipr_two_excitation(spec))
        else:
            raise ValidationError("IPR reports cover sectors 1 and 2")
    _write(out, "ipr.csv", ipr_csv(reports, r.resolved, timestamp))
    results = {
        f"k{rep.sector}_min_ipr": min(e.ipr for e in rep.entries) for rep in reports
    }
    _write(out, "ipr_summary.json", summary_json("ipr", r.resolved, results, seed))
    return results


_RUNNERS = {
    "evolve": _run_evolve,
    "optimize": _run_optimize,
    "table": _run_table,
    "thermal": _run_thermal,
    "disorder": _run_disorder,
    "dephasing": _run_dephasing,
    "state-scan": _run_state_scan,
    "ipr": _run_ipr,
}

_EPILOG = """exit codes: 0 ok, 2 config/validation error, 3 resource guard, 4 numerical failure.
Values accept comma lists (0.35,-0.25) or ranges start:stop:step (0:0.15:0.05)."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinbus",
        description="Multi-user state transfer across a shared spin chain",
        epilog=_EPILOG,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key-value config file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--workers", type=int, default=None, help="parallel workers")
        p.add_argument(
            "--no-timestamp",
            action="store_true",
            help="omit the timestamped metadata line for byte-identical reruns",
        )

    def add_system(p):
        p.add_argument("--n", type=int, help="chain length N")
        p.add_argument("--m", type=int, help="number of user pairs M")
        p.add_argument("--strategy", help="s1 | s2 | s3 (sets b-edge/j-user defaults)")
        p.add_argument("--j-user", type=float, help="user-chain coupling J0/J")
        p.add_argument("--b-edge", type=float, help="edge field B0/J")
        p.add_argument("--b-user", help="per-user fields, comma list")
        p.add_argument("--per-bond", help="explicit chain couplings, comma list")
        p.add_argument("--per-user", help="explicit user couplings, comma list")

    def add_time(p):
        p.add_argument("--t-min", type=float)
        p.add_argument("--t-max", type=float)

    p = sub.add_parser("evolve", help="fidelity series for one parameter set")
    add_common(p); add_system(p); add_time(p)
    p.add_argument("--dt", type=float)

    p = sub.add_parser("optimize", help="grid-search one strategy at one size")
    add_common(p); add_time(p)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--strategy")
    p.add_argument("--j-user-grid")
    p.add_argument("--b-edge-grid")
    p.add_argument("--b-user-grid")
    p.add_argument("--coarse-dt", type=float)
    p.add_argument("--refine-dt", type=float)

    p = sub.add_parser("table", help="optimize a strategy across several sizes")
    add_common(p); add_time(p)
    p.add_argument("--n-list")
    p.add_argument("--m", type=int)
    p.add_argument("--strategy")
    p.add_argument("--j-user-grid")
    p.add_argument("--b-edge-grid")
    p.add_argument("--b-user-grid")
    p.add_argument("--coarse-dt", type=float)
    p.add_argument("--refine-dt", type=float)

    p = sub.add_parser("thermal", help="peak fidelity vs channel temperature")
    add_common(p); add_system(p); add_time(p)
    p.add_argument("--kbt-values")
    p.add_argument("--sample-dt", type=float)

    p = sub.add_parser("disorder", help="ensemble-averaged peak fidelity vs disorder")
    add_common(p); add_system(p); add_time(p)
    p.add_argument("--axis", help="delta | delta0 | eta | eta0")
    p.add_argument("--axis-values")
    p.add_argument("--n-realizations", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--delta0", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--eta0", type=float)
    p.add_argument("--coarse-dt", type=float)
    p.add_argument("--refine-dt", type=float)

    p = sub.add_parser("dephasing", help="peak fidelity vs dephasing rate")
    add_common(p); add_system(p); add_time(p)
    p.add_argument("--gamma-values")
    p.add_argument("--sample-dt", type=float)
    p.add_argument("--method", choices=["rk4", "splitstep"])
    p.add_argument("--step", type=float)

    p = sub.add_parser("state-scan", help="pointwise fidelity over input polar angles")
    add_common(p); add_system(p)
    p.add_argument("--tau", type=float)
    p.add_argument("--theta-points", type=int)

    p = sub.add_parser("ipr", help="eigenstate localization report")
    add_common(p); add_system(p)
    p.add_argument("--sectors", help="comma list from {1,2}")

    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        r = _Resolver(args, args.config)
        out = Path(r.get("out", "out"))
        seed = r.get("seed", 0, int)
        workers = r.get("workers", 1, int)
        timestamp = not r.get("no-timestamp", False)
        runner = _RUNNERS[args.subcommand]
        runner(r, out, timestamp, seed, workers)
        return 0
    except ValidationError as exc:
        _emit_error("validation", exc)
        return 2
    except ResourceLimitError as exc:
        _emit_error("resource", exc)
        return 3
    except NumericalError as exc:
        _emit_error("numerical", exc)
        return 4


def _emit_error(kind: str, exc: Exception) -> None:
    record = {"error": {"type": kind, "message": str(exc)}}
    print(json.dumps(record), file=sys.stderr)


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
