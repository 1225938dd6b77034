"""CSV and JSON emission with embedded provenance.

Every CSV starts with ``#``-prefixed metadata lines (resolved config, package
version, and optionally a timestamp) followed by a fixed documented header.
Floats are written with 12 significant digits so identical runs produce
byte-identical files.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .config import format_value
from .fidelity import FidelitySeries
from .localization import IPRReport
from .robustness import SweepResult


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def metadata_lines(config: dict, timestamp: bool) -> list[str]:
    lines = [f"# version = {__version__}"]
    if timestamp:
        lines.append(f"# generated = {datetime.now(timezone.utc).isoformat()}")
    for key in sorted(config):
        lines.append(f"# {key} = {format_value(config[key])}")
    return lines


def fidelity_series_csv(series: FidelitySeries, config: dict, timestamp: bool = False) -> str:
    m = series.n_users
    cols = ["t"]
    cols += [f"fbar_{a + 1}{b + 1}" for a in range(m) for b in range(m)]
    cols.append("f_t")
    if series.f_c is not None:
        cols.append("f_c")
    lines = metadata_lines(config, timestamp)
    lines.append(",".join(cols))
    for i, t in enumerate(series.times):
        row = [_fmt(t)]
        row += [_fmt(series.fbar[i, a, b]) for a in range(m) for b in range(m)]
        row.append(_fmt(series.f_t[i]))
        if series.f_c is not None:
            row.append(_fmt(series.f_c[i]))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def sweep_csv(result: SweepResult, config: dict, timestamp: bool = False) -> str:
    lines = metadata_lines({**config, "axis": result.axis}, timestamp)
    lines.append("axis_value,mean_f_t_max,std_f_t_max,n_realizations,seed")
    seed = "" if result.seed is None else str(result.seed)
    for v, mu, sd in zip(result.values, result.mean, result.std):
        lines.append(f"{_fmt(v)},{_fmt(mu)},{_fmt(sd)},{result.n_realizations},{seed}")
    return "\n".join(lines) + "\n"


def state_scan_csv(
    theta: np.ndarray, surface: np.ndarray, config: dict, timestamp: bool = False
) -> str:
    lines = metadata_lines(config, timestamp)
    lines.append("theta1,theta2,f_t")
    for i, t1 in enumerate(theta):
        for j, t2 in enumerate(theta):
            lines.append(f"{_fmt(t1)},{_fmt(t2)},{_fmt(surface[i, j])}")
    return "\n".join(lines) + "\n"


def ipr_csv(reports: list[IPRReport], config: dict, timestamp: bool = False) -> str:
    lines = metadata_lines(config, timestamp)
    lines.append("sector,k_index,eigenvalue,ipr,top_positions,top_weights")
    for rep in reports:
        for e in rep.entries:
            pos = ";".join(e.top_positions)
            w = ";".join(_fmt(x) for x in e.top_weights)
            lines.append(f"{rep.sector},{e.index},{_fmt(e.eigenvalue)},{_fmt(e.ipr)},{pos},{w}")
    return "\n".join(lines) + "\n"


def summary_json(subcommand: str, config: dict, results: dict, seed: int | None) -> str:
    doc = {
        "subcommand": subcommand,
        "config": config,
        "results": results,
        "seed": seed,
        "version": __version__,
    }
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")
