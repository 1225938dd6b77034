"""Sweep drivers: thermal channel, disorder ensembles, dephasing, input-state scans."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .fidelity import (
    ThermalFidelityTable,
    _engine,
    dephasing_fbar_series,
)
from .hamiltonian import DisorderSpec, SystemSpec, apply_disorder
from .optimizer import _window_grid, scan_time

DISORDER_AXES = ("delta", "delta0", "eta", "eta0")


@dataclass
class SweepResult:
    """Mean (and spread, for ensembles) of the peak fidelity along one axis."""

    axis: str
    values: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    n_realizations: int
    seed: int | None
    metadata: dict

    def __post_init__(self):
        if not (len(self.values) == len(self.mean) == len(self.std)):
            raise ValidationError("sweep arrays must have one record per axis value")


def _disorder_job(args):
    key, spec, disorder, realization, window, coarse_dt, refine_dt = args
    disordered = apply_disorder(spec, disorder, realization)
    _, _, f_t_max = scan_time(disordered, window, coarse_dt, refine_dt)
    return key, f_t_max


def disorder_ensemble(
    base_params: SystemSpec,
    tau_window: tuple[float, float],
    disorder: DisorderSpec,
    axis: str,
    axis_values,
    coarse_dt: float = 1.0,
    refine_dt: float = 0.05,
    workers: int = 1,
) -> SweepResult:
    """Ensemble-averaged peak fidelity along one disorder-strength axis.

    The Hamiltonian parameters stay at their clean values; only the readout
    time is re-optimized per realization. Non-swept spreads keep whatever
    value ``disorder`` carries, so combined-axis studies just set them there.
    """
    if axis not in DISORDER_AXES:
        raise ValidationError(f"axis must be one of {DISORDER_AXES}")
    axis_values = np.asarray(axis_values, float)
    jobs = []
    for iv, v in enumerate(axis_values):
        dis = replace(disorder, **{axis: float(v)})
        for r in range(disorder.n_realizations):
            jobs.append(((iv, r), base_params, dis, r, tau_window, coarse_dt, refine_dt))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_disorder_job, jobs, chunksize=4))
    else:
        results = dict(_disorder_job(j) for j in jobs)
    maxima = np.empty((axis_values.size, disorder.n_realizations))
    for (iv, r), f in results.items():
        maxima[iv, r] = f
    return SweepResult(
        axis=axis,
        values=axis_values,
        mean=maxima.mean(axis=1),
        std=maxima.std(axis=1),
        n_realizations=disorder.n_realizations,
        seed=disorder.master_seed,
        metadata={
            "kind": "disorder",
            "window": list(tau_window),
            "spreads": {a: getattr(disorder, a) for a in DISORDER_AXES},
        },
    )


def dephasing_sweep(
    params: SystemSpec,
    tau_window: tuple[float, float],
    gamma_values,
    sample_dt: float = 1.0,
    method: str = "splitstep",
    step: float | None = None,
) -> SweepResult:
    """Peak fidelity under dephasing for each rate in ``gamma_values``."""
    gamma_values = np.asarray(gamma_values, float)
    if np.any(gamma_values < 0):
        raise ValidationError("dephasing rates must be >= 0")
    times = _window_grid(tau_window[0], tau_window[1], sample_dt)
    m = params.layout.n_users
    means = np.empty(gamma_values.size)
    for i, g in enumerate(gamma_values):
        fbar = dephasing_fbar_series(params, float(g), times, method=method, step=step)
        means[i] = (np.einsum("taa->t", fbar) / m).max()
    return SweepResult(
        axis="gamma",
        values=gamma_values,
        mean=means,
        std=np.zeros_like(means),
        n_realizations=1,
        seed=None,
        metadata={"kind": "dephasing", "window": list(tau_window), "method": method},
    )


def thermal_sweep(
    params: SystemSpec,
    tau_window: tuple[float, float],
    kbt_values,
    sample_dt: float = 1.0,
) -> SweepResult:
    """Peak fidelity with a thermal channel for each temperature.

    The per-channel-eigenstate fidelity table is built once; each temperature
    only reweights it.
    """
    kbt_values = np.asarray(kbt_values, float)
    if np.any(kbt_values < 0):
        raise ValidationError("temperatures must be >= 0")
    times = _window_grid(tau_window[0], tau_window[1], sample_dt)
    table = ThermalFidelityTable(params, times)
    m = params.layout.n_users
    means = np.empty(kbt_values.size)
    for i, kbt in enumerate(kbt_values):
        fbar = table.mix(float(kbt))
        means[i] = (np.einsum("taa->t", fbar) / m).max()
    return SweepResult(
        axis="kbt",
        values=kbt_values,
        mean=means,
        std=np.zeros_like(means),
        n_realizations=1,
        seed=None,
        metadata={"kind": "thermal", "window": list(tau_window)},
    )


def state_scan(
    params: SystemSpec,
    tau: float,
    theta_values=None,
    phi_seed: int = 0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise mean matched-pair fidelity over polar input angles.

    For two users, returns (theta grid, F_T surface over theta1 x theta2,
    drawn azimuthal angles). The azimuthal angles are drawn once from the
    seeded stream and held fixed across the grid.
    """
    m = params.layout.n_users
    if m != 2:
        raise ValidationError("the 2-D input-state scan needs exactly two users")
    if theta_values is None:
        theta_values = np.linspace(0.0, np.pi, 41)
    theta_values = np.asarray(theta_values, float)
    rng = np.random.default_rng(np.random.SeedSequence(phi_seed))
    phis = rng.uniform(0.0, 2.0 * np.pi, m)
    t1, t2 = np.meshgrid(theta_values, theta_values, indexing="ij")
    angles = np.empty((theta_values.size ** 2, m, 2))
    angles[:, 0, 0] = t1.ravel()
    angles[:, 1, 0] = t2.ravel()
    angles[:, 0, 1] = phis[0]
    angles[:, 1, 1] = phis[1]
    f = _engine(params).pointwise_batch(angles, tau)
    f_t = np.einsum("naa->n", f) / m
    return theta_values, f_t.reshape(theta_values.size, theta_values.size), phis
