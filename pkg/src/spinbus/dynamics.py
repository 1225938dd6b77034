"""Time evolution: exact spectral propagation and dephasing master equation.

Unitary dynamics is computed by eigendecomposition once per sector and then
reused for every queried time, which dominates when scanning hundreds of
readout times. Dephasing dynamics integrates

    d rho / dt = -i [H, rho] + gamma * sum_i (sz_i rho sz_i - rho)

on the direct sum of excitation sectors. Because H conserves excitation
number and sz_i is diagonal in the occupation basis, each (k_row, k_col)
sector block of rho evolves independently, with the dissipator multiplying
entry (a, b) by gamma * (sum_i z_i(a) z_i(b) - L) = -2 gamma hamming(a, b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .hamiltonian import SectorHamiltonian, SystemSpec, build_sector_hamiltonian
from .lattice import SectorBasis, enumerate_sector, popcount_matrix


@dataclass(frozen=True)
class SpectralCache:
    """Eigenvalues (ascending) and eigenvectors of one sector Hamiltonian."""

    basis: SectorBasis
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns are eigenstates

    @property
    def dim(self) -> int:
        return self.eigenvalues.size


def spectral_decompose(ham: SectorHamiltonian) -> SpectralCache:
    m = ham.matrix
    if not np.allclose(m, m.conj().T, atol=1e-12):
        raise ValidationError("sector Hamiltonian is not Hermitian")
    try:
        evals, evecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigensolver failed on k={ham.basis.excitations} sector (dim {ham.dim})"
        ) from exc
    return SpectralCache(basis=ham.basis, eigenvalues=evals, eigenvectors=evecs)


def evolve_state(cache: SpectralCache, psi0: np.ndarray, t: float) -> np.ndarray:
    """exp(-iHt) applied to a normalized sector vector."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (cache.dim,):
        raise ValidationError(f"state has shape {psi0.shape}, sector dim is {cache.dim}")
    norm = np.linalg.norm(psi0)
    if abs(norm - 1.0) > 1e-10:
        raise ValidationError(f"initial state norm {norm} is not 1")
    v = cache.eigenvectors
    return v @ (np.exp(-1j * cache.eigenvalues * t) * (v.conj().T @ psi0))


def propagate_columns(cache: SpectralCache, psi0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Evolve several sector vectors over many times: result[d, n, t].

    ``psi0`` has shape (dim, n). No normalization requirement; this is the
    batched workhorse behind fidelity scans.
    """
    v = cache.eigenvectors
    w = v.conj().T @ np.asarray(psi0, dtype=complex)
    phases = np.exp(-1j * np.multiply.outer(cache.eigenvalues, np.asarray(times, float)))
    out = np.empty((cache.dim, w.shape[1], phases.shape[1]), dtype=complex)
    for n in range(w.shape[1]):
        out[:, n, :] = v @ (w[:, n, None] * phases)
    return out


@dataclass
class DensityBlockState:
    """Dense density matrix over the direct sum of the listed sectors."""

    layout: "object"
    sectors: tuple[int, ...]
    rho: np.ndarray
    time: float

    def block_slices(self) -> list[slice]:
        bases = [enumerate_sector(self.layout, k) for k in self.sectors]
        offsets = np.concatenate([[0], np.cumsum([b.dim for b in bases])])
        return [slice(int(offsets[i]), int(offsets[i + 1])) for i in range(len(self.sectors))]


def direct_sum_density(layout, sector_components: dict[int, np.ndarray], time: float = 0.0) -> DensityBlockState:
    """Pure-state density matrix from per-sector amplitude vectors."""
    sectors = tuple(sorted(sector_components))
    bases = [enumerate_sector(layout, k) for k in sectors]
    vec = np.concatenate([np.asarray(sector_components[k], complex) for k in sectors])
    expected = sum(b.dim for b in bases)
    if vec.size != expected:
        raise ValidationError(f"components total {vec.size}, direct sum needs {expected}")
    return DensityBlockState(layout=layout, sectors=sectors, rho=np.outer(vec, vec.conj()), time=time)


def default_rk4_step(h_max_entry: float) -> float:
    return min(0.01, 0.1 / max(1.0, h_max_entry))


DEFAULT_SPLITSTEP_STEP = 0.01


class _BlockPropagator:
    """Per-sector spectral propagators plus dephasing decay masks."""

    def __init__(self, spec: SystemSpec, sectors: tuple[int, ...], gamma: float):
        self.gamma = gamma
        self.hams = {}
        self.caches = {}
        for k in sectors:
            ham = build_sector_hamiltonian(spec, enumerate_sector(spec.layout, k))
            self.hams[k] = ham.matrix
            self.caches[k] = spectral_decompose(ham)
        self.max_entry = max(float(np.max(np.abs(h))) for h in self.hams.values())
        self._unitaries: dict[tuple[int, float], np.ndarray] = {}
        self._decays: dict[tuple[int, int], np.ndarray] = {}

    def decay_rate(self, kr: int, kc: int) -> np.ndarray:
        """Entrywise coherence decay rate (positive) divided by gamma."""
        key = (kr, kc)
        if key not in self._decays:
            d = popcount_matrix(self.caches[kr].basis.states, self.caches[kc].basis.states)
            self._decays[key] = 2.0 * d.astype(float)
        return self._decays[key]

    def unitary(self, k: int, h: float) -> np.ndarray:
        key = (k, h)
        if key not in self._unitaries:
            c = self.caches[k]
            v = c.eigenvectors
            self._unitaries[key] = (v * np.exp(-1j * c.eigenvalues * h)) @ v.conj().T
        return self._unitaries[key]

    def rk4_block(self, kr, kc, x, t_span, step):
        hr, hc = self.hams[kr], self.hams[kc]
        rate = self.gamma * self.decay_rate(kr, kc)
        n_steps = max(1, math.ceil((t_span[1] - t_span[0]) / step))
        h = (t_span[1] - t_span[0]) / n_steps

        def rhs(y):
            return -1j * (hr @ y - y @ hc) - rate * y

        for _ in range(n_steps):
            k1 = rhs(x)
            k2 = rhs(x + 0.5 * h * k1)
            k3 = rhs(x + 0.5 * h * k2)
            k4 = rhs(x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return x

    def splitstep_block(self, kr, kc, x, t_span, step):
        """Strang splitting: exact unitary sandwich, exact dephasing factor."""
        n_steps = max(1, math.ceil((t_span[1] - t_span[0]) / step))
        h = (t_span[1] - t_span[0]) / n_steps
        ur = self.unitary(kr, h)
        uc_dag = self.unitary(kc, h).conj().T
        half = np.exp(-0.5 * h * self.gamma * self.decay_rate(kr, kc))
        for _ in range(n_steps):
            x = half * (ur @ (half * x) @ uc_dag)
        return x

    def advance(self, kr, kc, x, t_span, method, step):
        if t_span[1] == t_span[0]:
            return x
        if method == "rk4":
            return self.rk4_block(kr, kc, x, t_span, step or default_rk4_step(self.max_entry))
        if method == "splitstep":
            return self.splitstep_block(kr, kc, x, t_span, step or DEFAULT_SPLITSTEP_STEP)
        raise ValidationError(f"unknown integrator {method!r}")


def lindblad_evolve(
    spec: SystemSpec,
    gamma: float,
    rho0: DensityBlockState,
    t_grid: np.ndarray,
    method: str = "rk4",
    step: float | None = None,
) -> list[DensityBlockState]:
    """Integrate the dephasing master equation, sampling at ``t_grid``.

    ``method`` is "rk4" (fixed-step, default step min(0.01, 0.1/max|H|)) or
    "splitstep" (Strang splitting with exact sector propagators, default
    step 0.01). Raises NumericalError if the trace drifts by more than 1e-6.
    """
    if gamma < 0:
        raise ValidationError("gamma must be >= 0")
    t_grid = np.asarray(t_grid, float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(np.diff(t_grid) < 0) or t_grid[0] < 0:
        raise ValidationError("t_grid must be ascending and start at a time >= 0")
    prop = _BlockPropagator(spec, rho0.sectors, gamma)
    slices = rho0.block_slices()
    trace0 = float(np.trace(rho0.rho).real)

    blocks = {}
    for i, ki in enumerate(rho0.sectors):
        for j, kj in enumerate(rho0.sectors):
            if i <= j:
                blocks[(i, j)] = rho0.rho[slices[i], slices[j]].copy()

    out: list[DensityBlockState] = []
    t_prev = rho0.time
    for t in t_grid:
        if t < t_prev:
            raise ValidationError("t_grid precedes the initial state time")
        for (i, j), x in blocks.items():
            blocks[(i, j)] = prop.advance(
                rho0.sectors[i], rho0.sectors[j], x, (t_prev, t), method, step
            )
        t_prev = t
        rho = np.zeros_like(rho0.rho)
        for (i, j), x in blocks.items():
            rho[slices[i], slices[j]] = x
            if i != j:
                rho[slices[j], slices[i]] = x.conj().T
        drift = abs(float(np.trace(rho).real) - trace0)
        if drift > 1e-6:
            raise NumericalError(
                f"trace drifted by {drift:.2e} at t={t}; reduce the integration step"
            )
        out.append(DensityBlockState(layout=rho0.layout, sectors=rho0.sectors, rho=rho, time=float(t)))
    return out
