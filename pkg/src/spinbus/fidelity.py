"""Transfer fidelities across the shared chain.

The initial state is a product of M arbitrary sender qubits with everything
else in |0>. Expanding the senders over their 2^M basis patterns, every
quantity of interest is a bilinear combination of evolved pattern states,
so the receiver-side reduced operators

    K^beta_{ij}(t) = Tr_{all sites except receiver beta}( U |i,0,0><j,0,0| U^dag )

act as a transfer kernel: rho_{R_beta}(t) = sum_ij a_i a_j^* K^beta_{ij}(t).
Averaging the pointwise fidelity <psi_alpha| rho_{R_beta} |psi_alpha> over
independent Bloch-sphere inputs for all users collapses to a short sum of
kernel elements,

    Fbar_{ab}(t) = 1/2 + (1/(3*2^M)) * ( sum_{i: i_a=0} <0|K^b_{ii}|0>
                   - sum_{i: i_a=1} <0|K^b_{ii}|0>
                   + sum_{i' = i flipped at a} <i_a|K^b_{ii'}|i'_a> ),

which costs 2^M sector evolutions instead of a quadrature over input angles.
A Monte Carlo estimator over Haar-random inputs is kept as an independent
check of the averaging.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dynamics import (
    SpectralCache,
    _BlockPropagator,
    propagate_columns,
    spectral_decompose,
)
from .errors import ResourceLimitError, ValidationError
from .hamiltonian import (
    FULL_SPACE_MAX_SITES,
    SystemSpec,
    build_channel_hamiltonian,
    build_full_hamiltonian,
    build_sector_hamiltonian,
)
from .lattice import enumerate_sector


@dataclass(frozen=True)
class InputState:
    """Bloch angles (theta, phi) for each sender qubit."""

    angles: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for theta, phi in self.angles:
            if not 0.0 <= theta <= math.pi:
                raise ValidationError(f"theta {theta} outside [0, pi]")
            if not 0.0 <= phi < 2.0 * math.pi:
                raise ValidationError(f"phi {phi} outside [0, 2*pi)")

    @property
    def n_users(self) -> int:
        return len(self.angles)


def input_amplitudes(angles: np.ndarray) -> np.ndarray:
    """Sender-pattern amplitudes a_i for a batch of angle sets.

    ``angles`` has shape (n_batch, M, 2) carrying (theta, phi); the result has
    shape (2^M, n_batch), pattern index i encoding user alpha at bit alpha.
    """
    angles = np.asarray(angles, float)
    n_batch, m, _ = angles.shape
    c = np.cos(angles[:, :, 0] / 2.0)
    s = np.sin(angles[:, :, 0] / 2.0) * np.exp(1j * angles[:, :, 1])
    out = np.empty((1 << m, n_batch), dtype=complex)
    for i in range(1 << m):
        amp = np.ones(n_batch, dtype=complex)
        for alpha in range(m):
            amp = amp * (s[:, alpha] if (i >> alpha) & 1 else c[:, alpha])
        out[i] = amp
    return out


@dataclass(frozen=True)
class TransferKernel:
    """All kernel elements at one time.

    ``elements[beta, i, j]`` is the 2x2 receiver-beta operator generated by
    the sender dyad |i><j|; entry (a, b) is nonzero only when
    a - b = popcount(i) - popcount(j).
    """

    time: float
    n_users: int
    elements: np.ndarray  # (M, 2^M, 2^M, 2, 2) complex

    def receiver_state(self, input_state: InputState, beta: int) -> np.ndarray:
        """Reduced density matrix of receiver ``beta`` for a given input."""
        amps = input_amplitudes(np.asarray(input_state.angles)[None, :, :])[:, 0]
        return np.einsum("i,j,ijab->ab", amps, amps.conj(), self.elements[beta])


@dataclass
class FidelitySeries:
    """Averaged fidelity matrices over a time grid, plus the two aggregates."""

    times: np.ndarray  # (T,)
    fbar: np.ndarray  # (T, M, M)
    f_t: np.ndarray  # (T,)
    f_c: np.ndarray | None  # (T,), None for a single user

    @property
    def n_users(self) -> int:
        return self.fbar.shape[1]


def aggregate(fbar: np.ndarray) -> tuple[float, float | None]:
    """Mean matched-pair fidelity and mean crosstalk of one M x M matrix."""
    fbar = np.asarray(fbar, float)
    m = fbar.shape[0]
    f_t = float(np.trace(fbar) / m)
    if m == 1:
        return f_t, None
    f_c = float((fbar.sum() - np.trace(fbar)) / (m * (m - 1)))
    return f_t, f_c


def _aggregate_series(times: np.ndarray, fbar: np.ndarray) -> FidelitySeries:
    m = fbar.shape[1]
    diag = np.einsum("taa->t", fbar)
    f_t = diag / m
    f_c = (fbar.sum(axis=(1, 2)) - diag) / (m * (m - 1)) if m > 1 else None
    return FidelitySeries(times=times, fbar=fbar, f_t=f_t, f_c=f_c)


class TransferEngine:
    """Spectral caches plus receiver index maps for one system spec.

    Holds, for each sector k = 0..M: the sector basis, its eigensystem, and
    for every receiver the index partition by receiver-bit value together
    with the map into sector k+1 obtained by setting that bit.
    """

    def __init__(self, spec: SystemSpec):
        self.spec = spec
        self.m = spec.layout.n_users
        self.k_max = self.m
        self.bases = {}
        self.caches: dict[int, SpectralCache] = {}
        for k in range(self.k_max + 1):
            basis = enumerate_sector(spec.layout, k)
            self.bases[k] = basis
            self.caches[k] = spectral_decompose(build_sector_hamiltonian(spec, basis))
        # Sender patterns grouped by excitation count; the basis bitstring of
        # pattern i is the integer i itself (senders occupy the low bits).
        self.patterns_by_k = {
            k: [i for i in range(1 << self.m) if i.bit_count() == k] for k in range(self.k_max + 1)
        }
        self.col_of_pattern = {}
        self.init_index = {}
        for k, patterns in self.patterns_by_k.items():
            for col, i in enumerate(patterns):
                self.col_of_pattern[i] = col
            self.init_index[k] = np.array([self.bases[k].index_of(i) for i in patterns], dtype=int)
        self._receiver_maps = [self._build_receiver_maps(b) for b in range(self.m)]

    def _build_receiver_maps(self, beta: int):
        site = np.uint64(self.spec.layout.receiver_site(beta))
        low, high, lift = {}, {}, {}
        for k in range(self.k_max + 1):
            states = self.bases[k].states
            bit = (states >> site) & np.uint64(1)
            low[k] = np.nonzero(bit == 0)[0]
            high[k] = np.nonzero(bit == 1)[0]
            if k + 1 <= self.k_max:
                raised = states[low[k]] + np.uint64(1 << int(site))
                lift[k] = np.searchsorted(self.bases[k + 1].states, raised)
        return low, high, lift

    def pattern_states(self, times: np.ndarray) -> dict[int, np.ndarray]:
        """Evolved sender basis patterns: sector k -> array (dim_k, n_k, T)."""
        out = {}
        for k in range(self.k_max + 1):
            cols = np.zeros((self.caches[k].dim, len(self.patterns_by_k[k])), dtype=complex)
            cols[self.init_index[k], np.arange(cols.shape[1])] = 1.0
            out[k] = propagate_columns(self.caches[k], cols, times)
        return out

    def fbar_series(self, times: np.ndarray, chunk: int = 512) -> np.ndarray:
        """Averaged fidelity matrices on a time grid, shape (T, M, M)."""
        times = np.asarray(times, float)
        fbar = np.empty((times.size, self.m, self.m))
        for start in range(0, times.size, chunk):
            sl = slice(start, min(start + chunk, times.size))
            fbar[sl] = self._fbar_block(times[sl])
        return fbar

    def _fbar_block(self, times: np.ndarray) -> np.ndarray:
        amps = self.pattern_states(times)
        n_t = times.size
        fbar = np.empty((n_t, self.m, self.m))
        for beta in range(self.m):
            low, _, lift = self._receiver_maps[beta]
            kept = {}
            for i in range(1 << self.m):
                k = i.bit_count()
                a = amps[k][low[k], self.col_of_pattern[i], :]
                kept[i] = a
            diag0 = {i: np.einsum("xt,xt->t", kept[i], kept[i].conj()).real for i in kept}
            for alpha in range(self.m):
                total = np.zeros(n_t)
                cross = np.zeros(n_t, dtype=complex)
                for i in range(1 << self.m):
                    if (i >> alpha) & 1:
                        total -= diag0[i]
                        continue
                    total += diag0[i]
                    j = i | (1 << alpha)
                    k = i.bit_count()
                    partner = amps[k + 1][lift[k], self.col_of_pattern[j], :]
                    cross += np.einsum("xt,xt->t", kept[i], partner.conj())
                total += 2.0 * cross.real
                fbar[:, alpha, beta] = 0.5 + total / (3.0 * (1 << self.m))
        return fbar

    def kernel(self, t: float) -> TransferKernel:
        """All kernel elements at one time."""
        amps = self.pattern_states(np.array([t]))
        vecs = {
            i: amps[i.bit_count()][:, self.col_of_pattern[i], 0] for i in range(1 << self.m)
        }
        elements = np.zeros((self.m, 1 << self.m, 1 << self.m, 2, 2), dtype=complex)
        for beta in range(self.m):
            low, high, lift = self._receiver_maps[beta]
            for i in range(1 << self.m):
                ki = i.bit_count()
                for j in range(1 << self.m):
                    kj = j.bit_count()
                    if ki == kj:
                        elements[beta, i, j, 0, 0] = vecs[i][low[ki]] @ vecs[j][low[ki]].conj()
                        elements[beta, i, j, 1, 1] = vecs[i][high[ki]] @ vecs[j][high[ki]].conj()
                    elif kj == ki + 1:
                        elements[beta, i, j, 0, 1] = vecs[i][low[ki]] @ vecs[j][lift[ki]].conj()
                    elif kj == ki - 1:
                        elements[beta, i, j, 1, 0] = vecs[i][lift[kj]] @ vecs[j][low[kj]].conj()
        return TransferKernel(time=float(t), n_users=self.m, elements=elements)

    def pointwise_batch(self, angles: np.ndarray, t: float) -> np.ndarray:
        """Pointwise fidelity matrices for a batch of inputs: (n, M, M).

        Evolves the composed initial state (per excitation sector) and traces
        the pure state down to each receiver qubit.
        """
        amps = input_amplitudes(angles)  # (2^M, n)
        states = self.pattern_states(np.array([t]))
        combined = {}
        for k in range(self.k_max + 1):
            pattern_rows = amps[self.patterns_by_k[k], :]  # (n_k, n)
            combined[k] = states[k][:, :, 0] @ pattern_rows  # (dim_k, n)
        n = amps.shape[1]
        angles = np.asarray(angles, float)
        bra0 = np.cos(angles[:, :, 0] / 2.0)  # (n, M)
        bra1 = np.sin(angles[:, :, 0] / 2.0) * np.exp(1j * angles[:, :, 1])
        out = np.empty((n, self.m, self.m))
        for beta in range(self.m):
            low, high, lift = self._receiver_maps[beta]
            r00 = np.zeros(n)
            r11 = np.zeros(n)
            r01 = np.zeros(n, dtype=complex)
            for k in range(self.k_max + 1):
                w = combined[k]
                r00 += np.einsum("xn,xn->n", w[low[k]], w[low[k]].conj()).real
                r11 += np.einsum("xn,xn->n", w[high[k]], w[high[k]].conj()).real
                if k + 1 <= self.k_max:
                    r01 += np.einsum(
                        "xn,xn->n", w[low[k]], combined[k + 1][lift[k]].conj()
                    )
            for alpha in range(self.m):
                c0, c1 = bra0[:, alpha], bra1[:, alpha]
                out[:, alpha, beta] = (
                    np.abs(c0) ** 2 * r00
                    + np.abs(c1) ** 2 * r11
                    + 2.0 * (np.conj(c0) * c1 * r01).real
                )
        return out


@lru_cache(maxsize=32)
def _engine(spec: SystemSpec) -> TransferEngine:
    return TransferEngine(spec)


def transfer_kernel(spec: SystemSpec, t: float) -> TransferKernel:
    """Receiver-side reduced operators for every sender dyad at time t."""
    return _engine(spec).kernel(t)


def pointwise_fidelity(spec: SystemSpec, input_state: InputState, t: float) -> np.ndarray:
    """Fidelity matrix F_{alpha beta}(t) for one specific input."""
    if input_state.n_users != spec.layout.n_users:
        raise ValidationError("input state has wrong number of users")
    return _engine(spec).pointwise_batch(np.asarray(input_state.angles)[None], t)[0]


def average_fidelity(spec: SystemSpec, t: float) -> np.ndarray:
    """Bloch-sphere-averaged fidelity matrix at one time."""
    return _engine(spec).fbar_series(np.array([float(t)]))[0]


def average_fidelity_series(spec: SystemSpec, times: np.ndarray) -> FidelitySeries:
    """Averaged fidelities over a time grid, with aggregates."""
    times = np.asarray(times, float)
    fbar = _engine(spec).fbar_series(times)
    return _aggregate_series(times, fbar)


def average_fidelity_two_user_closed_form(spec: SystemSpec, t: float) -> np.ndarray:
    """Two-user averaged fidelity written out element by element.

    Independent assembly path used to cross-check the general formula; the
    pattern index encodes user 1 at bit 0.
    """
    if spec.layout.n_users != 2:
        raise ValidationError("closed form applies to exactly two users")
    k = transfer_kernel(spec, t).elements
    fbar = np.empty((2, 2))
    for beta in range(2):
        g = k[beta]
        fbar[0, beta] = 0.5 + (
            g[0, 0, 0, 0] + g[2, 2, 0, 0] - g[1, 1, 0, 0] - g[3, 3, 0, 0]
            + g[0, 1, 0, 1] + g[2, 3, 0, 1] + g[1, 0, 1, 0] + g[3, 2, 1, 0]
        ).real / 12.0
        fbar[1, beta] = 0.5 + (
            g[0, 0, 0, 0] + g[1, 1, 0, 0] - g[2, 2, 0, 0] - g[3, 3, 0, 0]
            + g[0, 2, 0, 1] + g[1, 3, 0, 1] + g[2, 0, 1, 0] + g[3, 1, 1, 0]
        ).real / 12.0
    return fbar


def haar_mc_average(
    spec: SystemSpec, t: float, n_samples: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo estimate of the averaged fidelity matrix.

    Samples theta = arccos(1 - 2u), phi = 2 pi v with u, v uniform, averages
    the pointwise fidelity, and returns (mean, standard error), each M x M.
    """
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    m = spec.layout.n_users
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    u = rng.random((n_samples, m))
    v = rng.random((n_samples, m))
    angles = np.stack([np.arccos(1.0 - 2.0 * u), 2.0 * np.pi * v], axis=-1)
    f = _engine(spec).pointwise_batch(angles, t)
    mean = f.mean(axis=0)
    if n_samples > 1:
        stderr = f.std(axis=0, ddof=1) / math.sqrt(n_samples)
    else:
        stderr = np.zeros_like(mean)
    return mean, stderr


@dataclass(frozen=True)
class ThermalSpec:
    """Dimensionless channel temperature K_B T / J."""

    kbt: float

    def __post_init__(self):
        if self.kbt < 0:
            raise ValidationError("kbt must be >= 0")


class ThermalFidelityTable:
    """Averaged fidelities per channel eigenstate, mixed over temperature later.

    The channel starts in a Boltzmann mixture of its own eigenstates; by
    linearity the thermal averaged fidelity is the weighted sum of the
    fidelities obtained with each channel eigenstate in place of the empty
    channel. Everything temperature-independent (the expensive part) is
    computed once here on the full Hilbert space.
    """

    def __init__(self, spec: SystemSpec, times: np.ndarray):
        lay = spec.layout
        total = lay.total_sites
        if total > FULL_SPACE_MAX_SITES:
            raise ResourceLimitError(
                f"thermal path needs the full space; {total} sites exceeds {FULL_SPACE_MAX_SITES}"
            )
        self.spec = spec
        self.times = np.asarray(times, float)
        m = lay.n_users
        n = lay.n_chain
        h_ch = build_channel_hamiltonian(n, spec.j_chain, spec.b_edge)
        self.channel_energies, ch_vecs = np.linalg.eigh(h_ch)
        h_full = build_full_hamiltonian(spec)
        evals, evecs = np.linalg.eigh(h_full)

        n_ch = 1 << n
        n_pat = 1 << m
        dim = 1 << total
        w0 = np.zeros((dim, n_ch * n_pat), dtype=complex)
        ch_indices = np.arange(n_ch, dtype=np.int64) << m
        for mm in range(n_ch):
            for i in range(n_pat):
                w0[ch_indices + i, mm * n_pat + i] = ch_vecs[:, mm]
        w = evecs.conj().T @ w0

        receiver_sites = [lay.receiver_site(b) for b in range(m)]
        self.fbar_by_channel = np.empty((n_ch, self.times.size, m, m))
        patterns = np.arange(n_pat)
        bit = [(patterns >> a) & 1 for a in range(m)]
        for it, t in enumerate(self.times):
            a_t = evecs @ (np.exp(-1j * evals * t)[:, None] * w)
            cols = a_t.reshape(dim, n_ch, n_pat)
            for beta in range(m):
                p = receiver_sites[beta]
                blocks = cols.reshape(1 << (total - 1 - p), 2, 1 << p, n_ch, n_pat)
                # g[m, i, j, a, b] = <a| K^beta_{ij} |b> for channel eigenstate m
                g = np.einsum("halmi,hblmj->mijab", blocks, blocks.conj())
                diag = np.einsum("mii->mi", g[:, :, :, 0, 0]).real
                for alpha in range(m):
                    flipped = patterns ^ (1 << alpha)
                    sign = 1.0 - 2.0 * bit[alpha]
                    term = (sign[None, :] * diag).sum(axis=1)
                    zeros = patterns[bit[alpha] == 0]
                    cross = g[:, zeros, flipped[zeros], 0, 1].sum(axis=1)
                    total_term = term + 2.0 * cross.real
                    self.fbar_by_channel[:, it, alpha, beta] = 0.5 + total_term / (3.0 * n_pat)

    def weights(self, kbt: float) -> np.ndarray:
        """Boltzmann weights of the channel eigenstates at temperature kbt."""
        e = self.channel_energies
        if kbt == 0.0:
            ground = np.abs(e - e.min()) <= 1e-12 * max(1.0, abs(e.min()))
            return ground.astype(float) / ground.sum()
        if math.isinf(kbt):
            return np.full(e.size, 1.0 / e.size)
        logw = -(e - e.min()) / kbt
        w = np.exp(logw)
        return w / w.sum()

    def mix(self, kbt: float) -> np.ndarray:
        """Thermal averaged fidelity series, shape (T, M, M)."""
        w = self.weights(kbt)
        return np.einsum("m,mtab->tab", w, self.fbar_by_channel)


@lru_cache(maxsize=8)
def _thermal_table(spec: SystemSpec, times: tuple[float, ...]) -> ThermalFidelityTable:
    return ThermalFidelityTable(spec, np.array(times))


def thermal_average_fidelity(spec: SystemSpec, thermal: ThermalSpec, t: float) -> np.ndarray:
    """Averaged fidelity matrix with the channel initially thermal."""
    table = _thermal_table(spec, (float(t),))
    return table.mix(thermal.kbt)[0]


def initial_density(spec: SystemSpec, input_state: InputState) -> "DensityBlockState":
    """Pure initial density matrix on the direct sum of reachable sectors."""
    from .dynamics import direct_sum_density

    if input_state.n_users != spec.layout.n_users:
        raise ValidationError("input state has wrong number of users")
    engine = _engine(spec)
    amps = input_amplitudes(np.asarray(input_state.angles)[None])[:, 0]
    comps = {}
    for k in range(engine.k_max + 1):
        vec = np.zeros(engine.caches[k].dim, dtype=complex)
        for col, i in enumerate(engine.patterns_by_k[k]):
            vec[engine.init_index[k][col]] = amps[i]
        comps[k] = vec
    return direct_sum_density(spec.layout, comps)


def receiver_qubit_state(spec: SystemSpec, state, beta: int) -> np.ndarray:
    """Reduced 2x2 density matrix of receiver ``beta`` from a block state."""
    engine = _engine(spec)
    if tuple(state.sectors) != tuple(range(engine.k_max + 1)):
        raise ValidationError("block state must cover sectors 0..M")
    low, high, lift = engine._receiver_maps[beta]
    slices = state.block_slices()
    rho = np.zeros((2, 2), dtype=complex)
    for k in state.sectors:
        blk = state.rho[slices[k], slices[k]]
        rho[0, 0] += blk[low[k], low[k]].sum()
        rho[1, 1] += blk[high[k], high[k]].sum()
        if k + 1 in state.sectors:
            cross = state.rho[slices[k], slices[k + 1]]
            rho[0, 1] += cross[low[k], lift[k]].sum()
    rho[1, 0] = np.conj(rho[0, 1])
    return rho


def pointwise_fidelity_dephasing(
    spec: SystemSpec,
    input_state: InputState,
    gamma: float,
    times: np.ndarray,
    method: str = "splitstep",
    step: float | None = None,
) -> np.ndarray:
    """Fidelity matrices under dephasing for one input, shape (T, M, M).

    Evolves the input's full density matrix with the master equation and
    traces to each receiver at the sample times.
    """
    from .dynamics import lindblad_evolve

    rho0 = initial_density(spec, input_state)
    states = lindblad_evolve(spec, gamma, rho0, np.asarray(times, float), method=method, step=step)
    m = spec.layout.n_users
    angles = np.asarray(input_state.angles, float)
    bras = [
        np.array([np.cos(th / 2.0), np.exp(1j * ph) * np.sin(th / 2.0)])
        for th, ph in angles
    ]
    out = np.empty((len(states), m, m))
    for it, st in enumerate(states):
        for beta in range(m):
            rho = receiver_qubit_state(spec, st, beta)
            for alpha in range(m):
                out[it, alpha, beta] = (bras[alpha].conj() @ rho @ bras[alpha]).real
    return out


def dephasing_fbar_series(
    spec: SystemSpec,
    gamma: float,
    times: np.ndarray,
    method: str = "splitstep",
    step: float | None = None,
) -> np.ndarray:
    """Averaged fidelity series under uniform dephasing, shape (T, M, M).

    Evolves the sender dyads needed by the averaging formula as density-matrix
    blocks under the dephasing master equation and assembles the same kernel
    sums as the unitary path.
    """
    times = np.asarray(times, float)
    if times.size == 0 or np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValidationError("times must be ascending and nonnegative")
    engine = _engine(spec)
    m = engine.m
    prop = _BlockPropagator(spec, tuple(range(m + 1)), gamma)

    # Dyads |i><i| for every pattern and |i><i or alpha> for every flip pair,
    # grouped by sector pair so equal-shaped blocks integrate in one batch.
    groups: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for i in range(1 << m):
        groups.setdefault((i.bit_count(), i.bit_count()), []).append((i, i))
        for alpha in range(m):
            if not (i >> alpha) & 1:
                j = i | (1 << alpha)
                groups.setdefault((i.bit_count(), j.bit_count()), []).append((i, j))
    stacks = {}
    for (kr, kc), pairs in groups.items():
        dr, dc = engine.caches[kr].dim, engine.caches[kc].dim
        x0 = np.zeros((len(pairs), dr, dc), dtype=complex)
        for idx, (i, j) in enumerate(pairs):
            x0[idx, engine.bases[kr].index_of(i), engine.bases[kc].index_of(j)] = 1.0
        stacks[(kr, kc)] = x0

    fbar = np.empty((times.size, m, m))
    t_prev = 0.0
    for it, t in enumerate(times):
        for key, x in stacks.items():
            stacks[key] = prop.advance(key[0], key[1], x, (t_prev, t), method, step)
        t_prev = t
        elem00 = {}
        elem01 = {}
        for (kr, kc), pairs in groups.items():
            x = stacks[(kr, kc)]
            for idx, (i, j) in enumerate(pairs):
                for beta in range(m):
                    low, _, lift = engine._receiver_maps[beta]
                    if kr == kc:
                        elem00[(beta, i, j)] = float(x[idx][low[kr], low[kr]].sum().real)
                    else:
                        elem01[(beta, i, j)] = complex(x[idx][low[kr], lift[kr]].sum())
        for beta in range(m):
            for alpha in range(m):
                total = 0.0
                for i in range(1 << m):
                    if (i >> alpha) & 1:
                        total -= elem00[(beta, i, i)]
                    else:
                        total += elem00[(beta, i, i)]
                        total += 2.0 * elem01[(beta, i, i | (1 << alpha))].real
                fbar[it, alpha, beta] = 0.5 + total / (3.0 * (1 << m))
    return fbar
