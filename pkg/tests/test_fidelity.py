import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from spinbus.errors import ResourceLimitError, ValidationError
from spinbus.fidelity import (
    InputState,
    ThermalFidelityTable,
    ThermalSpec,
    aggregate,
    average_fidelity,
    average_fidelity_series,
    average_fidelity_two_user_closed_form,
    dephasing_fbar_series,
    haar_mc_average,
    input_amplitudes,
    pointwise_fidelity,
    thermal_average_fidelity,
    transfer_kernel,
)
from spinbus.hamiltonian import SystemSpec
from spinbus.lattice import make_layout


def spec_for(n=4, m=2, j_user=0.3, b_user=None, b_edge=0.0, **kw):
    lay = make_layout(n, m)
    if b_user is None:
        b_user = tuple(0.1 * (a + 1) * (-1) ** a for a in range(m))
    return SystemSpec(layout=lay, j_user=j_user, b_user=tuple(b_user), b_edge=b_edge, **kw)


def random_angles(rng, m):
    return tuple((rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)) for _ in range(m))


# ---------------------------------------------------------------------------
# input model


def test_input_state_validation():
    InputState(angles=((0.0, 0.0), (np.pi, 6.28)))
    with pytest.raises(ValidationError):
        InputState(angles=((4.0, 0.0),))
    with pytest.raises(ValidationError):
        InputState(angles=((1.0, -0.5),))


def test_input_amplitudes_normalized():
    rng = np.random.default_rng(2)
    angles = np.stack(
        [np.array(random_angles(rng, 3)) for _ in range(5)], axis=0
    )
    amps = input_amplitudes(angles)
    assert np.allclose(np.sum(np.abs(amps) ** 2, axis=0), 1.0)


# ---------------------------------------------------------------------------
# pointwise fidelity


def test_all_zero_input_is_fixed_point():
    spec = spec_for(n=5, m=2, b_edge=0.6)
    inp = InputState(angles=((0.0, 0.0), (0.0, 0.0)))
    for t in [0.0, 3.7, 41.0]:
        f = pointwise_fidelity(spec, inp, t)
        assert np.max(np.abs(f - 1.0)) < 1e-10


def test_flipped_input_starts_at_zero():
    spec = spec_for(n=4, m=2)
    inp = InputState(angles=((np.pi, 0.0), (np.pi, 1.0)))
    f = pointwise_fidelity(spec, inp, 0.0)
    assert abs(f[0, 0]) < 1e-12 and abs(f[1, 1]) < 1e-12


def test_pointwise_matches_full_space_oracle():
    rng = np.random.default_rng(7)
    spec = spec_for(n=4, m=2, j_user=0.35, b_user=(0.27, -0.13), b_edge=0.8)
    for _ in range(4):
        angles = random_angles(rng, 2)
        t = rng.uniform(0.5, 30)
        ref = oracles.pointwise_fidelity_full(spec, angles, t)
        got = pointwise_fidelity(spec, InputState(angles=angles), t)
        assert np.max(np.abs(ref - got)) < 1e-10


def test_pointwise_bounded():
    rng = np.random.default_rng(3)
    spec = spec_for(n=6, m=2, j_user=0.8, b_edge=2.0)
    angles = np.stack([np.array(random_angles(rng, 2)) for _ in range(64)])
    from spinbus.fidelity import _engine

    f = _engine(spec).pointwise_batch(angles, 17.3)
    assert np.all(f >= -1e-12) and np.all(f <= 1 + 1e-12)


# ---------------------------------------------------------------------------
# transfer kernel


def test_kernel_at_t0_is_ground_projector():
    spec = spec_for(n=4, m=2)
    kern = transfer_kernel(spec, 0.0)
    for beta in range(2):
        for i in range(4):
            assert np.allclose(kern.elements[beta, i, i], [[1, 0], [0, 0]], atol=1e-12)


def test_kernel_conjugate_pairing_and_diagonal_validity():
    spec = spec_for(n=5, m=2, j_user=0.45, b_user=(0.3, -0.22), b_edge=1.1)
    kern = transfer_kernel(spec, 9.4)
    e = kern.elements
    for beta in range(2):
        for i in range(4):
            for j in range(4):
                assert np.allclose(e[beta, i, j], e[beta, j, i].conj().T, atol=1e-12)
            g = e[beta, i, i]
            assert abs(np.trace(g).real - 1.0) < 1e-9
            assert np.linalg.eigvalsh(g).min() > -1e-9


def test_kernel_matches_full_space_oracle():
    spec = spec_for(n=4, m=2, j_user=0.52, b_user=(0.18, -0.33), b_edge=0.4)
    t = 6.1
    kern = transfer_kernel(spec, t)
    for beta in range(2):
        for i in range(4):
            for j in range(4):
                ref = oracles.kernel_element_full(spec, i, j, beta, t)
                assert np.max(np.abs(kern.elements[beta, i, j] - ref)) < 1e-10


def test_kernel_reconstructs_receiver_state():
    rng = np.random.default_rng(12)
    spec = spec_for(n=4, m=2, j_user=0.6)
    angles = random_angles(rng, 2)
    t = 11.0
    kern = transfer_kernel(spec, t)
    state = InputState(angles=angles)
    for beta in range(2):
        rho = kern.receiver_state(state, beta)
        assert abs(np.trace(rho).real - 1.0) < 1e-10
        bra = np.array(
            [np.cos(angles[beta][0] / 2), np.exp(1j * angles[beta][1]) * np.sin(angles[beta][0] / 2)]
        )
        f = (bra.conj() @ rho @ bra).real
        assert f == pytest.approx(
            pointwise_fidelity(spec, state, t)[beta, beta], abs=1e-10
        )


# ---------------------------------------------------------------------------
# averaged fidelity


def test_average_at_t0_is_half():
    spec = spec_for(n=6, m=2, b_edge=3.0)
    assert np.max(np.abs(average_fidelity(spec, 0.0) - 0.5)) < 1e-10


def test_decoupled_users_stay_at_half():
    spec = spec_for(n=5, m=2, j_user=0.0)
    series = average_fidelity_series(spec, np.array([1.0, 17.0, 230.0]))
    assert np.max(np.abs(series.fbar - 0.5)) < 1e-10


def test_average_matches_exact_quadrature():
    # the pointwise fidelity is polynomial in cos(theta) (degree <= 2) and a
    # low-order harmonic in phi, so Gauss-Legendre x rectangle quadrature of
    # the Bloch-sphere average is exact
    spec = spec_for(n=4, m=1, j_user=0.5, b_user=(0.2,))
    t = 8.0
    nodes, gl_weights = np.polynomial.legendre.leggauss(4)
    phis = np.arange(8) * 2 * np.pi / 8
    acc = 0.0
    for u, w in zip(nodes, gl_weights):
        th = np.arccos(u)
        for ph in phis:
            acc += w * pointwise_fidelity(spec, InputState(angles=((th, ph),)), t)[0, 0]
    acc /= 2.0 * phis.size  # normalize du/2 and the phi average
    assert acc == pytest.approx(average_fidelity(spec, t)[0, 0], abs=1e-12)


def test_two_user_closed_form_agrees():
    rng = np.random.default_rng(21)
    for _ in range(3):
        spec = spec_for(
            n=4,
            m=2,
            j_user=rng.uniform(0.1, 1.0),
            b_user=tuple(rng.uniform(-0.5, 0.5, 2)),
            b_edge=rng.uniform(0, 3),
        )
        t = rng.uniform(1, 40)
        a = average_fidelity(spec, t)
        b = average_fidelity_two_user_closed_form(spec, t)
        assert np.max(np.abs(a - b)) < 1e-12


def test_symmetric_users_give_symmetric_fidelities():
    spec = spec_for(n=6, m=2, j_user=0.3, b_user=(0.25, 0.25))
    series = average_fidelity_series(spec, np.array([3.0, 21.0, 77.0]))
    assert np.max(np.abs(series.fbar[:, 0, 0] - series.fbar[:, 1, 1])) < 1e-10
    assert np.max(np.abs(series.fbar[:, 0, 1] - series.fbar[:, 1, 0])) < 1e-10


def test_average_fidelity_bounds():
    spec = spec_for(n=8, m=2, j_user=0.9, b_edge=5.0)
    series = average_fidelity_series(spec, np.linspace(0, 120, 121))
    assert np.all(series.fbar > -1e-12) and np.all(series.fbar < 1 + 1e-12)


def test_aggregate():
    f_t, f_c = aggregate(np.array([[1.0, 0.5], [0.5, 1.0]]))
    assert (f_t, f_c) == (1.0, 0.5)
    f_t, f_c = aggregate(np.array([[0.5, 0.5], [0.5, 0.5]]))
    assert (f_t, f_c) == (0.5, 0.5)
    f_t, f_c = aggregate(np.array([[0.73]]))
    assert f_t == 0.73 and f_c is None


@given(st.integers(1, 3), st.data())
@settings(max_examples=10)
def test_aggregate_matches_definition(m, data):
    fbar = np.array(
        [[data.draw(st.floats(0, 1)) for _ in range(m)] for _ in range(m)]
    )
    f_t, f_c = aggregate(fbar)
    assert f_t == pytest.approx(np.mean(np.diag(fbar)))
    if m == 1:
        assert f_c is None
    else:
        off = fbar[~np.eye(m, dtype=bool)]
        assert f_c == pytest.approx(off.mean())


# ---------------------------------------------------------------------------
# Monte Carlo estimator


def test_mc_deterministic():
    spec = spec_for(n=4, m=2)
    a = haar_mc_average(spec, 5.0, 500, seed=77)
    b = haar_mc_average(spec, 5.0, 500, seed=77)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_mc_at_t0():
    spec = spec_for(n=4, m=2)
    mean, err = haar_mc_average(spec, 0.0, 4000, seed=5)
    assert np.max(np.abs(mean - 0.5)) < 3.5 * err.max() + 1e-12


def test_mc_consistent_with_analytic():
    rng = np.random.default_rng(100)
    spec = spec_for(n=6, m=2, j_user=0.5, b_user=(0.35, -0.2), b_edge=0.9)
    hits = 0
    total = 0
    for t in rng.uniform(2, 60, 4):
        mean, err = haar_mc_average(spec, float(t), 10_000, seed=int(t * 100))
        ana = average_fidelity(spec, float(t))
        within = np.abs(mean - ana) <= 3 * np.maximum(err, 1e-12)
        hits += int(within.sum())
        total += within.size
    assert hits >= total - 1


# ---------------------------------------------------------------------------
# thermal channel


def test_thermal_weights_normalized():
    spec = spec_for(n=3, m=1, j_user=0.4, b_user=(0.3,), b_edge=0.5)
    table = ThermalFidelityTable(spec, np.array([1.0]))
    for kbt in [0.0, 0.3, 2.0, np.inf]:
        w = table.weights(kbt)
        assert abs(w.sum() - 1.0) < 1e-12
        assert np.all(w >= 0)


def test_thermal_zero_temperature_uses_ground_state():
    spec = spec_for(n=3, m=1, j_user=0.4, b_user=(0.3,), b_edge=0.5)
    t = 7.0
    table = ThermalFidelityTable(spec, np.array([t]))
    gs = int(np.argmin(table.channel_energies))
    assert table.weights(0.0)[gs] > 0
    expected = table.fbar_by_channel[gs, 0]
    assert np.max(np.abs(table.mix(0.0)[0] - expected)) < 1e-12


def test_thermal_vacuum_channel_column_matches_average_fidelity():
    # the channel eigenstate equal to |0...0> must reproduce the pure result
    spec = spec_for(n=3, m=1, j_user=0.4, b_user=(0.3,), b_edge=0.5)
    t = 7.0
    table = ThermalFidelityTable(spec, np.array([t]))
    h_ch_dim = table.channel_energies.size
    # locate the vacuum among channel eigenstates via the energy of |0...0>
    vac_energy = 2 * spec.b_edge
    idx = int(np.argmin(np.abs(table.channel_energies - vac_energy)))
    # the XX chain conserves excitation number, so the vacuum is an eigenstate
    assert abs(table.channel_energies[idx] - vac_energy) < 1e-9
    pure = average_fidelity(spec, t)
    assert np.max(np.abs(table.fbar_by_channel[idx, 0] - pure)) < 1e-9


def test_thermal_mixture_matches_density_matrix_oracle():
    # evolve psi_S (x) rho_ch(kbt) (x) |0_R> literally and compare the
    # pointwise fidelity against the per-eigenstate mixture
    spec = spec_for(n=3, m=1, j_user=0.6, b_user=(0.2,), b_edge=0.4)
    lay = spec.layout
    t = 4.0
    kbt = 0.8
    theta, phi = 1.1, 0.7

    h_full = oracles.full_hamiltonian(spec)
    evals, evecs = np.linalg.eigh(h_full)
    from spinbus.hamiltonian import build_channel_hamiltonian

    h_ch = build_channel_hamiltonian(lay.n_chain, spec.j_chain, spec.b_edge)
    rho_ch = np.array(
        np.linalg.matrix_power(np.eye(h_ch.shape[0]), 1), dtype=complex
    )
    e_ch, v_ch = np.linalg.eigh(h_ch)
    w = np.exp(-(e_ch - e_ch.min()) / kbt)
    w /= w.sum()
    rho_ch = (v_ch * w) @ v_ch.conj().T

    qubit = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    rho_s = np.outer(qubit, qubit.conj())
    rho_r = np.diag([1.0, 0.0]).astype(complex)
    rho0 = np.kron(rho_r, np.kron(rho_ch, rho_s))  # site 0 is the last factor
    u = evecs @ np.diag(np.exp(-1j * evals * t)) @ evecs.conj().T
    rho_t = u @ rho0 @ u.conj().T
    rho_recv = oracles.reduced_qubit(rho_t, lay.receiver_site(0), lay.total_sites)
    expected = (qubit.conj() @ rho_recv @ qubit).real

    # package path: mix pointwise fidelities per channel eigenstate
    table = ThermalFidelityTable(spec, np.array([t]))
    weights = table.weights(kbt)
    acc = 0.0
    for m_idx in range(e_ch.size):
        psi0 = np.zeros(1 << lay.total_sites, complex)
        ch_indices = (np.arange(1 << lay.n_chain) << lay.n_users).astype(int)
        for i, amp in enumerate(qubit):
            psi0[ch_indices + i] += amp * v_ch[:, m_idx]
        psit = evecs @ (np.exp(-1j * evals * t) * (evecs.conj().T @ psi0))
        rho_m = oracles.reduced_qubit(psit, lay.receiver_site(0), lay.total_sites)
        acc += weights[m_idx] * (qubit.conj() @ rho_m @ qubit).real
    assert acc == pytest.approx(expected, abs=1e-10)


def test_thermal_single_time_helper():
    spec = spec_for(n=3, m=1, j_user=0.4, b_user=(0.3,))
    out = thermal_average_fidelity(spec, ThermalSpec(kbt=0.7), 5.0)
    assert out.shape == (1, 1) and 0 <= out[0, 0] <= 1


def test_thermal_size_guard():
    spec = spec_for(n=12, m=2)
    with pytest.raises(ResourceLimitError):
        ThermalFidelityTable(spec, np.array([1.0]))


def test_thermal_spec_validation():
    with pytest.raises(ValidationError):
        ThermalSpec(kbt=-0.1)


# ---------------------------------------------------------------------------
# dephasing path


def test_dephasing_gamma_zero_matches_unitary_kernel():
    spec = spec_for(n=4, m=2, j_user=0.4, b_user=(0.3, -0.1), b_edge=0.8)
    times = np.array([2.0, 9.0])
    a = dephasing_fbar_series(spec, 0.0, times, method="splitstep")
    b = average_fidelity_series(spec, times).fbar
    assert np.max(np.abs(a - b)) < 1e-7


def test_dephasing_matches_full_space_lindblad():
    # one sender pattern dyad evolved by the literal superoperator, RK4 both
    spec = spec_for(n=2, m=1, j_user=0.7, b_user=(0.4,), b_edge=0.3)
    gamma = 0.05
    t_end = 2.0
    times = np.array([t_end])
    got = dephasing_fbar_series(spec, gamma, times, method="rk4", step=0.002)

    lay = spec.layout
    h = oracles.full_hamiltonian(spec)
    dim = 1 << lay.total_sites
    m = lay.n_users

    def rk4_full(rho, h_step, n_steps):
        for _ in range(n_steps):
            k1 = oracles.lindblad_rhs(h, gamma, lay.total_sites, rho)
            k2 = oracles.lindblad_rhs(h, gamma, lay.total_sites, rho + 0.5 * h_step * k1)
            k3 = oracles.lindblad_rhs(h, gamma, lay.total_sites, rho + 0.5 * h_step * k2)
            k4 = oracles.lindblad_rhs(h, gamma, lay.total_sites, rho + h_step * k3)
            rho = rho + (h_step / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        return rho

    # assemble the averaged fidelity from oracle-evolved pattern dyads
    n_steps = 1000
    step = t_end / n_steps
    kernels = {}
    for i in range(2):
        for j in range(2):
            rho0 = np.zeros((dim, dim), complex)
            rho0[i, j] = 1.0
            rho_t = rk4_full(rho0, step, n_steps)
            kernels[(i, j)] = oracles.reduced_qubit(
                rho_t, lay.receiver_site(0), lay.total_sites
            )
    expected = 0.5 + (
        kernels[(0, 0)][0, 0].real
        - kernels[(1, 1)][0, 0].real
        + 2 * kernels[(0, 1)][0, 1].real
    ) / 6.0
    assert got[0, 0, 0] == pytest.approx(expected, abs=1e-8)


def test_dephasing_pointwise_matches_kernel_combination():
    # linearity: evolving the composed input density agrees with combining
    # the separately evolved sender dyads
    from spinbus.dynamics import _BlockPropagator
    from spinbus.fidelity import pointwise_fidelity_dephasing, _engine

    spec = spec_for(n=3, m=2, j_user=0.5, b_user=(0.3, -0.2), b_edge=0.6)
    gamma = 0.01
    t = 3.0
    rng = np.random.default_rng(9)
    angles = tuple(random_angles(rng, 2))
    inp = InputState(angles=angles)
    direct = pointwise_fidelity_dephasing(spec, inp, gamma, np.array([t]), method="rk4", step=0.002)[0]

    engine = _engine(spec)
    prop = _BlockPropagator(spec, (0, 1, 2), gamma)
    amps = input_amplitudes(np.asarray(angles)[None])[:, 0]
    m = 2
    fid = np.empty((m, m))
    # evolve each dyad |i><j| and combine with the input amplitudes
    kernels = {}
    for i in range(4):
        for j in range(4):
            ki, kj = i.bit_count(), j.bit_count()
            x0 = np.zeros((engine.caches[ki].dim, engine.caches[kj].dim), complex)
            x0[engine.bases[ki].index_of(i), engine.bases[kj].index_of(j)] = 1.0
            kernels[(i, j)] = prop.advance(ki, kj, x0, (0.0, t), "rk4", 0.002)
    for beta in range(m):
        low, high, lift = engine._receiver_maps[beta]
        rho = np.zeros((2, 2), complex)
        for (i, j), x in kernels.items():
            ki, kj = i.bit_count(), j.bit_count()
            w = amps[i] * np.conj(amps[j])
            if ki == kj:
                rho[0, 0] += w * x[low[ki], low[ki]].sum()
                rho[1, 1] += w * x[high[ki], high[ki]].sum()
            elif kj == ki + 1:
                rho[0, 1] += w * x[low[ki], lift[ki]].sum()
            elif kj == ki - 1:
                rho[1, 0] += w * x[lift[kj], low[kj]].sum()
        for alpha in range(m):
            th, ph = angles[alpha]
            bra = np.array([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)])
            fid[alpha, beta] = (bra.conj() @ rho @ bra).real
    assert np.max(np.abs(direct - fid)) < 1e-8


def test_dephasing_reduces_peak_fidelity():
    spec = spec_for(n=4, m=2, j_user=0.15, b_user=(0.2, -0.2))
    times = np.linspace(1.0, 120.0, 120)
    clean = dephasing_fbar_series(spec, 0.0, times)
    noisy = dephasing_fbar_series(spec, 2e-3, times)
    f_clean = np.einsum("taa->t", clean) / 2
    f_noisy = np.einsum("taa->t", noisy) / 2
    assert f_noisy.max() < f_clean.max()
