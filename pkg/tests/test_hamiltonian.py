import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from spinbus.errors import ResourceLimitError, ValidationError
from spinbus.hamiltonian import (
    DisorderSpec,
    SystemSpec,
    apply_disorder,
    build_full_hamiltonian,
    build_sector_hamiltonian,
    diagonal_elements,
    spec_from_config,
    spec_to_config,
)
from spinbus.lattice import enumerate_sector, make_layout


def minimal_spec(**kw):
    lay = make_layout(kw.pop("n", 2), kw.pop("m", 1))
    defaults = dict(j_user=1.0, b_user=(0.0,) * lay.n_users)
    defaults.update(kw)
    return SystemSpec(layout=lay, **defaults)


def test_single_user_line_hops():
    # N=2, M=1, k=1, all fields zero: a 4-site hopping line with amplitude 2.
    spec = minimal_spec()
    basis = enumerate_sector(spec.layout, 1)
    h = build_sector_hamiltonian(spec, basis).matrix
    expected = np.zeros((4, 4))
    for a, b in [(0, 1), (1, 2), (2, 3)]:
        i = basis.index_of(1 << a)
        j = basis.index_of(1 << b)
        expected[i, j] = expected[j, i] = 2.0
    assert np.array_equal(h, expected)


def test_vacuum_sector_is_field_sum():
    spec = minimal_spec(n=3, m=2, b_user=(0.4, -0.2), b_edge=1.5)
    basis = enumerate_sector(spec.layout, 0)
    h = build_sector_hamiltonian(spec, basis).matrix
    assert h.shape == (1, 1)
    assert h[0, 0] == pytest.approx(2 * 1.5 + 2 * 0.4 - 2 * 0.2, abs=1e-14)


def test_sector_blocks_match_full_space_oracle():
    spec = minimal_spec(n=4, m=2, j_user=0.3, b_user=(0.25, -0.15), b_edge=0.7)
    h_full = oracles.full_hamiltonian(spec)
    assert np.max(np.abs(h_full.imag)) < 1e-12
    for k in range(spec.layout.total_sites + 1):
        basis = enumerate_sector(spec.layout, k)
        block = h_full[np.ix_(basis.states.astype(int), basis.states.astype(int))].real
        h_k = build_sector_hamiltonian(spec, basis).matrix
        assert np.max(np.abs(block - h_k)) < 1e-12


def test_full_hamiltonian_conserves_excitations():
    spec = minimal_spec(n=2, m=1, b_user=(0.3,), b_edge=0.2)
    h = build_full_hamiltonian(spec)
    total_sz = sum(
        oracles.site_operator(oracles.SZ, s, spec.layout.total_sites)
        for s in range(spec.layout.total_sites)
    )
    assert np.max(np.abs(h @ total_sz - total_sz @ h)) < 1e-12


def test_full_hamiltonian_size_guard():
    spec = minimal_spec(n=14, m=2)
    with pytest.raises(ResourceLimitError):
        build_full_hamiltonian(spec)


def test_zero_couplings_leave_diagonal():
    lay = make_layout(3, 1)
    spec = SystemSpec(
        layout=lay, j_user=0.0, b_user=(0.5,), b_edge=0.25, per_bond=(0.0, 0.0)
    )
    h = build_full_hamiltonian(spec)
    off = h - np.diag(np.diag(h))
    assert np.max(np.abs(off)) == 0.0


def test_one_excitation_bond_count():
    # each coupling-graph edge appears twice in the k=1 block
    for n, m in [(4, 2), (6, 1), (5, 3)]:
        spec = minimal_spec(n=n, m=m, j_user=0.7, b_user=(0.1,) * m)
        h = build_sector_hamiltonian(spec, enumerate_sector(spec.layout, 1)).matrix
        off = np.count_nonzero(h - np.diag(np.diag(h)))
        assert off == 2 * (n - 1 + 2 * m)


@given(
    st.integers(2, 6),
    st.integers(1, 2),
    st.floats(-2, 2),
    st.floats(-2, 2),
    st.data(),
)
def test_sector_hamiltonians_hermitian(n, m, b_edge, b0, data):
    b_user = tuple(data.draw(st.floats(-2, 2)) for _ in range(m))
    spec = minimal_spec(n=n, m=m, j_user=0.35, b_user=b_user, b_edge=b_edge)
    k = data.draw(st.integers(0, min(3, spec.layout.total_sites)))
    h = build_sector_hamiltonian(spec, enumerate_sector(spec.layout, k)).matrix
    assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_basis_layout_mismatch_rejected():
    spec = minimal_spec(n=4, m=1)
    other = enumerate_sector(make_layout(4, 2), 1)
    with pytest.raises(ValidationError):
        build_sector_hamiltonian(spec, other)


def test_diagonal_sign_convention():
    # site in |0> contributes +B, in |1> contributes -B
    spec = minimal_spec(n=2, m=1, b_user=(0.3,), b_edge=0.2)
    basis = enumerate_sector(spec.layout, 1)
    diag = diagonal_elements(spec, basis.states)
    vac = 2 * 0.3 + 2 * 0.2
    excited_sender = basis.index_of(1)  # sender site holds the excitation
    assert diag[excited_sender] == pytest.approx(vac - 2 * 0.3)


def test_disorder_zero_spread_returns_same_spec():
    spec = minimal_spec(n=5, m=2, b_user=(0.2, -0.2))
    dis = DisorderSpec(n_realizations=3, master_seed=9)
    assert apply_disorder(spec, dis, 0) is spec


def test_disorder_deterministic():
    spec = minimal_spec(n=5, m=2, j_user=0.5, b_user=(0.2, -0.2), b_edge=1.0)
    dis = DisorderSpec(delta=0.1, delta0=0.05, eta=0.02, eta0=0.04, n_realizations=4, master_seed=31)
    a = apply_disorder(spec, dis, 2)
    b = apply_disorder(spec, dis, 2)
    assert a == b
    c = apply_disorder(spec, dis, 3)
    assert a != c


def test_disorder_realization_guard():
    spec = minimal_spec()
    dis = DisorderSpec(delta=0.1, n_realizations=2, master_seed=0)
    with pytest.raises(ValidationError):
        apply_disorder(spec, dis, 2)


def test_disorder_statistics():
    # sample mean of the relative bond deviations within 3 sigma, support bounded
    spec = minimal_spec(n=8, m=1, j_user=0.5, b_user=(0.1,))
    delta = 0.1
    dis = DisorderSpec(delta=delta, n_realizations=10_000, master_seed=123)
    draws = np.array(
        [np.asarray(apply_disorder(spec, dis, r).per_bond) - 1.0 for r in range(10_000)]
    ).ravel()
    sigma = delta / np.sqrt(3)  # std of U[-delta, delta]
    assert abs(draws.mean()) < 3 * sigma / np.sqrt(draws.size)
    assert draws.min() >= -delta and draws.max() <= delta


def test_disorder_spec_validation():
    with pytest.raises(ValidationError):
        DisorderSpec(delta=1.0)
    with pytest.raises(ValidationError):
        DisorderSpec(n_realizations=0)


def test_spec_config_roundtrip():
    spec = minimal_spec(n=6, m=2, j_user=0.04, b_user=(0.35, -0.25), b_edge=2.0)
    text = spec_to_config(spec)
    assert "chain_length = 6" in text
    assert spec_from_config(text) == spec
    disordered = apply_disorder(
        spec, DisorderSpec(delta=0.1, delta0=0.1, n_realizations=1, master_seed=5), 0
    )
    assert spec_from_config(spec_to_config(disordered)) == disordered


def test_spec_validation():
    lay = make_layout(4, 2)
    with pytest.raises(ValidationError):
        SystemSpec(layout=lay, j_user=0.1, b_user=(0.1,))  # wrong b_user length
    with pytest.raises(ValidationError):
        SystemSpec(layout=lay, j_user=0.1, b_user=(0.1, 0.2), j_chain=0.0)
    with pytest.raises(ValidationError):
        SystemSpec(layout=lay, j_user=0.1, b_user=(0.1, 0.2), per_bond=(1.0,))
