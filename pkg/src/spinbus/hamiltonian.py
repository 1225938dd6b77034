"""Hamiltonian construction for the chain-plus-users system.

The chain couples neighbouring sites with strength J (the unit of energy),
senders and receivers attach to the chain ends with strength J0, and local
z fields act on the chain edges (B0) and on each user pair (B_alpha).
Matrix elements follow the Pauli-operator form: a hop across an edge with
coupling g has amplitude 2g, and the diagonal of a bitstring s is
sum_f B_f * z_f(s) with z_f(s) = +1 when site f holds |0> and -1 when |1>.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import reduce

import numpy as np

from .config import parse_flat_config, format_flat_config
from .errors import ResourceLimitError, ValidationError
from .lattice import SectorBasis, SiteLayout, enumerate_sector

FULL_SPACE_MAX_SITES = 14


@dataclass(frozen=True)
class SystemSpec:
    """Complete parameterization of the coupled chain, in units of J.

    ``per_bond`` (length N-1) and ``per_user`` (length M) optionally override
    the uniform chain and user couplings; disorder realizations use them.
    """

    layout: SiteLayout
    j_user: float
    b_user: tuple[float, ...]
    j_chain: float = 1.0
    b_edge: float = 0.0
    per_bond: tuple[float, ...] | None = None
    per_user: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.j_chain <= 0:
            raise ValidationError(f"j_chain must be positive, got {self.j_chain}")
        if len(self.b_user) != self.layout.n_users:
            raise ValidationError(
                f"b_user needs {self.layout.n_users} entries, got {len(self.b_user)}"
            )
        if self.per_bond is not None and len(self.per_bond) != self.layout.n_chain - 1:
            raise ValidationError(
                f"per_bond needs {self.layout.n_chain - 1} entries, got {len(self.per_bond)}"
            )
        if self.per_user is not None and len(self.per_user) != self.layout.n_users:
            raise ValidationError(
                f"per_user needs {self.layout.n_users} entries, got {len(self.per_user)}"
            )

    def bond_couplings(self) -> np.ndarray:
        if self.per_bond is not None:
            return np.asarray(self.per_bond, dtype=float)
        return np.full(self.layout.n_chain - 1, self.j_chain)

    def user_couplings(self) -> np.ndarray:
        if self.per_user is not None:
            return np.asarray(self.per_user, dtype=float)
        return np.full(self.layout.n_users, self.j_user)

    def edges(self) -> list[tuple[int, int, float]]:
        """Coupling graph as (site, site, strength) triples."""
        lay = self.layout
        ju = self.user_couplings()
        out = [(lay.sender_site(a), lay.chain_site(0), ju[a]) for a in range(lay.n_users)]
        jc = self.bond_couplings()
        out += [(lay.chain_site(i), lay.chain_site(i + 1), jc[i]) for i in range(lay.n_chain - 1)]
        out += [
            (lay.chain_site(lay.n_chain - 1), lay.receiver_site(a), ju[a])
            for a in range(lay.n_users)
        ]
        return out

    def fields(self) -> list[tuple[int, float]]:
        """(site, B) pairs for every fielded site."""
        lay = self.layout
        out = [(lay.chain_site(0), self.b_edge), (lay.chain_site(lay.n_chain - 1), self.b_edge)]
        for a in range(lay.n_users):
            out.append((lay.sender_site(a), self.b_user[a]))
            out.append((lay.receiver_site(a), self.b_user[a]))
        return out


@dataclass(frozen=True)
class SectorHamiltonian:
    basis: SectorBasis
    matrix: np.ndarray  # dense, real symmetric

    @property
    def dim(self) -> int:
        return self.basis.dim


def diagonal_elements(spec: SystemSpec, states: np.ndarray) -> np.ndarray:
    """Field energy sum_f B_f z_f(s) for each basis bitstring."""
    diag = np.zeros(states.size)
    for site, b in spec.fields():
        if b == 0.0:
            continue
        occupied = (states >> np.uint64(site)) & np.uint64(1)
        diag += b * (1.0 - 2.0 * occupied.astype(float))
    return diag


def build_sector_hamiltonian(spec: SystemSpec, basis: SectorBasis) -> SectorHamiltonian:
    """Dense Hamiltonian restricted to one excitation sector."""
    if basis.layout != spec.layout:
        raise ValidationError("basis was built for a different layout")
    states = basis.states
    h = np.zeros((basis.dim, basis.dim))
    h[np.diag_indices(basis.dim)] = diagonal_elements(spec, states)
    for p, q, g in spec.edges():
        if g == 0.0:
            continue
        bit_p = (states >> np.uint64(p)) & np.uint64(1)
        bit_q = (states >> np.uint64(q)) & np.uint64(1)
        movable = np.nonzero((bit_p == 1) & (bit_q == 0))[0]
        if movable.size == 0:
            continue
        moved = states[movable] - np.uint64(1 << p) + np.uint64(1 << q)
        target = np.searchsorted(states, moved)
        h[target, movable] += 2.0 * g
        h[movable, target] += 2.0 * g
    return SectorHamiltonian(basis=basis, matrix=h)


_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)  # sigma^z |0> = +|0>
_ID = np.eye(2, dtype=complex)


def _embed(op: np.ndarray, site: int, total: int) -> np.ndarray:
    # Site b is bit b of the basis index, i.e. the (total-1-b)-th kron factor.
    factors = [_ID] * total
    factors[total - 1 - site] = op
    return reduce(np.kron, factors)


def build_full_hamiltonian(spec: SystemSpec) -> np.ndarray:
    """Literal Pauli Kronecker-product Hamiltonian over the full 2^L space.

    Supports the thermal-channel path and serves as a cross-check target;
    guarded because the matrix is dense in 4^L memory.
    """
    total = spec.layout.total_sites
    if total > FULL_SPACE_MAX_SITES:
        raise ResourceLimitError(
            f"full-space construction limited to {FULL_SPACE_MAX_SITES} sites, got {total}"
        )
    dim = 1 << total
    h = np.zeros((dim, dim), dtype=complex)
    for p, q, g in spec.edges():
        if g == 0.0:
            continue
        h += g * (_embed(_SX, p, total) @ _embed(_SX, q, total))
        h += g * (_embed(_SY, p, total) @ _embed(_SY, q, total))
    for site, b in spec.fields():
        if b == 0.0:
            continue
        h += b * _embed(_SZ, site, total)
    return h


def build_channel_hamiltonian(n_chain: int, j_chain: float, b_edge: float) -> np.ndarray:
    """Full Hamiltonian of the bare N-site chain (edge fields included)."""
    if n_chain > FULL_SPACE_MAX_SITES:
        raise ResourceLimitError(f"channel construction limited to {FULL_SPACE_MAX_SITES} sites")
    dim = 1 << n_chain
    h = np.zeros((dim, dim), dtype=complex)
    for i in range(n_chain - 1):
        h += j_chain * (_embed(_SX, i, n_chain) @ _embed(_SX, i + 1, n_chain))
        h += j_chain * (_embed(_SY, i, n_chain) @ _embed(_SY, i + 1, n_chain))
    if b_edge != 0.0:
        h += b_edge * (_embed(_SZ, 0, n_chain) + _embed(_SZ, n_chain - 1, n_chain))
    return h


@dataclass(frozen=True)
class DisorderSpec:
    """Multiplicative disorder: spreads of the uniform relative deviations.

    delta  -> chain couplings, delta0 -> user couplings,
    eta    -> user fields,     eta0   -> edge field.
    """

    delta: float = 0.0
    delta0: float = 0.0
    eta: float = 0.0
    eta0: float = 0.0
    n_realizations: int = 1
    master_seed: int = 0

    def __post_init__(self):
        for name in ("delta", "delta0", "eta", "eta0"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValidationError(f"{name} must lie in [0, 1), got {v}")
        if self.n_realizations < 1:
            raise ValidationError("n_realizations must be >= 1")


def apply_disorder(spec: SystemSpec, disorder: DisorderSpec, realization_index: int) -> SystemSpec:
    """Single disorder realization of ``spec``.

    Each chain bond, user coupling, and field is multiplied by (1 + r) with
    r uniform on the matching symmetric interval. The random stream is keyed
    by (master_seed, realization_index), so realizations are reproducible and
    independent of evaluation order. The draw order is fixed: chain bonds,
    user couplings, edge field, user fields.
    """
    if realization_index >= disorder.n_realizations:
        raise ValidationError(
            f"realization {realization_index} >= n_realizations {disorder.n_realizations}"
        )
    if disorder.delta == disorder.delta0 == disorder.eta == disorder.eta0 == 0.0:
        return spec
    ss = np.random.SeedSequence(disorder.master_seed, spawn_key=(realization_index,))
    rng = np.random.default_rng(ss)
    n, m = spec.layout.n_chain, spec.layout.n_users
    j_i = rng.uniform(-disorder.delta, disorder.delta, n - 1)
    j_0 = rng.uniform(-disorder.delta0, disorder.delta0, m)
    b_0 = rng.uniform(-disorder.eta0, disorder.eta0)
    b_a = rng.uniform(-disorder.eta, disorder.eta, m)
    return replace(
        spec,
        per_bond=tuple(spec.bond_couplings() * (1.0 + j_i)),
        per_user=tuple(spec.user_couplings() * (1.0 + j_0)),
        b_edge=spec.b_edge * (1.0 + b_0),
        b_user=tuple(np.asarray(spec.b_user) * (1.0 + b_a)),
    )


def spec_to_config(spec: SystemSpec) -> str:
    """Serialize a SystemSpec as a flat key-value document (units of J)."""
    entries = {
        "chain_length": spec.layout.n_chain,
        "n_users": spec.layout.n_users,
        "j_chain": spec.j_chain,
        "j_user": spec.j_user,
        "b_edge": spec.b_edge,
        "b_user": list(spec.b_user),
    }
    if spec.per_bond is not None:
        entries["per_bond"] = list(spec.per_bond)
    if spec.per_user is not None:
        entries["per_user"] = list(spec.per_user)
    return format_flat_config(entries)


def spec_from_config(text: str) -> SystemSpec:
    cfg = parse_flat_config(text)
    try:
        layout = SiteLayout(n_chain=int(cfg["chain_length"]), n_users=int(cfg["n_users"]))
        b_user = tuple(float(x) for x in cfg["b_user"])
        kwargs = {}
        if "per_bond" in cfg:
            kwargs["per_bond"] = tuple(float(x) for x in cfg["per_bond"])
        if "per_user" in cfg:
            kwargs["per_user"] = tuple(float(x) for x in cfg["per_user"])
        return SystemSpec(
            layout=layout,
            j_chain=float(cfg.get("j_chain", 1.0)),
            j_user=float(cfg["j_user"]),
            b_edge=float(cfg.get("b_edge", 0.0)),
            b_user=b_user,
            **kwargs,
        )
    except KeyError as exc:
        raise ValidationError(f"missing config key: {exc.args[0]}") from exc


def sector_basis(spec: SystemSpec, k: int) -> SectorBasis:
    return enumerate_sector(spec.layout, k)
