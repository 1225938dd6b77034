"""Inverse participation ratios of the one- and two-excitation eigenstates.

The transfer mechanism rests on eigenstates whose weight concentrates on a
sender-receiver pair; the IPR 1 / sum_n |<n|e>|^4 measures that: 1 for a
position basis state, the sector dimension for a uniform superposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import spectral_decompose
from .errors import ValidationError
from .hamiltonian import SystemSpec, build_sector_hamiltonian
from .lattice import enumerate_sector

SUPPORT_MASS = 0.95  # fraction of the l4 mass that defines an eigenstate's support
MAX_TOP_POSITIONS = 8


def ipr_of_vector(vec: np.ndarray) -> float:
    """IPR of a normalized amplitude vector."""
    vec = np.asarray(vec)
    p2 = np.abs(vec) ** 2
    norm = p2.sum()
    if abs(norm - 1.0) > 1e-9:
        raise ValidationError(f"vector norm^2 {norm} is not 1")
    return float(1.0 / np.sum(p2 * p2))


@dataclass(frozen=True)
class IPREntry:
    index: int  # position in ascending-energy order
    eigenvalue: float
    ipr: float
    top_positions: tuple[str, ...]
    top_weights: tuple[float, ...]  # |<n|e>|^4 values of the top positions


@dataclass
class IPRReport:
    sector: int
    spec: SystemSpec
    entries: list[IPREntry]

    def select(self, ipr_min: float = 1.0, ipr_max: float = np.inf) -> list[IPREntry]:
        return [e for e in self.entries if ipr_min <= e.ipr <= ipr_max]


def _position_label(spec: SystemSpec, state: int) -> str:
    bits = [b for b in range(spec.layout.total_sites) if (state >> b) & 1]
    return "+".join(spec.layout.site_label(b) for b in bits)


def _ipr_report(spec: SystemSpec, k: int) -> IPRReport:
    basis = enumerate_sector(spec.layout, k)
    cache = spectral_decompose(build_sector_hamiltonian(spec, basis))
    weights = np.abs(cache.eigenvectors) ** 4  # (position, eigenstate)
    total = weights.sum(axis=0)
    entries = []
    for s in range(cache.dim):
        order = np.argsort(weights[:, s])[::-1]
        mass = 0.0
        top = []
        for pos in order[:MAX_TOP_POSITIONS]:
            top.append(pos)
            mass += weights[pos, s]
            if mass >= SUPPORT_MASS * total[s]:
                break
        entries.append(
            IPREntry(
                index=s,
                eigenvalue=float(cache.eigenvalues[s]),
                ipr=float(1.0 / total[s]),
                top_positions=tuple(_position_label(spec, int(basis.states[p])) for p in top),
                top_weights=tuple(float(weights[p, s]) for p in top),
            )
        )
    return IPRReport(sector=k, spec=spec, entries=entries)


def ipr_one_excitation(spec: SystemSpec) -> IPRReport:
    return _ipr_report(spec, 1)


def ipr_two_excitation(spec: SystemSpec) -> IPRReport:
    return _ipr_report(spec, 2)


def support_fraction(entry: IPREntry, n_top: int) -> float:
    """Fraction of the l4 mass carried by the entry's leading n positions."""
    total = 1.0 / entry.ipr
    return float(sum(entry.top_weights[:n_top]) / total)
