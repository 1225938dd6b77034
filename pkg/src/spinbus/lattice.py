"""Site layout and excitation-number sector enumeration.

The system is an N-site chain (the data bus) with M sender qubits attached
to the first chain site and M receiver qubits attached to the last one.
Sites are numbered so that the basis bitstring of a product state reads,
from bit 0 upward: senders S1..SM, chain sites 1..N, receivers R1..RM.
Bit b set means site b holds |1>.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from math import comb

import numpy as np

from .errors import ValidationError


class SiteKind(Enum):
    SENDER = "S"
    CHAIN = "C"
    RECEIVER = "R"


@dataclass(frozen=True)
class SiteLayout:
    """Fixed site ordering: senders first, then the chain, then receivers."""

    n_chain: int
    n_users: int

    def __post_init__(self):
        if self.n_chain < 2:
            raise ValidationError(f"n_chain must be >= 2, got {self.n_chain}")
        if self.n_users < 1:
            raise ValidationError(f"n_users must be >= 1, got {self.n_users}")

    @property
    def total_sites(self) -> int:
        return self.n_chain + 2 * self.n_users

    def sender_site(self, alpha: int) -> int:
        """Site index of sender alpha (0-based user index)."""
        self._check_user(alpha)
        return alpha

    def chain_site(self, i: int) -> int:
        """Site index of chain position i (0-based, 0..N-1)."""
        if not 0 <= i < self.n_chain:
            raise ValidationError(f"chain index {i} outside [0, {self.n_chain})")
        return self.n_users + i

    def receiver_site(self, alpha: int) -> int:
        """Site index of receiver alpha (0-based user index)."""
        self._check_user(alpha)
        return self.n_users + self.n_chain + alpha

    def role(self, index: int) -> tuple[SiteKind, int]:
        """Classify a site index as (kind, 1-based position within kind)."""
        m, n = self.n_users, self.n_chain
        if not 0 <= index < self.total_sites:
            raise ValidationError(f"site index {index} outside [0, {self.total_sites})")
        if index < m:
            return (SiteKind.SENDER, index + 1)
        if index < m + n:
            return (SiteKind.CHAIN, index - m + 1)
        return (SiteKind.RECEIVER, index - m - n + 1)

    def site_label(self, index: int) -> str:
        """Human-readable label: 'S1', '3' (chain position), 'R2'."""
        kind, pos = self.role(index)
        if kind is SiteKind.CHAIN:
            return str(pos)
        return f"{kind.value}{pos}"

    def _check_user(self, alpha: int) -> None:
        if not 0 <= alpha < self.n_users:
            raise ValidationError(f"user index {alpha} outside [0, {self.n_users})")


@dataclass(frozen=True)
class SectorBasis:
    """All occupation bitstrings with a fixed number of excitations.

    States are stored ascending as unsigned integers, so the position of a
    bitstring is recoverable by binary search.
    """

    layout: SiteLayout
    excitations: int
    states: np.ndarray  # uint64, sorted ascending

    @property
    def dim(self) -> int:
        return self.states.size

    def index_of(self, state: int) -> int:
        pos = int(np.searchsorted(self.states, np.uint64(state)))
        if pos >= self.dim or int(self.states[pos]) != int(state):
            raise ValidationError(
                f"bitstring {state:#x} not in k={self.excitations} sector"
            )
        return pos


def make_layout(n_chain: int, n_users: int) -> SiteLayout:
    """Build the sender/chain/receiver layout, validating sizes."""
    return SiteLayout(n_chain=n_chain, n_users=n_users)


def enumerate_sector(layout: SiteLayout, k: int) -> SectorBasis:
    """Enumerate the k-excitation sector of the layout.

    The result is deterministic: C(total_sites, k) bitstrings in ascending
    unsigned-integer order.
    """
    total = layout.total_sites
    if not 0 <= k <= total:
        raise ValidationError(f"excitation number {k} outside [0, {total}]")
    values = [sum(1 << p for p in positions) for positions in combinations(range(total), k)]
    states = np.array(sorted(values), dtype=np.uint64)
    assert states.size == comb(total, k)
    return SectorBasis(layout=layout, excitations=k, states=states)


def popcount_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise Hamming distance between two sorted uint64 state arrays."""
    x = np.bitwise_xor(a[:, None], b[None, :])
    # 64-bit SWAR popcount.
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return ((x * np.uint64(0x0101010101010101)) >> np.uint64(56)).astype(np.int64)
