"""Computational basis bookkeeping for spin-1/2 chains with magnetization blocking.

Sites are numbered 1..n and packed into integer bitmasks: bit j-1 of a mask
holds the state of site j, so site 1 sits at the least significant bit. A set
bit is a spin-up site (message symbol 0), a cleared bit is spin-down (symbol
1). Because every Hamiltonian built here commutes with the total S^z, the
2^n-dimensional space splits into sectors of fixed up-spin count, and all
heavy linear algebra happens inside one sector at a time.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np


def popcount(masks):
    """Number of set bits, elementwise for integer arrays or scalars."""
    return np.bitwise_count(masks)


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Ordered basis of one fixed-magnetization sector.

    ``states`` lists every n-site bitmask with exactly ``n_up`` set bits in
    strictly increasing order; ``position`` is the full 2^n inverse lookup
    with -1 marking masks outside the sector.
    """

    n: int
    n_up: int
    states: np.ndarray
    position: np.ndarray

    @property
    def size(self) -> int:
        return self.states.size

    def index_of(self, mask: int) -> int:
        """Sector position of a bitmask; ValueError if it lies outside."""
        pos = int(self.position[mask])
        if pos < 0:
            raise ValueError(f"mask {mask:#b} is not in the n_up={self.n_up} sector")
        return pos


@lru_cache(maxsize=None)
def enumerate_sector(n: int, n_up: int) -> SectorBasis:
    """All n-site bitmasks with ``n_up`` up spins, sorted ascending.

    The result is cached: bases are immutable and shared freely.
    """
    if not 0 <= n_up <= n:
        raise ValueError(f"n_up={n_up} out of range for n={n} sites")
    masks = np.arange(1 << n, dtype=np.int64)
    states = masks[popcount(masks) == n_up]
    assert states.size == comb(n, n_up)
    position = np.full(1 << n, -1, dtype=np.int64)
    position[states] = np.arange(states.size)
    return SectorBasis(n=n, n_up=n_up, states=states, position=position)
