"""Disordered Heisenberg Hamiltonians stored as magnetization-sector blocks.

The model is an isotropic spin-1/2 exchange chain with uniform random local
z fields,

    H = J * ( sum_<i,j> S_i . S_j  +  sum_j h_j S^z_j ),      S = sigma / 2,

on either a ring (all nearest-neighbour bonds plus the wrap bond) or an open
chain. The ring geometry is what a message block of l sites coupled at both
ends to its environment produces once all bond terms are collected; the open
chain is the environment-only Hamiltonian used to prepare environment states.

S_i . S_j expands to (S+_i S-_j + S-_i S+_j)/2 + S^z_i S^z_j, so within the
bitmask basis every bond contributes a diagonal zz term and a 1/2 hop between
states whose bits differ on the bond. No term mixes up-spin counts, so each
block is built, stored, and diagonalized independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import SectorBasis, enumerate_sector

RING = "ring"
OPEN = "open"

#: Relative tolerance for the Hermiticity self-check of each stored block.
HERMITICITY_RTOL = 1e-12


@dataclass(frozen=True)
class DisorderedChainSpec:
    """Immutable description of one physical instance.

    ``n_message`` marks how many leading sites carry the message; it is part
    of the instance description (the trace cut), not of the bond geometry,
    which depends only on ``topology``. Open chains (used for the environment
    Hamiltonian) carry ``n_message = 0``.
    """

    n_sites: int
    n_message: int
    fields: tuple[float, ...]
    coupling: float = 1.0
    topology: str = RING

    def __post_init__(self):
        if self.topology not in (RING, OPEN):
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.topology == RING:
            if self.n_sites < 3:
                raise ValueError(
                    f"a ring needs at least 3 sites, got {self.n_sites}: the two "
                    "boundary bonds would coincide"
                )
            if not 1 <= self.n_message < self.n_sites:
                raise ValueError(
                    f"message length {self.n_message} must satisfy "
                    f"1 <= l < {self.n_sites}"
                )
        else:
            if self.n_sites < 1:
                raise ValueError("open chain needs at least 1 site")
            if not 0 <= self.n_message <= self.n_sites:
                raise ValueError("message length out of range")
        if len(self.fields) != self.n_sites:
            raise ValueError(
                f"expected {self.n_sites} field values, got {len(self.fields)}"
            )

    @property
    def n_environment(self) -> int:
        return self.n_sites - self.n_message


def environment_spec(spec: DisorderedChainSpec) -> DisorderedChainSpec:
    """Open-chain spec for the environment sites l+1..L of a ring instance.

    The environment inherits the same realization's field values on its own
    sites; only the message sites and the two boundary bonds are dropped.
    """
    if spec.topology != RING:
        raise ValueError("environment_spec expects a ring instance")
    return DisorderedChainSpec(
        n_sites=spec.n_environment,
        n_message=0,
        fields=spec.fields[spec.n_message:],
        coupling=spec.coupling,
        topology=OPEN,
    )


def bond_pairs(spec: DisorderedChainSpec) -> list[tuple[int, int]]:
    """Nearest-neighbour bonds as 0-based bit index pairs, each listed once."""
    n = spec.n_sites
    pairs = [(j, j + 1) for j in range(n - 1)]
    if spec.topology == RING:
        pairs.append((n - 1, 0))
    return pairs


@dataclass(frozen=True, eq=False)
class BlockedHamiltonian:
    """Hermitian operator stored as one dense real block per up-spin count."""

    spec: DisorderedChainSpec
    blocks: dict[int, np.ndarray]

    @property
    def n_sites(self) -> int:
        return self.spec.n_sites

    def block(self, n_up: int) -> np.ndarray:
        return self.blocks[n_up]

    def basis(self, n_up: int) -> SectorBasis:
        return enumerate_sector(self.spec.n_sites, n_up)


def _sector_block(spec: DisorderedChainSpec, basis: SectorBasis) -> np.ndarray:
    states = basis.states
    n = spec.n_sites
    d = basis.size
    fields = np.asarray(spec.fields)
    # S^z eigenvalue of each site in each basis state: +1/2 up, -1/2 down.
    sz = (((states[:, None] >> np.arange(n)) & 1) - 0.5)
    diag = sz @ fields
    block = np.zeros((d, d))
    for a, b in bond_pairs(spec):
        diag += sz[:, a] * sz[:, b]
        hop = (sz[:, a] != sz[:, b]).nonzero()[0]
        flipped = states[hop] ^ ((1 << a) | (1 << b))
        block[basis.position[flipped], hop] += 0.5
    block[np.diag_indices(d)] += diag
    block *= spec.coupling
    scale = np.abs(block).max()
    assert np.abs(block - block.T).max() <= HERMITICITY_RTOL * max(scale, 1.0)
    return block


def build_hamiltonian(spec: DisorderedChainSpec) -> BlockedHamiltonian:
    """Build every magnetization block of H for the given instance."""
    blocks = {
        n_up: _sector_block(spec, enumerate_sector(spec.n_sites, n_up))
        for n_up in range(spec.n_sites + 1)
    }
    return BlockedHamiltonian(spec=spec, blocks=blocks)
