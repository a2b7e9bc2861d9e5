"""Preparation of the three environment states on the non-message sites.

All three kinds are pure states of the open-chain environment Hamiltonian's
site register: the alternating product state, its own time evolution under
the environment Hamiltonian, and the eigenstate at the median of the pooled
environment spectrum.
"""

from __future__ import annotations

import numpy as np

from .basis import enumerate_sector
from .evolution import decompose, evolve
from .hamiltonian import OPEN, BlockedHamiltonian
from .states import SectorState, basis_state

NEEL = "neel"
EVOLVED = "evolved"
EIGENSTATE = "eigenstate"
ENVIRONMENT_KINDS = (NEEL, EVOLVED, EIGENSTATE)


def neel_mask(n: int) -> int:
    """Bitmask of the alternating pattern: up on sites 1, 3, 5, ..."""
    return sum(1 << j for j in range(0, n, 2))


def neel_state(n: int) -> SectorState:
    """Alternating product state, spin-up first, on n sites."""
    if n < 1:
        raise ValueError("environment needs at least one site")
    return basis_state(n, neel_mask(n))


def evolved_neel_state(h_env: BlockedHamiltonian, t_neel: float) -> SectorState:
    """The alternating state evolved for t_neel under the environment chain.

    Only the sector hosting the alternating state needs diagonalizing.
    """
    _require_open(h_env)
    state = neel_state(h_env.n_sites)
    decomp = decompose(h_env, sectors=[state.basis.n_up])
    return evolve(state, decomp, t_neel)


def mid_spectrum_eigenstate(h_env: BlockedHamiltonian) -> SectorState:
    """Eigenstate at the median of the pooled environment spectrum.

    All sectors are pooled, sorted ascending, and the state at index
    floor(d/2) of the full d = 2^n spectrum is returned. Exact ties are
    broken by lower sector, then lower in-sector index.
    """
    _require_open(h_env)
    decomp = decompose(h_env)
    sectors = sorted(decomp.energies)
    pooled = np.concatenate([decomp.energies[s] for s in sectors])
    pool_n_up = np.concatenate(
        [np.full(decomp.energies[s].size, s) for s in sectors])
    pool_index = np.concatenate(
        [np.arange(decomp.energies[s].size) for s in sectors])
    order = np.lexsort((pool_index, pool_n_up, pooled))
    pick = order[pooled.size // 2]
    n_up = int(pool_n_up[pick])
    column = int(pool_index[pick])
    vector = decomp.vectors[n_up][:, column].astype(complex)
    return SectorState(enumerate_sector(h_env.n_sites, n_up), vector)


def prepare_environment(kind: str, h_env: BlockedHamiltonian,
                        t_neel: float) -> SectorState:
    """Dispatch on the environment kind tag."""
    if kind == NEEL:
        return neel_state(h_env.n_sites)
    if kind == EVOLVED:
        return evolved_neel_state(h_env, t_neel)
    if kind == EIGENSTATE:
        return mid_spectrum_eigenstate(h_env)
    raise ValueError(
        f"unknown environment kind {kind!r}; expected one of {ENVIRONMENT_KINDS}")


def _require_open(h_env: BlockedHamiltonian) -> None:
    if h_env.spec.topology != OPEN:
        raise ValueError("environment Hamiltonian must be an open chain")
