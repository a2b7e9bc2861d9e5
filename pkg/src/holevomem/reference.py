"""Full-space dense reference pipeline, deliberately free of sector logic.

Everything here works in the complete 2^L space: Hamiltonians are assembled
from Kronecker products of single-site operators, evolution uses the full
eigendecomposition, and the partial trace is an axis reshape. It is an order
of magnitude slower and hungrier than the blocked path and exists as the
independent cross-check, selectable in the orchestrator via engine="dense".

Basis ordering matches the packed-bitmask convention: site 1 is the least
significant bit and a set bit is spin-up, so within one site index 0 is down
and index 1 is up.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from .hamiltonian import DisorderedChainSpec, OPEN, RING

_SPIN_RAISE = np.array([[0.0, 0.0], [1.0, 0.0]])  # down -> up
_SZ = np.diag([-0.5, 0.5])
_SX = 0.5 * (_SPIN_RAISE + _SPIN_RAISE.T)
_SY = 0.5j * (_SPIN_RAISE.T - _SPIN_RAISE)
_SPIN = (_SX, _SY, _SZ)


def _site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    factors = [np.eye(2)] * n
    factors[site] = op
    # kron puts its first argument in the most significant slot, so site 0
    # (the least significant bit) must come last
    return reduce(np.kron, reversed(factors))


def dense_hamiltonian(spec: DisorderedChainSpec) -> np.ndarray:
    """The full 2^n x 2^n matrix of H, built term by term from kron products."""
    n = spec.n_sites
    dim = 1 << n
    h = np.zeros((dim, dim), dtype=complex)
    bonds = [(j, j + 1) for j in range(n - 1)]
    if spec.topology == RING:
        bonds.append((n - 1, 0))
    for a, b in bonds:
        for component in _SPIN:
            h += _site_operator(component, a, n) @ _site_operator(component, b, n)
    for j, field in enumerate(spec.fields):
        h += field * _site_operator(_SZ, j, n)
    return spec.coupling * h


def dense_environment_state(kind: str, spec: DisorderedChainSpec,
                            t_neel: float) -> np.ndarray:
    """Environment state as a full 2^n vector, prepared from the dense H."""
    if spec.topology != OPEN:
        raise ValueError("environment spec must be an open chain")
    n = spec.n_sites
    neel = np.zeros(1 << n, dtype=complex)
    neel[sum(1 << j for j in range(0, n, 2))] = 1.0
    if kind == "neel":
        return neel
    energies, vectors = np.linalg.eigh(dense_hamiltonian(spec))
    if kind == "evolved":
        return vectors @ (np.exp(-1j * energies * t_neel) * (vectors.conj().T @ neel))
    if kind == "eigenstate":
        return vectors[:, energies.size // 2].astype(complex)
    raise ValueError(f"unknown environment kind {kind!r}")


def dense_reduced_density_matrix(psi: np.ndarray, n_message: int) -> np.ndarray:
    """Trace out all but the low ``n_message`` bits of a full-space vector."""
    stacked = psi.reshape(-1, 1 << n_message)
    return stacked.T @ stacked.conj()


def _entropy_bits(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-12]
    return float(-(w * np.log2(w)).sum())


def dense_holevo_rate_trace(spec: DisorderedChainSpec, env_vector: np.ndarray,
                            time_grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(times, rates) for the uniform message ensemble, all in the full space."""
    if spec.topology != RING:
        raise ValueError("expects the ring instance")
    l = spec.n_message
    times = np.asarray(time_grid, dtype=float)
    energies, vectors = np.linalg.eigh(dense_hamiltonian(spec))
    m = 1 << l
    average = np.zeros((times.size, m, m), dtype=complex)
    conditional = np.zeros(times.size)
    for k in range(m):
        message = np.zeros(m, dtype=complex)
        message[(m - 1) ^ k] = 1.0
        psi0 = np.kron(env_vector, message)
        coeff = vectors.conj().T @ psi0
        for i, t in enumerate(times):
            psi_t = vectors @ (np.exp(-1j * energies * t) * coeff)
            rho = dense_reduced_density_matrix(psi_t, l)
            average[i] += rho / m
            conditional[i] += _entropy_bits(rho) / m
    holevo_bits = np.array([_entropy_bits(average[i]) for i in range(times.size)])
    return times, (holevo_bits - conditional) / l
