"""Von Neumann entropy, Holevo quantity, and the Holevo rate over time.

Entropies are in bits (log base 2) throughout. The message ensemble is the
full set of 2^l computational product states on the message sites, uniform
by default; the Holevo quantity of their images under evolution-plus-trace
bounds the classical information still readable from the message block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .evolution import SpectralDecomposition, evolve_batch
from .hamiltonian import DisorderedChainSpec, RING
from .states import SectorState, embed_with_environment, reduction_plan

#: Eigenvalues at or below this threshold contribute nothing to the entropy.
EIGENVALUE_CLIP = 1e-12

#: Eigenvalues below this are not numerical noise but an invalid input.
NEGATIVE_EIGENVALUE_FLOOR = -1e-8


@dataclass(frozen=True)
class MessageEnsemble:
    """All 2^l product messages on l sites with their prior probabilities."""

    n_message: int
    probabilities: tuple[float, ...] = ()

    def __post_init__(self):
        if self.n_message < 1:
            raise ValueError("messages need at least one site")
        if not self.probabilities:
            uniform = (1.0 / self.size,) * self.size
            object.__setattr__(self, "probabilities", uniform)
        if len(self.probabilities) != self.size:
            raise ValueError(
                f"expected {self.size} probabilities, got {len(self.probabilities)}")
        if abs(sum(self.probabilities) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1 within 1e-12")

    @property
    def size(self) -> int:
        return 1 << self.n_message

    def message_mask(self, k: int) -> int:
        """Up-spin bitmask of message k.

        Message symbols run 0 = up to 1 = down, and message k spells its
        binary digits across the sites, so the stored mask is the bitwise
        complement of k on l bits: message 0 is all spins up.
        """
        return ((1 << self.n_message) - 1) ^ k


class HolevoSample(NamedTuple):
    t: float
    holevo_bits: float
    rate: float


@dataclass(frozen=True, eq=False)
class HolevoTrace:
    """Holevo quantity and rate of one realization on a fixed time grid."""

    n_message: int
    times: np.ndarray
    holevo_bits: np.ndarray
    rates: np.ndarray

    def sample(self, i: int) -> HolevoSample:
        return HolevoSample(float(self.times[i]), float(self.holevo_bits[i]),
                            float(self.rates[i]))


def entropy_from_eigenvalues(eigenvalues: np.ndarray, axis=-1) -> np.ndarray:
    """-sum(p log2 p) with the documented clipping of tiny eigenvalues."""
    w = np.asarray(eigenvalues)
    if w.min() < NEGATIVE_EIGENVALUE_FLOOR:
        raise ValueError(
            f"eigenvalue {w.min()} below {NEGATIVE_EIGENVALUE_FLOOR}: "
            "not a density matrix")
    safe = np.where(w > EIGENVALUE_CLIP, w, 1.0)
    return -(safe * np.log2(safe)).sum(axis=axis)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy of a density matrix in bits."""
    return float(entropy_from_eigenvalues(np.linalg.eigvalsh(rho)))


def holevo_quantity(reduced: Sequence[np.ndarray],
                    probabilities: Sequence[float]) -> float:
    """S(sum_k p_k rho_k) - sum_k p_k S(rho_k), in bits, clipped at zero."""
    dims = {rho.shape for rho in reduced}
    if len(dims) != 1:
        raise ValueError(f"mixed density-matrix shapes: {sorted(dims)}")
    probs = np.asarray(probabilities, dtype=float)
    if probs.shape != (len(reduced),):
        raise ValueError("one probability per state required")
    if abs(probs.sum() - 1.0) > 1e-12:
        raise ValueError("probabilities must sum to 1 within 1e-12")
    average = sum(p * rho for p, rho in zip(probs, reduced))
    conditional = sum(p * von_neumann_entropy(rho)
                      for p, rho in zip(probs, reduced))
    return max(von_neumann_entropy(average) - conditional, 0.0)


def holevo_rate_trace(spec: DisorderedChainSpec,
                      decomp: SpectralDecomposition,
                      env_state: SectorState,
                      ensemble: MessageEnsemble,
                      time_grid: np.ndarray) -> HolevoTrace:
    """Holevo rate of the message block at every grid time.

    Every message is embedded with the shared environment state, evolved in
    its sector for all times at once, and reduced to the message block. The
    ensemble-average state is accumulated in the reduced space in message
    order, keeping the result independent of any outer parallelism.
    """
    times = np.asarray(time_grid, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] != 0.0:
        raise ValueError("time grid must be 1-D and start at 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly ascending")
    if spec.topology != RING:
        raise ValueError("holevo_rate_trace expects the ring instance")
    l = ensemble.n_message
    if l != spec.n_message:
        raise ValueError(
            f"ensemble length {l} does not match instance cut {spec.n_message}")
    if env_state.basis.n != spec.n_environment:
        raise ValueError(
            f"environment state on {env_state.basis.n} sites does not match "
            f"{spec.n_environment} environment sites")

    average = np.zeros((times.size, 1 << l, 1 << l), dtype=complex)
    conditional = np.zeros(times.size)
    for k in range(ensemble.size):
        p = ensemble.probabilities[k]
        psi0 = embed_with_environment(l, ensemble.message_mask(k), env_state)
        plan = reduction_plan(spec.n_sites, psi0.basis.n_up, l)
        reduced = plan.apply_batch(evolve_batch(psi0, decomp, times))
        average += p * reduced
        conditional += p * entropy_from_eigenvalues(np.linalg.eigvalsh(reduced))
    holevo_bits = entropy_from_eigenvalues(np.linalg.eigvalsh(average)) - conditional
    return HolevoTrace(n_message=l, times=times, holevo_bits=holevo_bits,
                       rates=holevo_bits / l)
