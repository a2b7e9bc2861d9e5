"""Pure states living in one magnetization sector, and the reduction to the
message block.

A ``SectorState`` pairs a :class:`~holevomem.basis.SectorBasis` with a complex
amplitude vector. The partial trace over the environment sites exploits the
fixed mask layout (message bits low, environment bits high): amplitudes are
scattered into a (message index) x (environment index) matrix A, and the
reduced density matrix is A A^dagger.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .basis import SectorBasis, enumerate_sector

NORM_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class SectorState:
    """Normalized pure state supported on a single up-spin-count sector."""

    basis: SectorBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (self.basis.size,):
            raise ValueError(
                f"amplitude vector of length {self.amplitudes.shape} does not "
                f"match sector dimension {self.basis.size}"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_full_vector(self) -> np.ndarray:
        """Scatter the sector amplitudes into the full 2^n space."""
        full = np.zeros(1 << self.basis.n, dtype=complex)
        full[self.basis.states] = self.amplitudes
        return full


def basis_state(n: int, mask: int) -> SectorState:
    """The computational product state with bitmask ``mask`` on n sites."""
    sector = enumerate_sector(n, int(np.bitwise_count(mask)))
    amplitudes = np.zeros(sector.size, dtype=complex)
    amplitudes[sector.index_of(mask)] = 1.0
    return SectorState(sector, amplitudes)


def embed_with_environment(n_message: int, message_mask: int,
                           env_state: SectorState) -> SectorState:
    """Join |message> on sites 1..l with an environment state on the rest.

    The product state occupies exactly one sector of the full chain because
    the environment state itself carries a fixed up-spin count.
    """
    l = n_message
    if not 0 <= message_mask < (1 << l):
        raise ValueError(f"message mask {message_mask} needs more than {l} sites")
    n = l + env_state.basis.n
    n_up = int(np.bitwise_count(message_mask)) + env_state.basis.n_up
    joint = enumerate_sector(n, n_up)
    masks = message_mask | (env_state.basis.states << l)
    amplitudes = np.zeros(joint.size, dtype=complex)
    amplitudes[joint.position[masks]] = env_state.amplitudes
    return SectorState(joint, amplitudes)


@dataclass(frozen=True, eq=False)
class ReductionPlan:
    """Precomputed scatter pattern for tracing out the environment sites.

    ``message_index`` and ``environment_rank`` map each sector basis state to
    its (row, column) slot in the rectangular amplitude matrix A; the reduced
    matrix is A A^dagger. Plans are cheap to build and cached per sector.
    """

    n_message: int
    message_index: np.ndarray
    environment_rank: np.ndarray
    n_environment_states: int

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        a = np.zeros((1 << self.n_message, self.n_environment_states),
                     dtype=complex)
        a[self.message_index, self.environment_rank] = amplitudes
        return a @ a.conj().T

    def apply_batch(self, batch: np.ndarray) -> np.ndarray:
        """Reduce a (dim, n_t) stack of amplitude columns to (n_t, 2^l, 2^l)."""
        n_t = batch.shape[1]
        a = np.zeros((n_t, 1 << self.n_message, self.n_environment_states),
                     dtype=complex)
        a[:, self.message_index, self.environment_rank] = batch.T
        return a @ a.conj().swapaxes(1, 2)


@lru_cache(maxsize=None)
def reduction_plan(n: int, n_up: int, n_message: int) -> ReductionPlan:
    if not 0 < n_message < n:
        raise ValueError(f"message length {n_message} must satisfy 0 < l < {n}")
    basis = enumerate_sector(n, n_up)
    message = basis.states & ((1 << n_message) - 1)
    environment = basis.states >> n_message
    unique, rank = np.unique(environment, return_inverse=True)
    return ReductionPlan(
        n_message=n_message,
        message_index=message,
        environment_rank=rank,
        n_environment_states=unique.size,
    )


def partial_trace_environment(state: SectorState, n_message: int) -> np.ndarray:
    """Reduced density matrix of the first ``n_message`` sites.

    Returns the dense 2^l x 2^l complex matrix indexed by message bitmask.
    Hermitian and positive semidefinite by construction; unit trace for a
    normalized input.
    """
    if abs(state.norm - 1.0) > NORM_ATOL:
        raise ValueError(f"state norm {state.norm} is not 1 within {NORM_ATOL}")
    plan = reduction_plan(state.basis.n, state.basis.n_up, n_message)
    return plan.apply(state.amplitudes)
