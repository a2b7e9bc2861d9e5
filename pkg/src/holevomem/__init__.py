"""Holevo-rate memory of disordered Heisenberg rings.

Exact-diagonalization simulation of how many bits of a product-state message
survive in a disordered spin-1/2 ring, plus the sweep orchestration and
finite-size-scaling analysis that extract the localization critical point
from the steady-state rate.
"""

__version__ = "0.1.0"

from .basis import SectorBasis, enumerate_sector, popcount
from .environment import (ENVIRONMENT_KINDS, evolved_neel_state,
                          mid_spectrum_eigenstate, neel_state,
                          prepare_environment)
from .evolution import (EigensolverError, SpectralDecomposition, decompose,
                        evolve, evolve_batch)
from .hamiltonian import (BlockedHamiltonian, DisorderedChainSpec,
                          build_hamiltonian, environment_spec)
from .metrics import (HolevoTrace, MessageEnsemble, holevo_quantity,
                      holevo_rate_trace, von_neumann_entropy)
from .orchestrator import (RealizationTrace, SteadyStateRecord, SweepConfig,
                           disorder_average, realization_seed, run_realization,
                           run_sweep, sample_fields, steady_state_average,
                           time_grid)
from .scaling import (AnalysisError, CollapseFit, ScalingDataset,
                      collapse_quality, crossing_points, dataset_from_records,
                      fit_collapse)
from .states import (SectorState, basis_state, embed_with_environment,
                     partial_trace_environment)

__all__ = [
    "__version__",
    "AnalysisError", "BlockedHamiltonian", "CollapseFit",
    "DisorderedChainSpec", "EigensolverError", "ENVIRONMENT_KINDS",
    "HolevoTrace", "MessageEnsemble", "RealizationTrace", "ScalingDataset",
    "SectorBasis", "SectorState", "SpectralDecomposition",
    "SteadyStateRecord", "SweepConfig",
    "basis_state", "build_hamiltonian", "collapse_quality", "crossing_points",
    "dataset_from_records", "decompose", "disorder_average",
    "embed_with_environment", "enumerate_sector", "environment_spec",
    "evolve", "evolve_batch", "evolved_neel_state", "fit_collapse",
    "holevo_quantity", "holevo_rate_trace", "mid_spectrum_eigenstate",
    "neel_state", "partial_trace_environment", "popcount",
    "prepare_environment", "realization_seed", "run_realization", "run_sweep",
    "sample_fields", "steady_state_average", "time_grid",
    "von_neumann_entropy",
]
