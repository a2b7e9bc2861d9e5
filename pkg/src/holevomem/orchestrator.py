"""Disorder sampling, realization execution, and sweep orchestration.

A sweep is a pure function of its :class:`SweepConfig`: every realization's
field vector comes from a counter-based stream keyed by (master seed, h
index, realization index), so any single realization can be reproduced in
isolation and the merged output is independent of worker count and
scheduling. Realizations are the unit of parallelism; inside one
realization all BLAS work is pinned to a single thread so results are
bit-stable no matter how the sweep is executed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from multiprocessing import Pool, cpu_count

import numpy as np
from threadpoolctl import threadpool_limits

from .environment import ENVIRONMENT_KINDS, prepare_environment
from .evolution import decompose
from .hamiltonian import (DisorderedChainSpec, build_hamiltonian,
                          environment_spec)
from .metrics import MessageEnsemble, holevo_rate_trace
from .reference import dense_environment_state, dense_holevo_rate_trace

#: Schema tag written into every persisted record.
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SweepConfig:
    """Everything needed to reproduce one (L, l) sweep over disorder.

    The evolution window defaults follow the physics of the saturating
    rate: total time T1 = L^2, averaging window start T0 = T1/8, and the
    environment pre-evolution time t_neel = L. Each can be overridden.
    """

    n_sites: int
    n_message: int
    environment: str
    strengths: tuple[float, ...]
    realizations: int
    master_seed: int
    coupling: float = 1.0
    transient_points: int = 16
    window_points: int = 64
    total_time: float | None = None
    window_start: float | None = None
    neel_evolution_time: float | None = None

    def __post_init__(self):
        if not 1 <= self.n_message < self.n_sites:
            raise ValueError("need 1 <= l < L")
        if self.environment not in ENVIRONMENT_KINDS:
            raise ValueError(f"unknown environment {self.environment!r}")
        if self.realizations < 1:
            raise ValueError("need at least one realization")
        if not self.strengths:
            raise ValueError("need at least one disorder strength")
        if any(h < 0 for h in self.strengths):
            raise ValueError("disorder strengths must be non-negative")
        if self.window_points < 8:
            raise ValueError("steady-state window needs at least 8 points")
        if self.t0 >= self.t1:
            raise ValueError("window start must precede the total time")

    @property
    def t1(self) -> float:
        return float(self.n_sites ** 2 if self.total_time is None
                     else self.total_time)

    @property
    def t0(self) -> float:
        return float(self.t1 / 8 if self.window_start is None
                     else self.window_start)

    @property
    def t_neel(self) -> float:
        return float(self.n_sites if self.neel_evolution_time is None
                     else self.neel_evolution_time)


def time_grid(config: SweepConfig) -> np.ndarray:
    """t = 0, a log-spaced transient, then the uniform averaging window."""
    transient = np.geomspace(config.t0 / 100, config.t0,
                             config.transient_points, endpoint=False)
    window = np.linspace(config.t0, config.t1, config.window_points)
    return np.concatenate(([0.0], transient, window))


def realization_seed(master_seed: int, h_index: int,
                     realization_index: int) -> np.random.SeedSequence:
    """Independent, reproducible stream for one (h, realization) cell."""
    return np.random.SeedSequence(master_seed,
                                  spawn_key=(h_index, realization_index))


def sample_fields(strength: float, n_sites: int, seed) -> np.ndarray:
    """n_sites independent uniform draws from [-strength, +strength].

    ``seed`` is anything the counter-based Philox generator accepts, in
    particular the SeedSequence from :func:`realization_seed`.
    """
    if strength < 0:
        raise ValueError("disorder strength must be non-negative")
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.uniform(-strength, strength, n_sites)


@dataclass(frozen=True, eq=False)
class RealizationTrace:
    """One realization's Holevo rate series with full provenance."""

    n_sites: int
    n_message: int
    environment: str
    strength: float
    h_index: int
    realization_index: int
    fields: np.ndarray
    times: np.ndarray
    rates: np.ndarray

    def key(self) -> tuple:
        return (self.n_sites, self.n_message, self.environment,
                self.h_index, self.realization_index)


@dataclass(frozen=True)
class FailureRecord:
    n_sites: int
    n_message: int
    environment: str
    strength: float
    h_index: int
    realization_index: int
    message: str


def run_realization(config: SweepConfig, h_index: int,
                    realization_index: int,
                    engine: str = "sector") -> RealizationTrace:
    """Fields -> ring H and environment chain -> |e> -> rate trace.

    ``engine`` selects the production blocked-sector pipeline ("sector") or
    the dense full-space reference path ("dense").
    """
    strength = config.strengths[h_index]
    seed = realization_seed(config.master_seed, h_index, realization_index)
    fields = sample_fields(strength, config.n_sites, seed)
    spec = DisorderedChainSpec(
        n_sites=config.n_sites,
        n_message=config.n_message,
        fields=tuple(fields),
        coupling=config.coupling,
    )
    grid = time_grid(config)
    if engine == "dense":
        env = dense_environment_state(config.environment,
                                      environment_spec(spec), config.t_neel)
        _, rates = dense_holevo_rate_trace(spec, env, grid)
    elif engine == "sector":
        env = prepare_environment(config.environment,
                                  build_hamiltonian(environment_spec(spec)),
                                  config.t_neel)
        ensemble = MessageEnsemble(config.n_message)
        needed = sorted({env.basis.n_up + ensemble.message_mask(k).bit_count()
                         for k in range(ensemble.size)})
        decomp = decompose(build_hamiltonian(spec), sectors=needed)
        rates = holevo_rate_trace(spec, decomp, env, ensemble, grid).rates
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return RealizationTrace(
        n_sites=config.n_sites,
        n_message=config.n_message,
        environment=config.environment,
        strength=strength,
        h_index=h_index,
        realization_index=realization_index,
        fields=fields,
        times=grid,
        rates=rates,
    )


def steady_state_average(times: np.ndarray, values: np.ndarray,
                         t_start: float, t_end: float) -> float:
    """Trapezoidal time average of values over [t_start, t_end].

    The grid must cover the window with at least 8 interior points; the
    window endpoints are filled in by linear interpolation when they fall
    between grid points.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    eps = 1e-9 * max(abs(t_start), abs(t_end), 1.0)
    if times[0] > t_start + eps or times[-1] < t_end - eps:
        raise ValueError(
            f"grid [{times[0]}, {times[-1]}] does not cover the window "
            f"[{t_start}, {t_end}]")
    inside = (times > t_start) & (times < t_end)
    if inside.sum() + 2 < 8:
        raise ValueError("fewer than 8 grid points in the averaging window")
    xs = np.concatenate(([t_start], times[inside], [t_end]))
    ys = np.concatenate(([np.interp(t_start, times, values)], values[inside],
                         [np.interp(t_end, times, values)]))
    return float(np.trapezoid(ys, xs) / (t_end - t_start))


@dataclass(frozen=True)
class SteadyStateRecord:
    """Disorder-averaged steady-state rate at one (L, l, h, environment)."""

    n_sites: int
    n_message: int
    environment: str
    strength: float
    mean: float
    stderr: float
    n_samples: int


def disorder_average(values) -> tuple[float, float, int]:
    """Sample mean and standard error; stderr is NaN for a single sample."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("need at least one sample")
    if values.size == 1:
        return float(values[0]), math.nan, 1
    return (float(values.mean()),
            float(values.std(ddof=1) / math.sqrt(values.size)),
            int(values.size))


def aggregate_steady_state(config: SweepConfig,
                           traces) -> list[SteadyStateRecord]:
    """Per-realization steady averages reduced to one record per strength.

    Averaging per realization first and over disorder second equals the
    reverse order by linearity, and keeps the reduction embarrassingly
    parallel.
    """
    by_h: dict[int, list[float]] = {}
    for trace in traces:
        by_h.setdefault(trace.h_index, []).append(
            steady_state_average(trace.times, trace.rates, config.t0, config.t1))
    records = []
    for h_index in sorted(by_h):
        mean, stderr, n = disorder_average(by_h[h_index])
        records.append(SteadyStateRecord(
            n_sites=config.n_sites,
            n_message=config.n_message,
            environment=config.environment,
            strength=config.strengths[h_index],
            mean=mean,
            stderr=stderr,
            n_samples=n,
        ))
    return records


def _run_task(task):
    config, h_index, realization_index = task
    try:
        with threadpool_limits(limits=1):
            return run_realization(config, h_index, realization_index)
    except Exception as exc:  # noqa: BLE001 - failures are data, sweep goes on
        return FailureRecord(
            n_sites=config.n_sites,
            n_message=config.n_message,
            environment=config.environment,
            strength=config.strengths[h_index],
            h_index=h_index,
            realization_index=realization_index,
            message=f"{type(exc).__name__}: {exc}",
        )


def run_sweep(config: SweepConfig, workers: int = 0
              ) -> tuple[list[RealizationTrace], list[FailureRecord]]:
    """Execute every (h, realization) cell, in parallel when workers != 1.

    Returns traces sorted by (h index, realization index) plus the failures
    encountered; callers decide what failure rate is tolerable.
    """
    if workers <= 0:
        workers = cpu_count() or 1
    tasks = [(config, h, r)
             for h in range(len(config.strengths))
             for r in range(config.realizations)]
    if workers == 1 or len(tasks) == 1:
        results = [_run_task(task) for task in tasks]
    else:
        with Pool(processes=min(workers, len(tasks))) as pool:
            results = pool.map(_run_task, tasks, chunksize=1)
    traces = [r for r in results if isinstance(r, RealizationTrace)]
    failures = [r for r in results if isinstance(r, FailureRecord)]
    traces.sort(key=RealizationTrace.key)
    return traces, failures


def average_rate_trace(traces) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Pointwise disorder average of rate traces sharing one grid.

    Returns (times, mean, stderr, n); stderr is NaN for a single trace.
    """
    traces = list(traces)
    if not traces:
        raise ValueError("need at least one trace")
    times = traces[0].times
    stack = np.vstack([t.rates for t in traces])
    if stack.shape[0] == 1:
        return times, stack[0].copy(), np.full(times.size, math.nan), 1
    stderr = stack.std(axis=0, ddof=1) / math.sqrt(stack.shape[0])
    return times, stack.mean(axis=0), stderr, stack.shape[0]
