"""Persistence of raw traces, steady-state aggregates, and run manifests.

Files are plain CSV with one record per row; array-valued fields (the field
vector, the time grid, the rate series) are packed into a single cell as
semicolon-separated shortest-roundtrip floats, so every value survives a
write/read cycle bit-exactly. A JSON manifest carries the resolved sweep
configuration next to the data. A missing standard error (single-sample
aggregate) is stored as the IEEE quiet NaN literal ``nan``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict

import numpy as np

from .orchestrator import (SCHEMA_VERSION, FailureRecord, RealizationTrace,
                           SteadyStateRecord)

TRACE_COLUMNS = ["schema_version", "config_hash", "n_sites", "n_message",
                 "environment", "strength", "h_index", "realization",
                 "fields", "times", "rates"]
STEADY_COLUMNS = ["schema_version", "config_hash", "n_sites", "n_message",
                  "environment", "strength", "mean", "stderr", "n_samples"]
FAILURE_COLUMNS = ["schema_version", "config_hash", "n_sites", "n_message",
                   "environment", "strength", "h_index", "realization",
                   "message"]


def _pack(values) -> str:
    return ";".join(repr(float(v)) for v in values)


def _unpack(cell: str) -> np.ndarray:
    return np.array([float(v) for v in cell.split(";")])


def write_traces_csv(path, traces, config_hash: str) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRACE_COLUMNS)
        for t in traces:
            writer.writerow([
                SCHEMA_VERSION, config_hash, t.n_sites, t.n_message,
                t.environment, repr(float(t.strength)), t.h_index,
                t.realization_index, _pack(t.fields), _pack(t.times),
                _pack(t.rates),
            ])


def read_traces_csv(path) -> list[RealizationTrace]:
    traces = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != TRACE_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        for row in reader:
            traces.append(RealizationTrace(
                n_sites=int(row["n_sites"]),
                n_message=int(row["n_message"]),
                environment=row["environment"],
                strength=float(row["strength"]),
                h_index=int(row["h_index"]),
                realization_index=int(row["realization"]),
                fields=_unpack(row["fields"]),
                times=_unpack(row["times"]),
                rates=_unpack(row["rates"]),
            ))
    return traces


def write_steady_csv(path, records, config_hash: str) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(STEADY_COLUMNS)
        for r in records:
            writer.writerow([
                SCHEMA_VERSION, config_hash, r.n_sites, r.n_message,
                r.environment, repr(float(r.strength)), repr(float(r.mean)),
                repr(float(r.stderr)), r.n_samples,
            ])


def read_steady_csv(path) -> list[SteadyStateRecord]:
    records = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != STEADY_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        for row in reader:
            records.append(SteadyStateRecord(
                n_sites=int(row["n_sites"]),
                n_message=int(row["n_message"]),
                environment=row["environment"],
                strength=float(row["strength"]),
                mean=float(row["mean"]),
                stderr=float(row["stderr"]),
                n_samples=int(row["n_samples"]),
            ))
    return records


def append_steady_csv(path, records, config_hash: str) -> None:
    """Write or extend the aggregate file, keeping a single header row."""
    exists = path.exists() if hasattr(path, "exists") else False
    if not exists:
        write_steady_csv(path, records, config_hash)
        return
    with open(path, "a", newline="") as handle:
        writer = csv.writer(handle)
        for r in records:
            writer.writerow([
                SCHEMA_VERSION, config_hash, r.n_sites, r.n_message,
                r.environment, repr(float(r.strength)), repr(float(r.mean)),
                repr(float(r.stderr)), r.n_samples,
            ])


def write_failures_csv(path, failures, config_hash: str) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(FAILURE_COLUMNS)
        for f in failures:
            writer.writerow([
                SCHEMA_VERSION, config_hash, f.n_sites, f.n_message,
                f.environment, repr(float(f.strength)), f.h_index,
                f.realization_index, f.message,
            ])


def write_manifest(path, manifest: dict) -> None:
    with open(path, "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def read_manifest(path) -> dict:
    with open(path) as handle:
        return json.load(handle)
