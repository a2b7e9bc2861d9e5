"""Declarative run configuration: one TOML file drives every command.

The file groups settings into sections; everything except the section a
command actually needs is optional, and physics defaults (total time L^2,
window start at an eighth of it, environment pre-evolution time L, uniform
message priors) are pre-filled. The resolved configuration is hashed over
its canonical JSON form, so the hash is stable under reordering of the file.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .environment import ENVIRONMENT_KINDS


class ConfigError(Exception):
    """Invalid or missing configuration; message names the field at fault."""


@dataclass(frozen=True)
class RunSettings:
    seed: int = 20260809
    out_dir: str = "results"
    threads: int = 0  # 0 = use every core


@dataclass(frozen=True)
class ModelSettings:
    environment: str = "neel"
    coupling: float = 1.0


@dataclass(frozen=True)
class GridSettings:
    transient_points: int = 16
    window_points: int = 64
    total_time: float | None = None
    window_start: float | None = None
    neel_evolution_time: float | None = None


@dataclass(frozen=True)
class TraceSettings:
    n_sites: int = 12
    n_message: int = 4
    strengths: tuple[float, ...] = (0.5, 8.0)
    realizations: int = 100


@dataclass(frozen=True)
class SweepSettings:
    sizes: tuple[int, ...] = (6, 9, 12)
    ratio: Fraction = Fraction(1, 3)
    strengths: tuple[float, ...] = (1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5)
    realizations: int = 100

    def message_length(self, n_sites: int) -> int:
        scaled = self.ratio * n_sites
        if scaled.denominator != 1:
            raise ConfigError(
                f"sweep.sizes: L={n_sites} times ratio {self.ratio} is not an "
                "integer message length")
        return int(scaled)


@dataclass(frozen=True)
class CollapseSettings:
    beta_mode: str = "free"
    window_halfwidth: float = 1.5
    bootstrap: int = 100
    neighbors: int = 4
    multistarts: int = 5


@dataclass(frozen=True)
class FileConfig:
    run: RunSettings = field(default_factory=RunSettings)
    model: ModelSettings = field(default_factory=ModelSettings)
    grid: GridSettings = field(default_factory=GridSettings)
    trace: TraceSettings = field(default_factory=TraceSettings)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    collapse: CollapseSettings = field(default_factory=CollapseSettings)


_SECTIONS = {
    "run": RunSettings,
    "model": ModelSettings,
    "grid": GridSettings,
    "trace": TraceSettings,
    "sweep": SweepSettings,
    "collapse": CollapseSettings,
}


def _coerce(section: str, name: str, value, target):
    if target is Fraction or isinstance(target, Fraction):
        try:
            return Fraction(str(value))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{section}.{name}: not a valid ratio: {value!r}") from exc
    if isinstance(target, tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{section}.{name}: expected a list, got {value!r}")
        kind = type(target[0]) if target else float
        return tuple(kind(v) for v in value)
    if isinstance(target, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{section}.{name}: expected a boolean")
        return value
    if isinstance(target, int) and not isinstance(value, bool):
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{section}.{name}: expected an integer")
        return int(value)
    if isinstance(target, float) or target is None:
        if value is not None and not isinstance(value, (int, float)):
            raise ConfigError(f"{section}.{name}: expected a number")
        return None if value is None else float(value)
    if isinstance(target, str):
        if not isinstance(value, str):
            raise ConfigError(f"{section}.{name}: expected a string")
        return value
    return value


def _build_section(section: str, cls, data: dict):
    defaults = cls()
    unknown = set(data) - set(defaults.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"{section}: unknown field(s) {sorted(unknown)}")
    kwargs = {}
    for name in data:
        kwargs[name] = _coerce(section, name, data[name],
                               getattr(defaults, name))
    return cls(**{**{f: getattr(defaults, f)
                     for f in defaults.__dataclass_fields__}, **kwargs})


def _validate(config: FileConfig) -> FileConfig:
    if config.model.environment not in ENVIRONMENT_KINDS:
        raise ConfigError(
            f"model.environment: {config.model.environment!r} is not one of "
            f"{list(ENVIRONMENT_KINDS)}")
    if config.run.threads < 0:
        raise ConfigError("run.threads: must be >= 0")
    if not 1 <= config.trace.n_message < config.trace.n_sites:
        raise ConfigError("trace: need 1 <= l < L")
    if not config.trace.strengths:
        raise ConfigError("trace.strengths: must not be empty")
    if config.trace.realizations < 1:
        raise ConfigError("trace.realizations: must be >= 1")
    if not config.sweep.strengths:
        raise ConfigError("sweep.strengths: must not be empty")
    if any(h < 0 for h in config.sweep.strengths + config.trace.strengths):
        raise ConfigError("disorder strengths must be non-negative")
    if config.sweep.realizations < 1:
        raise ConfigError("sweep.realizations: must be >= 1")
    if len(set(config.sweep.sizes)) < 2:
        raise ConfigError("sweep.sizes: need at least 2 distinct sizes")
    for n_sites in config.sweep.sizes:
        l = config.sweep.message_length(n_sites)
        if not 1 <= l < n_sites:
            raise ConfigError(
                f"sweep.sizes: ratio {config.sweep.ratio} gives l={l} for "
                f"L={n_sites}")
    if config.collapse.beta_mode not in ("free", "pinned"):
        raise ConfigError("collapse.beta_mode: must be 'free' or 'pinned'")
    if config.collapse.bootstrap < 0:
        raise ConfigError("collapse.bootstrap: must be >= 0")
    if config.grid.window_points < 8:
        raise ConfigError("grid.window_points: must be >= 8")
    return config


def parse_config(data: dict) -> FileConfig:
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown section(s) {sorted(unknown)}")
    sections = {name: _build_section(name, cls, data.get(name, {}))
                for name, cls in _SECTIONS.items()}
    return _validate(FileConfig(**sections))


def load_config(path) -> FileConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data)


def apply_overrides(config: FileConfig, *, seed=None, out_dir=None,
                    threads=None, sizes=None, ratio=None, environment=None,
                    beta_mode=None) -> FileConfig:
    """Command-line overrides layered on top of the file values."""
    run = config.run
    if seed is not None or out_dir is not None or threads is not None:
        run = RunSettings(
            seed=run.seed if seed is None else int(seed),
            out_dir=run.out_dir if out_dir is None else str(out_dir),
            threads=run.threads if threads is None else int(threads),
        )
    model = config.model
    if environment is not None:
        model = ModelSettings(environment=environment, coupling=model.coupling)
    sweep = config.sweep
    if sizes is not None or ratio is not None:
        sweep = SweepSettings(
            sizes=sweep.sizes if sizes is None else tuple(sizes),
            ratio=sweep.ratio if ratio is None else Fraction(str(ratio)),
            strengths=sweep.strengths,
            realizations=sweep.realizations,
        )
    collapse = config.collapse
    if beta_mode is not None:
        collapse = CollapseSettings(
            beta_mode=beta_mode,
            window_halfwidth=collapse.window_halfwidth,
            bootstrap=collapse.bootstrap,
            neighbors=collapse.neighbors,
            multistarts=collapse.multistarts,
        )
    return _validate(FileConfig(run=run, model=model, grid=config.grid,
                                trace=config.trace, sweep=sweep,
                                collapse=collapse))


def config_dict(config: FileConfig) -> dict:
    def plain(obj):
        if isinstance(obj, Fraction):
            return str(obj)
        if hasattr(obj, "__dataclass_fields__"):
            return {f: plain(getattr(obj, f)) for f in obj.__dataclass_fields__}
        if isinstance(obj, tuple):
            return [plain(v) for v in obj]
        return obj

    return plain(config)


def config_hash(config: FileConfig) -> str:
    canonical = json.dumps(config_dict(config), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]
