"""Command-line entry point: trace, sweep, collapse, validate-config.

Every command reads one TOML config file (flags override individual values),
stamps its outputs with the resolved-config hash, and is idempotent: the
same config and seed produce the same data files no matter how many worker
processes run the sweep. Exit codes: 0 success, 1 analysis error, 2 config
error, 3 too many failed realizations.
"""

from __future__ import annotations

import argparse
import csv
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import __version__
from .config import (ConfigError, FileConfig, apply_overrides, config_dict,
                     config_hash, load_config)
from .orchestrator import (SCHEMA_VERSION, SweepConfig, aggregate_steady_state,
                           average_rate_trace, run_sweep, time_grid)
from .plotting import (render_collapse_figure, render_steady_figure,
                       render_trace_figure)
from .results import (append_steady_csv, read_steady_csv, write_failures_csv,
                      write_manifest, write_steady_csv, write_traces_csv)
from .scaling import AnalysisError, collapsed_table, crossing_points, \
    dataset_from_records, fit_collapse

EXIT_OK = 0
EXIT_ANALYSIS = 1
EXIT_CONFIG = 2
EXIT_PARTIAL_FAILURE = 3

FAILURE_FRACTION_LIMIT = 0.10


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holevomem",
        description="Holevo-rate memory of disordered spin rings: trace the "
                    "rate over time, sweep its steady state over disorder, "
                    "and collapse the curves onto a scaling function.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_sweep_flags=True):
        p.add_argument("--config", required=True, help="TOML config file")
        p.add_argument("--out-dir", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes (0 = all cores)")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--env", default=None,
                       choices=["neel", "evolved", "eigenstate"],
                       help="environment kind")
        if with_sweep_flags:
            p.add_argument("--sizes", default=None,
                           help="comma-separated chain lengths, e.g. 6,9,12")
            p.add_argument("--ratio", default=None,
                           help="message fraction l/L, e.g. 1/3")

    p_trace = sub.add_parser(
        "trace", help="disorder-averaged rate versus time at fixed L, l")
    add_common(p_trace, with_sweep_flags=False)

    p_sweep = sub.add_parser(
        "sweep", help="steady-state rate versus disorder for several sizes")
    add_common(p_sweep)

    p_collapse = sub.add_parser(
        "collapse", help="finite-size-scaling fit of a steady-state aggregate")
    p_collapse.add_argument("aggregate", help="steady-state CSV from 'sweep'")
    p_collapse.add_argument("--config", default=None, help="TOML config file")
    p_collapse.add_argument("--out-dir", default=None)
    p_collapse.add_argument("--seed", type=int, default=None)
    p_collapse.add_argument("--env", default=None,
                            choices=["neel", "evolved", "eigenstate"])
    p_collapse.add_argument("--ratio", default=None,
                            help="message fraction to select, e.g. 1/3")
    p_collapse.add_argument("--beta-mode", default=None,
                            choices=["free", "pinned"],
                            help="fit the curvature exponent or pin it to: 0")

    p_validate = sub.add_parser(
        "validate-config", help="parse and echo the resolved configuration")
    p_validate.add_argument("--config", required=True)
    return parser


def _load(args, need_config=True) -> FileConfig:
    if getattr(args, "config", None) is None:
        if need_config:
            raise ConfigError("--config is required")
        return apply_overrides(FileConfig(), **_override_kwargs(args))
    config = load_config(args.config)
    return apply_overrides(config, **_override_kwargs(args))


def _override_kwargs(args) -> dict:
    sizes = getattr(args, "sizes", None)
    if sizes is not None:
        try:
            sizes = tuple(int(s) for s in sizes.split(","))
        except ValueError as exc:
            raise ConfigError(f"--sizes: {exc}") from exc
    return {
        "seed": getattr(args, "seed", None),
        "out_dir": getattr(args, "out_dir", None),
        "threads": getattr(args, "threads", None),
        "sizes": sizes,
        "ratio": getattr(args, "ratio", None),
        "environment": getattr(args, "env", None),
        "beta_mode": getattr(args, "beta_mode", None),
    }


def _manifest(config, command, outputs, extra=None) -> dict:
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "config_hash": config_hash(config),
        "config": config_dict(config),
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "outputs": sorted(str(p) for p in outputs),
    }
    if extra:
        manifest.update(extra)
    return manifest


def _strength_tag(value: float) -> str:
    return f"{value:g}"


def _ratio_tag(ratio: Fraction) -> str:
    return f"r{ratio.numerator}-{ratio.denominator}"


def cmd_trace(config: FileConfig) -> int:
    out = Path(config.run.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    chash = config_hash(config)
    sweep_config = SweepConfig(
        n_sites=config.trace.n_sites,
        n_message=config.trace.n_message,
        environment=config.model.environment,
        strengths=config.trace.strengths,
        realizations=config.trace.realizations,
        master_seed=config.run.seed,
        coupling=config.model.coupling,
        transient_points=config.grid.transient_points,
        window_points=config.grid.window_points,
        total_time=config.grid.total_time,
        window_start=config.grid.window_start,
        neel_evolution_time=config.grid.neel_evolution_time,
    )
    traces, failures = run_sweep(sweep_config, config.run.threads)
    outputs = []
    stem = (f"trace_L{sweep_config.n_sites}_l{sweep_config.n_message}_"
            f"{sweep_config.environment}")
    figure_curves = []
    for h_index, strength in enumerate(sweep_config.strengths):
        group = [t for t in traces if t.h_index == h_index]
        if not group:
            continue
        times, mean, stderr, n = average_rate_trace(group)
        path = out / f"{stem}_h{_strength_tag(strength)}.csv"
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["schema_version", "config_hash", "time", "mean",
                             "stderr", "n_samples"])
            for i in range(times.size):
                writer.writerow([SCHEMA_VERSION, chash, repr(float(times[i])),
                                 repr(float(mean[i])), repr(float(stderr[i])),
                                 n])
        outputs.append(path)
        figure_curves.append((strength, times, mean))
    figure_path = out / f"{stem}.png"
    render_trace_figure(figure_path, figure_curves, sweep_config.n_sites,
                        sweep_config.n_message, sweep_config.environment)
    outputs.append(figure_path)
    if failures:
        failure_path = out / f"{stem}_failures.csv"
        write_failures_csv(failure_path, failures, chash)
        outputs.append(failure_path)
    write_manifest(out / f"{stem}_manifest.json",
                   _manifest(config, "trace", outputs))
    total = len(traces) + len(failures)
    if failures and len(failures) > FAILURE_FRACTION_LIMIT * total:
        print(f"error: {len(failures)}/{total} realizations failed",
              file=sys.stderr)
        return EXIT_PARTIAL_FAILURE
    return EXIT_OK


def cmd_sweep(config: FileConfig) -> int:
    out = Path(config.run.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    chash = config_hash(config)
    environment = config.model.environment
    ratio = config.sweep.ratio
    steady_path = out / "steady_state.csv"
    if steady_path.exists():
        steady_path.unlink()
    outputs = []
    grids = {}
    all_records = []
    all_failures = []
    total = 0
    for n_sites in sorted(config.sweep.sizes):
        sweep_config = SweepConfig(
            n_sites=n_sites,
            n_message=config.sweep.message_length(n_sites),
            environment=environment,
            strengths=config.sweep.strengths,
            realizations=config.sweep.realizations,
            master_seed=config.run.seed,
            coupling=config.model.coupling,
            transient_points=config.grid.transient_points,
            window_points=config.grid.window_points,
            total_time=config.grid.total_time,
            window_start=config.grid.window_start,
            neel_evolution_time=config.grid.neel_evolution_time,
        )
        traces, failures = run_sweep(sweep_config, config.run.threads)
        total += len(traces) + len(failures)
        all_failures.extend(failures)
        grids[str(n_sites)] = [float(t) for t in time_grid(sweep_config)]
        trace_path = (out / f"traces_L{n_sites}_l{sweep_config.n_message}_"
                            f"{environment}.csv")
        write_traces_csv(trace_path, traces, chash)
        outputs.append(trace_path)
        records = aggregate_steady_state(sweep_config, traces)
        all_records.extend(records)
        append_steady_csv(steady_path, records, chash)
    outputs.append(steady_path)
    figure_path = out / f"steady_state_{environment}_{_ratio_tag(ratio)}.png"
    render_steady_figure(figure_path, all_records, environment)
    outputs.append(figure_path)
    if all_failures:
        failure_path = out / "failures.csv"
        write_failures_csv(failure_path, all_failures, chash)
        outputs.append(failure_path)
    write_manifest(out / "sweep_manifest.json",
                   _manifest(config, "sweep", outputs,
                             extra={"time_grids": grids}))
    if all_failures and len(all_failures) > FAILURE_FRACTION_LIMIT * total:
        print(f"error: {len(all_failures)}/{total} realizations failed",
              file=sys.stderr)
        return EXIT_PARTIAL_FAILURE
    return EXIT_OK


def cmd_collapse(aggregate_path, config: FileConfig) -> int:
    out = Path(config.run.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = Path(aggregate_path)
    if not path.exists():
        raise ConfigError(f"aggregate file not found: {path}")
    environment = config.model.environment
    ratio = config.sweep.ratio
    records = [r for r in read_steady_csv(path)
               if r.environment == environment
               and Fraction(r.n_message, r.n_sites) == ratio]
    if not records:
        raise AnalysisError(
            f"no rows for environment={environment}, ratio={ratio} in {path}")
    dataset = dataset_from_records(records)
    crossings = crossing_points(dataset)
    settings = config.collapse
    fits = {}
    for mode in (settings.beta_mode,
                 "pinned" if settings.beta_mode == "free" else "free"):
        fits[mode] = fit_collapse(
            dataset,
            initial=crossings.estimate,
            beta_mode=mode,
            n_multistarts=settings.multistarts,
            n_bootstrap=settings.bootstrap,
            seed=config.run.seed,
            window_halfwidth=settings.window_halfwidth,
            n_neighbors=settings.neighbors,
        )
    primary = fits[settings.beta_mode]
    tag = f"{environment}_{_ratio_tag(ratio)}"
    table = collapsed_table(dataset, primary)
    table_path = out / f"collapsed_{tag}.csv"
    with open(table_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["n_sites", "strength", "x", "y", "dy"])
        for row in zip(*table):
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "config_hash": config_hash(config),
        "environment": environment,
        "ratio": str(ratio),
        "sizes": dataset.sizes(),
        "crossings": {
            "estimate": crossings.estimate,
            "spread": crossings.spread,
            "pairs": [{"sizes": [p.size_small, p.size_large],
                       "strength": p.strength} for p in crossings.pairs],
            "degenerate_pairs": [list(p) for p in crossings.degenerate_pairs],
        },
        "fit": primary.as_dict(),
        "alternate_fit": fits["pinned" if settings.beta_mode == "free"
                              else "free"].as_dict(),
        "collapsed_table": str(table_path),
    }
    report_path = out / f"collapse_fit_{tag}.json"
    write_manifest(report_path, report)
    figure_path = out / f"collapse_{tag}.png"
    render_collapse_figure(figure_path, table, primary, environment)
    print(f"h_c = {primary.h_c:.3f} +/- {primary.h_c_err:.3f}, "
          f"nu = {primary.nu:.3f} +/- {primary.nu_err:.3f}, "
          f"beta = {primary.beta:.4f} +/- {primary.beta_err:.4f} "
          f"(quality {primary.quality:.3g})")
    return EXIT_OK


def cmd_validate_config(args) -> int:
    config = load_config(args.config)
    print(f"config ok: hash {config_hash(config)}")
    import json
    print(json.dumps(config_dict(config), indent=2, sort_keys=True))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate-config":
            return cmd_validate_config(args)
        if args.command == "trace":
            return cmd_trace(_load(args))
        if args.command == "sweep":
            return cmd_sweep(_load(args))
        if args.command == "collapse":
            return cmd_collapse(args.aggregate, _load(args, need_config=False))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
