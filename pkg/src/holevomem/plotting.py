"""Matplotlib rendering of the three report figures next to their tables."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_trace_figure(path, curves, n_sites, n_message, environment):
    """Disorder-averaged rate versus time, one curve per disorder strength."""
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    for strength, times, means in curves:
        positive = times > 0
        ax.plot(times[positive], means[positive], label=f"h = {strength:g}")
    ax.set_xscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("mean Holevo rate")
    ax.set_ylim(0.0, 1.05)
    ax.set_title(f"L = {n_sites}, l = {n_message}, {environment} environment")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_steady_figure(path, records, environment):
    """Steady-state rate versus disorder strength, one curve per size."""
    by_size = {}
    for r in records:
        by_size.setdefault((r.n_sites, r.n_message), []).append(r)
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    for (n_sites, n_message), rows in sorted(by_size.items()):
        rows = sorted(rows, key=lambda r: r.strength)
        ax.errorbar([r.strength for r in rows], [r.mean for r in rows],
                    yerr=[0.0 if r.stderr != r.stderr else r.stderr
                          for r in rows],
                    marker="o", markersize=3, capsize=2,
                    label=f"L = {n_sites}, l = {n_message}")
    ax.set_xlabel("h")
    ax.set_ylabel("steady-state Holevo rate")
    ax.set_ylim(0.0, 1.05)
    ax.set_title(f"{environment} environment")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_collapse_figure(path, table, fit, environment):
    """Rescaled data against the scaling variable after the collapse fit."""
    sizes, _, x, y, dy = table
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    for n_sites in sorted(set(sizes.tolist())):
        keep = sizes == n_sites
        ax.errorbar(x[keep], y[keep], yerr=dy[keep], marker="o", markersize=3,
                    linestyle="none", capsize=2, label=f"L = {n_sites}")
    ax.set_xlabel(r"$L^{1/\nu}\,(h - h_c)$")
    ax.set_ylabel(r"$L^{-\beta/\nu}\,\bar{R}_{SS}$")
    ax.set_title(
        f"{environment}: $h_c$ = {fit.h_c:.2f}, $\\nu$ = {fit.nu:.2f}, "
        f"$\\beta$ = {fit.beta:.3f}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
