"""SVG figures for the command-line reports.

Everything renders through the Agg backend into standalone SVG files next
to the CSV output; a fixed hash salt keeps the files reproducible.
"""
from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "lpcns"

import matplotlib.pyplot as plt
import numpy as np

from .experiments import ProbeTable
from .probes import ProbeResult, WaveGrowthResult

__all__ = [
    "decay_plot",
    "wave_plot",
    "diagnostics_plot",
    "probe_plot",
    "summary_plot",
]


def decay_plot(result: ProbeResult, path: str) -> None:
    """log₂ block norms against k, one series per τ, with the fitted lines."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    k_arr = np.asarray(result.spec.k_list, float)
    for tau in result.spec.tau_list:
        vals = [r["value"] for r in result.rows if r["tau"] == tau]
        slope, lo, hi = result.fits[tau]
        pts = ax.plot(k_arr, np.log2(vals), "o", label=f"τ={tau:g}: slope {slope:.3f}")
        fit = slope * (k_arr - k_arr[0]) + np.log2(vals[0])
        ax.plot(k_arr, fit, "--", color=pts[0].get_color(), alpha=0.6)
    ax.set_xlabel("block k")
    ax.set_ylabel("log₂ Lᵖ norm ratio")
    ax.set_title(
        f"d={result.spec.d}, p={result.spec.p:g}: expected slope {result.expected_slope:+.3f}"
    )
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def wave_plot(result: WaveGrowthResult, path: str) -> None:
    """L¹ growth of the half-wave flow on a unit block, log-log with fit."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    t = np.asarray(result.t_values, float)
    ax.loglog(t, result.norms, "o", label="measured")
    expected = (result.d - 1) / 2.0
    anchor = result.norms[0]
    ax.loglog(t, anchor * (t / t[0]) ** result.exponent, "--",
              label=f"fit t^{result.exponent:.3f}")
    ax.loglog(t, anchor * (t / t[0]) ** expected, ":",
              label=f"expected t^{expected:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("L¹ growth factor")
    ax.set_title(f"d={result.d} half-wave L¹ growth")
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def diagnostics_plot(times: np.ndarray, columns: Mapping[str, np.ndarray], path: str) -> None:
    """Trajectory diagnostics: functional aggregates left, bulk scalars right."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.5, 4.0))
    for name, series in columns.items():
        if name in ("mass", "min_density"):
            continue
        ax1.plot(times, series, label=name, lw=1.2)
    ax1.set_xlabel("t")
    ax1.set_ylabel("running norm")
    ax1.grid(alpha=0.3)
    ax1.legend(fontsize=7)
    for name in ("mass", "min_density"):
        if name in columns:
            ax2.plot(times, columns[name], label=name, lw=1.2)
    ax2.set_xlabel("t")
    ax2.grid(alpha=0.3)
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def probe_plot(tables: Sequence[ProbeTable], path: str) -> None:
    """Per-trial LHS/RHS ratios for every probe table on one axes."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for table in tables:
        ratios = table.ratios
        if ratios.size:
            ax.plot(np.arange(ratios.size), ratios, "o-", ms=3, lw=0.8, label=table.name)
    ax.set_xlabel("trial")
    ax.set_ylabel("LHS / RHS")
    ax.set_ylim(bottom=0)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def summary_plot(rows: Sequence[tuple[str, str, bool]], path: str) -> None:
    """One bar per check, green for pass, grouped by criterion id."""
    rows = list(rows)
    fig_h = max(2.0, 0.32 * len(rows) + 1.2)
    fig, ax = plt.subplots(figsize=(8.0, fig_h))
    y = np.arange(len(rows))[::-1]
    colors = ["#2e7d32" if passed else "#c62828" for _, _, passed in rows]
    ax.barh(y, [1.0] * len(rows), color=colors, height=0.6)
    for yi, (criterion, name, passed) in zip(y, rows):
        ax.text(0.01, yi, f"{criterion}: {name}", va="center", fontsize=7, color="white")
        ax.text(0.99, yi, "pass" if passed else "FAIL", va="center", ha="right",
                fontsize=7, color="white", fontweight="bold")
    ax.set_xlim(0, 1)
    ax.set_xticks([])
    ax.set_yticks([])
    ax.set_title("acceptance checks")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
