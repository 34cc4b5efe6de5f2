"""Figure rendering for run traces and evaluation reports.

Everything draws through the Agg backend and writes straight to files, so
the CLI can emit figures next to its delimited outputs on headless boxes.
"""

from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .candidates import CandidateSet  # noqa: E402
from .evaluation import EvalReport  # noqa: E402
from .relaxation import RelaxTrace  # noqa: E402

DPI = 120


def convergence_figure(trace: RelaxTrace, epsilon: float, path: str) -> str:
    """Per-iteration max weight change on a log scale, with the stop threshold."""
    fig, ax = plt.subplots(figsize=(6, 4))
    iterations = range(1, trace.iterations_run + 1)
    ax.semilogy(iterations, trace.deltas, marker="o", markersize=3, linewidth=1)
    ax.axhline(epsilon, color="red", linestyle="--", linewidth=1,
               label=f"epsilon = {epsilon:g}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("max weight change")
    status = "converged" if trace.converged else "stopped at max iterations"
    ax.set_title(f"relaxation trace ({status}, {trace.iterations_run} iterations)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def polysemy_figure(cand: CandidateSet, path: str) -> str:
    """Histogram of candidate counts over connected source nodes."""
    counts = [len(c) for _, c in cand.items() if c]
    fig, ax = plt.subplots(figsize=(6, 4))
    if counts:
        bins = range(1, max(counts) + 2)
        ax.hist(counts, bins=bins, align="left", rwidth=0.85, color="steelblue")
    ax.set_xlabel("candidate connections per node")
    ax.set_ylabel("nodes")
    ax.set_title("polysemy distribution (connected nodes)")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def precision_figure(report: EvalReport, path: str) -> str:
    """Grouped bars of precision per quality tag, one group per (level, scope)."""
    labels, ok_vals, oknf_vals, tot_vals = [], [], [], []
    for s in report.slices:
        labels.append(f"{s.level}\n{s.scope}")
        ok_vals.append(s.ok.pct if s.ok.pct is not None else 0.0)
        oknf_vals.append(s.oknf.pct if s.oknf.pct is not None else 0.0)
        tot_vals.append(s.total.pct if s.total.pct is not None else 0.0)
    x = range(len(labels))
    width = 0.27
    fig, ax = plt.subplots(figsize=(max(6, 1.6 * len(labels)), 4))
    ax.bar([i - width for i in x], ok_vals, width, label="T_OK_F_OK", color="seagreen")
    ax.bar(list(x), oknf_vals, width, label="T_OK_F_NOK", color="goldenrod")
    ax.bar([i + width for i in x], tot_vals, width, label="total T_OK", color="slategray")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels)
    ax.set_ylabel("precision (%)")
    ax.set_ylim(0, 105)
    ax.set_title("precision by quality tag")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
