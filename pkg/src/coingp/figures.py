"""Rendered companions to the report CSVs: RMSE histogram and convergence.

Everything draws through the Agg backend so experiments run fine without a
display. The figures repeat what the delimited outputs already contain; the
CSV files stay the machine-readable source of truth.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)
import numpy as np


def render_rmse_histogram(report, out_path: Path, bin_width: float = 0.1) -> Path:
    """Test-RMSE bars, training-RMSE outline, baseline markers."""
    test_vals = np.asarray([r.test_rmse for r in report.runs])
    train_vals = np.asarray([r.training_rmse for r in report.runs])
    combined = np.concatenate([test_vals, train_vals])
    lo = np.floor(combined.min() / bin_width) * bin_width
    hi = combined.max()
    n_bins = max(1, int(np.ceil((hi - lo) / bin_width - 1e-9)))
    edges = lo + np.arange(n_bins + 1) * bin_width

    fig, ax = plt.subplots(figsize=(8, 5))
    ax.hist(test_vals, bins=edges, color="#4878a8", alpha=0.8, label="test RMSE")
    ax.hist(
        train_vals,
        bins=edges,
        histtype="step",
        color="#2d2d2d",
        linewidth=1.5,
        label="training RMSE",
    )
    ax.axvline(
        report.baseline_rmse_moore,
        color="#c44e52",
        linestyle="--",
        label="Moore baseline",
    )
    ax.axvline(
        report.baseline_rmse_von_neumann,
        color="#55a868",
        linestyle=":",
        label="Von Neumann baseline",
    )
    ax.set_xlabel("RMSE")
    ax.set_ylabel("runs")
    ax.set_title(f"{report.image_id} ({report.topology.value}, {len(report.runs)} runs)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def render_convergence(report, out_path: Path) -> Path:
    """Best training fitness per generation, one line per run."""
    fig, ax = plt.subplots(figsize=(8, 5))
    for r in report.runs:
        ax.plot(
            np.arange(1, len(r.generations_history) + 1),
            r.generations_history,
            linewidth=0.8,
            alpha=0.7,
        )
    ax.set_xlabel("generation")
    ax.set_ylabel("best training RMSE")
    ax.set_title(f"{report.image_id} ({report.topology.value}) convergence")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def render_report_figures(report, out_dir: Path, bin_width: float = 0.1) -> list[Path]:
    base = f"{report.image_id}_{report.topology.value}"
    out_dir = Path(out_dir)
    return [
        render_rmse_histogram(report, out_dir / f"{base}_hist.png", bin_width),
        render_convergence(report, out_dir / f"{base}_convergence.png"),
    ]
