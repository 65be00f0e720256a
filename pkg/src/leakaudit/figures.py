"""Figure rendering for the report path.

Every figure lands next to its delimited counterpart so reports can be
read without re-plotting the CSVs. Rendering is optional (--no-figures).
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def accuracy_summary_figure(summary_rows, path: str | os.PathLike) -> str:
    """Grouped bars of mean accuracy per (task, split) and template, with
    chance levels overlaid as horizontal ticks."""
    rows = [r for r in summary_rows if np.isfinite(r.mean_pct)]
    if not rows:
        return ""
    groups = sorted({(r.task, r.split, r.band) for r in rows})
    templates = sorted({r.template for r in rows})
    width = 0.8 / max(1, len(templates))
    fig, ax = plt.subplots(figsize=(max(6.0, 1.3 * len(groups) + 2), 4.2))
    xs = np.arange(len(groups))
    for j, template in enumerate(templates):
        heights, errs, chances, pos = [], [], [], []
        for i, key in enumerate(groups):
            match = [r for r in rows if (r.task, r.split, r.band) == key and r.template == template]
            if not match:
                continue
            heights.append(match[0].mean_pct)
            errs.append(match[0].sem_pct)
            chances.append(match[0].chance_pct)
            pos.append(xs[i] + (j - (len(templates) - 1) / 2) * width)
        bars = ax.bar(pos, heights, width=width * 0.92, yerr=errs, capsize=2, label=template)
        for x, chance in zip(pos, chances):
            ax.plot([x - width / 2, x + width / 2], [chance, chance], color="k", lw=1.2)
    ax.set_xticks(xs)
    labels = [f"{t}\n{s}" + (f"\n{b}" if b != "full" else "") for t, s, b in groups]
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel("accuracy [%]")
    ax.set_ylim(0, 105)
    ax.legend(fontsize=8)
    ax.set_title("audit accuracies (black ticks: chance)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return os.fspath(path)


def gamma_curve_figure(curve: dict, path: str | os.PathLike) -> str:
    """Accuracy vs domain-signature strength."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    gammas = curve["gammas"]
    acc = np.asarray(curve["accuracy_per_seed"])
    ax.plot(gammas, acc, "o-", color="gray", alpha=0.4, lw=0.8)
    ax.plot(gammas, curve["accuracy_mean"], "o-", color="C0", lw=2, label="mean")
    ax.axhline(curve["chance_pct"], color="k", ls="--", lw=1, label="chance")
    ax.set_xlabel("signature strength")
    ax.set_ylabel(f"{curve['task']} accuracy [%]")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return os.fspath(path)


def acf_heatmap_figure(matrix, path: str | os.PathLike) -> str:
    """[frequency x lag] correlation map with the significance contour."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    mesh = ax.pcolormesh(
        matrix.lags_s, matrix.freqs, matrix.values, shading="auto", cmap="viridis"
    )
    ax.set_xscale("log")
    ax.set_xlabel("lag [s]")
    ax.set_ylabel("frequency [Hz]")
    fig.colorbar(mesh, ax=ax, label="envelope autocorrelation")
    if matrix.reject is not None and matrix.reject.any():
        ax.contour(
            matrix.lags_s, matrix.freqs, matrix.reject.astype(float),
            levels=[0.5], colors="k", linewidths=1.0,
        )
    ax.set_title(f"envelope LRTC over {matrix.n_units} units")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return os.fspath(path)
