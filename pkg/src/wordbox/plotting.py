"""Figures for the ``inspect`` and ``score`` reports, written straight to files."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evalharness import ScoreReport  # noqa: E402
from .profilenorm import BandDetection  # noqa: E402

TEXT_COLOR = "#c0392b"
PAPER_COLOR = "#7f8c8d"


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata so repeated runs write identical files
    fig.savefig(path, dpi=120, metadata={"Software": None} if path.suffix == ".png" else None)
    plt.close(fig)
    return path


def plot_band_detection(img: np.ndarray, found: BandDetection, path, title: str | None = None) -> Path:
    """Box on the left, its row profile on the right with cluster labels and the band."""
    h = img.shape[0]
    fig, (ax_img, ax_prof) = plt.subplots(
        1, 2, figsize=(8, 3), gridspec_kw={"width_ratios": [3, 1]}, sharey=True)
    ax_img.imshow(img, cmap="gray", vmin=0, vmax=255, aspect="auto", interpolation="nearest")
    ax_img.set_xlabel("column")
    ax_img.set_ylabel("row")

    rows = np.arange(h)
    ax_prof.plot(found.profile, rows, color="black", lw=1)
    if found.labels is not None and found.text_label is not None:
        is_text = found.labels == found.text_label
        ax_prof.scatter(found.profile[is_text], rows[is_text], s=10, color=TEXT_COLOR, label="text rows")
        ax_prof.scatter(found.profile[~is_text], rows[~is_text], s=10, color=PAPER_COLOR, label="background rows")
    ax_prof.axvline(found.background, color=PAPER_COLOR, ls=":", lw=1)
    if found.band is not None:
        for ax in (ax_img, ax_prof):
            ax.axhspan(found.band.top_row - 0.5, found.band.bottom_row + 0.5, color=TEXT_COLOR, alpha=0.15)
    ax_prof.set_xlim(0, 255)
    ax_prof.set_xlabel("row mean")
    if found.text_label is not None:
        ax_prof.legend(loc="lower right", fontsize=7, frameon=False)
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    return _save(fig, path)


def plot_curve(rows: list[tuple[int, ScoreReport, str]], path, metric: str = "word_accuracy") -> Path:
    """Metric versus training-set size, one line per variant."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for variant in sorted({r[2] for r in rows}):
        pts = sorted((size, getattr(rep, metric)) for size, rep, v in rows if v == variant)
        pts = [(s, y) for s, y in pts if y is not None]
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, ys, marker="o", label=variant)
    ax.set_xlabel("training samples")
    ax.set_ylabel(metric.replace("_", " "))
    ax.grid(alpha=0.3)
    if ax.get_lines():
        ax.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, path)
