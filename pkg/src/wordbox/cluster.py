"""Two-cluster Lloyd iteration on scalar data."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 0.5
DEFAULT_MAX_ITER = 100


class DegenerateInput(ValueError):
    """All values are equal, so there is nothing to split."""


class EmptyInput(ValueError):
    """Fewer than two values."""


@dataclass(frozen=True)
class TwoMeansResult:
    centroid_lo: float
    centroid_hi: float
    labels: np.ndarray  # 0 = lo cluster, 1 = hi cluster
    iterations: int


def assign(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Nearest-centroid labels; a value equidistant from both goes to ``lo``."""
    return (np.abs(values - hi) < np.abs(values - lo)).astype(np.int8)


def two_means_1d(values, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> TwoMeansResult:
    """Split ``values`` into a low and a high cluster.

    Centroids start at the minimum and maximum. Iteration stops once both
    centroids move less than ``tol`` *and* the assignment no longer changes,
    so the returned labels and centroids are a fixed point of one more Lloyd
    step. ``max_iter`` caps the loop regardless.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size < 2:
        raise EmptyInput(f"need at least 2 values, got {x.size}")
    vmin, vmax = float(x.min()), float(x.max())
    if not vmax > vmin:
        raise DegenerateInput(f"all {x.size} values equal {vmin}")

    lo, hi = vmin, vmax
    labels = assign(x, lo, hi)
    it = 0
    while it < max_iter:
        it += 1
        # min always lands in lo and max in hi, so neither cluster empties
        new_lo = float(x[labels == 0].mean())
        new_hi = float(x[labels == 1].mean())
        moved = max(abs(new_lo - lo), abs(new_hi - hi))
        lo, hi = new_lo, new_hi
        new_labels = assign(x, lo, hi)
        stable = np.array_equal(new_labels, labels)
        labels = new_labels
        if stable and moved < tol:
            break
    return TwoMeansResult(lo, hi, labels, it)
