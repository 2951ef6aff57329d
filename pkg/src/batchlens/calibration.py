"""Pivot calibration from a population of complexity values.

One-dimensional density clustering locates the bulk of the complexity
distribution; the pivot is the smallest value inside the largest cluster.
Scores are later centered on this pivot, so it anchors the dividing line
between "easy" and "hard" samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

NOISE = -1


@dataclass
class CalibrationResult:
    labels: np.ndarray
    largest_cluster: int
    pivot: float
    params: tuple[float, int]


def dbscan_1d(values, eps: float, min_pts: int) -> np.ndarray:
    """Density clustering on the real line.

    A point is a core point when at least `min_pts` values (itself included)
    lie within `eps` of it. Clusters are connected components of core points;
    a non-core point within eps of a core joins that core's cluster (ties go
    to the cluster of the smallest such core). Everything else is NOISE (-1).

    Cluster ids are assigned in ascending order of cluster minimum, so the
    labeling is invariant to input permutation.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("values must be a nonempty 1-D sequence")
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if min_pts < 1:
        raise ValueError(f"min_pts must be at least 1, got {min_pts}")

    n = v.size
    adjacent = np.abs(v[:, None] - v[None, :]) <= eps
    core = adjacent.sum(axis=1) >= min_pts

    labels = np.full(n, NOISE, dtype=np.int64)
    core_idx = np.flatnonzero(core)
    if core_idx.size == 0:
        return labels

    core_adj = adjacent[np.ix_(core_idx, core_idx)]
    n_comp, comp = connected_components(csr_matrix(core_adj), directed=False)
    labels[core_idx] = comp

    # Border points: non-core within eps of a core; smallest core wins.
    border_idx = np.flatnonzero(~core)
    if border_idx.size:
        near_core = adjacent[np.ix_(border_idx, core_idx)]
        for b, row in zip(border_idx, near_core):
            hits = np.flatnonzero(row)
            if hits.size:
                k = hits[np.argmin(v[core_idx[hits]])]
                labels[b] = comp[k]

    # Relabel components by ascending cluster minimum.
    mins = [v[labels == c].min() for c in range(n_comp)]
    rank = np.argsort(np.argsort(mins, kind="stable"), kind="stable")
    remapped = labels.copy()
    for c in range(n_comp):
        remapped[labels == c] = rank[c]
    return remapped


def default_min_pts(n: int) -> int:
    return max(3, math.ceil(0.01 * n))


def estimate_pivot(values, eps: float = 0.05, min_pts: int | None = None) -> CalibrationResult:
    """Calibrate the pivot from a population of normalized complexity values.

    The pivot is the minimum value inside the largest cluster (ties between
    equally large clusters go to the one with the smaller minimum). When
    clustering degenerates to all-noise the median is used instead. The pivot
    is intentionally not the mean of the distribution.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("values must be a nonempty 1-D sequence")
    if min_pts is None:
        min_pts = default_min_pts(v.size)
    labels = dbscan_1d(v, eps, min_pts)
    cluster_ids = np.unique(labels[labels != NOISE])
    if cluster_ids.size == 0:
        return CalibrationResult(labels=labels, largest_cluster=NOISE,
                                 pivot=float(np.median(v)), params=(eps, min_pts))
    best = None
    for cid in cluster_ids:
        members = v[labels == cid]
        key = (-members.size, float(members.min()))
        if best is None or key < best[0]:
            best = (key, int(cid), float(members.min()))
    return CalibrationResult(labels=labels, largest_cluster=best[1],
                             pivot=best[2], params=(eps, min_pts))
