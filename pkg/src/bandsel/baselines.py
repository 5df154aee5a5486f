"""Compared unsupervised selectors: linear-prediction, orthogonal-subspace
projection, correlation clustering, and PCA feature extraction."""

from __future__ import annotations

import numpy as np
from scipy.cluster.hierarchy import linkage
from scipy.spatial.distance import squareform

from .errors import InvalidArgumentError
from .numerics import sym_eig

__all__ = [
    "abs_correlation_matrix",
    "lp_select",
    "osp_select",
    "cluster_select",
    "pca_fit",
    "pca_transform",
    "pca_extract",
]


def _check_band_matrix(bm, n: int, n_min: int = 1) -> np.ndarray:
    bm = np.asarray(bm, dtype=np.float64)
    if bm.ndim != 2:
        raise InvalidArgumentError("band matrix must be 2-D (pixels x bands)")
    if not n_min <= n <= bm.shape[1]:
        raise InvalidArgumentError(
            f"n={n} outside [{n_min}, {bm.shape[1]}] for {bm.shape[1]} bands"
        )
    return bm


def abs_correlation_matrix(bm) -> np.ndarray:
    """Pairwise |Pearson| between band columns, with degenerate handling.

    Zero-variance bands correlate 0 with everything else (distance 1 in the
    clustering sense); the diagonal is 1.
    """
    bm = np.asarray(bm, dtype=np.float64)
    centered = bm - bm.mean(axis=0)
    norms = np.sqrt(np.einsum("ij,ij->j", centered, centered))
    safe = np.where(norms > 0, norms, 1.0)
    corr = (centered.T @ centered) / np.outer(safe, safe)
    dead = norms == 0
    corr[dead, :] = 0.0
    corr[:, dead] = 0.0
    np.fill_diagonal(corr, 1.0)
    return np.clip(np.abs(corr), 0.0, 1.0)


def lp_select(bm, n: int, seed: int | None = None, init: str = "dissimilarity") -> np.ndarray:
    """Linear-prediction selection; returns bands in selection order.

    Starts from the pair of bands with the largest correlation distance
    (1 - |Pearson|), or a random pair when ``init="random"``. Each round
    fits every unselected band on the selected ones by least squares (with
    an intercept) and keeps the band that is predicted worst.
    """
    bm = _check_band_matrix(bm, n, n_min=2)
    n_pixels, n_bands = bm.shape
    if n_bands < 2:
        raise InvalidArgumentError("lp_select needs at least 2 bands")

    if init == "dissimilarity":
        distance = 1.0 - abs_correlation_matrix(bm)
        masked = np.where(np.triu(np.ones_like(distance, dtype=bool), k=1), distance, -1.0)
        flat = int(np.argmax(masked))
        first, second = divmod(flat, n_bands)
    elif init == "random":
        rng = np.random.default_rng(seed)
        first, second = np.sort(rng.choice(n_bands, size=2, replace=False))
    else:
        raise InvalidArgumentError(f"unknown lp init {init!r}")

    selected = [int(first), int(second)]
    remaining = [j for j in range(n_bands) if j not in selected]
    ones = np.ones((n_pixels, 1))
    while len(selected) < n:
        design = np.hstack([ones, bm[:, selected]])
        targets = bm[:, remaining]
        fit, *_ = np.linalg.lstsq(design, targets, rcond=None)
        errors = np.linalg.norm(targets - design @ fit, axis=0)
        pick = int(np.argmax(errors))
        selected.append(remaining.pop(pick))
    return np.asarray(selected, dtype=np.int64)


def osp_select(bm, n: int) -> np.ndarray:
    """Orthogonal-subspace-projection selection; returns selection order.

    Starts from the band with the largest L2 norm, then repeatedly adds the
    band whose component orthogonal to the span of the selected bands is
    largest.
    """
    bm = _check_band_matrix(bm, n)
    n_bands = bm.shape[1]
    norms = np.linalg.norm(bm, axis=0)
    selected = [int(np.argmax(norms))]
    remaining = [j for j in range(n_bands) if j != selected[0]]
    while len(selected) < n:
        basis = bm[:, selected]
        targets = bm[:, remaining]
        fit, *_ = np.linalg.lstsq(basis, targets, rcond=None)
        ortho = np.linalg.norm(targets - basis @ fit, axis=0)
        pick = int(np.argmax(ortho))
        selected.append(remaining.pop(pick))
    return np.asarray(selected, dtype=np.int64)


def cluster_select(bm, n: int) -> np.ndarray:
    """Hierarchical-clustering selection; returns one medoid per cluster.

    Bands are agglomerated under average linkage on the distance
    1 - |Pearson|, the merge sequence is cut after exactly bands - n merges,
    and each cluster contributes the band minimizing the summed distance to
    its co-members. Result is in ascending band order.
    """
    bm = _check_band_matrix(bm, n)
    n_bands = bm.shape[1]
    if n == n_bands:
        return np.arange(n_bands, dtype=np.int64)

    distance = 1.0 - abs_correlation_matrix(bm)
    np.fill_diagonal(distance, 0.0)
    merges = linkage(squareform(distance, checks=False), method="average")

    # Replay the first bands - n merges so we land on exactly n clusters
    # (threshold cuts can undershoot when merge heights tie).
    parent: dict[int, int] = {}
    for step in range(n_bands - n):
        a, b = int(merges[step, 0]), int(merges[step, 1])
        parent[a] = n_bands + step
        parent[b] = n_bands + step
    clusters: dict[int, list[int]] = {}
    for leaf in range(n_bands):
        root = leaf
        while root in parent:
            root = parent[root]
        clusters.setdefault(root, []).append(leaf)

    chosen = []
    for members in clusters.values():
        if len(members) == 1:
            chosen.append(members[0])
            continue
        sub = distance[np.ix_(members, members)]
        chosen.append(members[int(np.argmin(sub.sum(axis=1)))])
    return np.asarray(sorted(chosen), dtype=np.int64)


def pca_fit(bm, n: int):
    """Fit a PCA basis: per-band means plus the top-n covariance eigenvectors.

    Returns ``(means, components, eigenvalues)`` with components as columns,
    in descending eigenvalue order.
    """
    bm = _check_band_matrix(bm, n)
    if bm.shape[0] < 2:
        raise InvalidArgumentError("pca needs at least two pixels")
    means = bm.mean(axis=0)
    centered = bm - means
    cov = (centered.T @ centered) / (bm.shape[0] - 1)
    pairs = sym_eig(cov, n)
    components = np.column_stack([p.vector for p in pairs])
    eigenvalues = np.array([p.value for p in pairs])
    return means, components, eigenvalues


def pca_transform(bm, means, components) -> np.ndarray:
    return (np.asarray(bm, dtype=np.float64) - means) @ components


def pca_extract(bm, n: int) -> np.ndarray:
    """Project pixels onto the top-n principal components of the band covariance."""
    means, components, _ = pca_fit(bm, n)
    return pca_transform(bm, means, components)
