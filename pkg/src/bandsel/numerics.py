"""Dense linear-algebra helpers: least squares, symmetric eigenpairs, Pearson.

All functions accept plain numpy arrays (row-major, float) and are pure, so
they can be called concurrently without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidArgumentError

__all__ = ["EigenPair", "least_squares", "sym_eig", "pearson"]


@dataclass(frozen=True)
class EigenPair:
    """One eigenvalue with its unit-norm eigenvector."""

    value: float
    vector: np.ndarray


def least_squares(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimize ||a @ x - b||_2 and return x.

    Rank-deficient systems are handled by returning the minimum-norm
    minimizer (SVD-based solve), which keeps near-collinear band columns
    from blowing up coefficients.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2:
        raise InvalidArgumentError("least_squares: 'a' must be a 2-D matrix")
    if b.shape[0] != a.shape[0]:
        raise InvalidArgumentError(
            f"least_squares: got {a.shape[0]} rows but {b.shape[0]} targets"
        )
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    return x


def sym_eig(s: np.ndarray, k: int) -> list[EigenPair]:
    """Return the k largest eigenpairs of a symmetric matrix, descending.

    Parameters
    ----------
    s : square symmetric matrix (checked within 1e-10 relative).
    k : number of eigenpairs, 1 <= k <= n.

    The eigenvector sign is normalized so the largest-magnitude entry is
    positive, which keeps downstream comparisons stable.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise InvalidArgumentError("sym_eig: matrix must be square")
    n = s.shape[0]
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"sym_eig: k={k} outside [1, {n}]")
    scale = np.abs(s).max()
    if scale > 0 and np.abs(s - s.T).max() > 1e-10 * scale:
        raise InvalidArgumentError("sym_eig: matrix is not symmetric")

    values, vectors = np.linalg.eigh((s + s.T) / 2.0)
    order = np.argsort(values)[::-1][:k]
    pairs = []
    for idx in order:
        vec = vectors[:, idx].copy()
        if vec[np.argmax(np.abs(vec))] < 0:
            vec = -vec
        pairs.append(EigenPair(value=float(values[idx]), vector=vec))
    return pairs


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson correlation coefficient of two equal-length vectors."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise InvalidArgumentError("pearson: vectors must have equal length")
    if x.size < 2:
        raise InvalidArgumentError("pearson: need at least two samples")
    xc = x - x.mean()
    yc = y - y.mean()
    vx = float(xc @ xc)
    vy = float(yc @ yc)
    if vx == 0.0 or vy == 0.0:
        raise DegenerateInputError("pearson: zero-variance input")
    r = float(xc @ yc) / np.sqrt(vx * vy)
    # Rounding can push |r| a hair past 1 for collinear inputs.
    return float(min(1.0, max(-1.0, r)))
