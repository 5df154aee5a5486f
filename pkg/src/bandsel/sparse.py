"""Band selection by per-band self-excluding dictionaries and greedy pursuit.

Each band's sampled image vector is approximated as a sparse combination of
the other bands (its own atom is excluded to kill the identity solution).
Counting, per band, how many of those representations use it yields a weight
in [0, 1]; the highest-weighted bands are selected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .cube import HyperCube, flatten, sample_pixels
from .errors import InvalidArgumentError, InvalidDataError, NotOvercompleteError

__all__ = [
    "Dictionary",
    "SparseCoefficients",
    "SelectionResult",
    "build_dictionary",
    "omp",
    "solve_all",
    "band_weights",
    "select_bands",
    "mdsr_select",
]

# |x| below this counts as zero when tallying nonzero coefficients.
NONZERO_EPS = 1e-12

DEFAULT_N_PIXELS = 50
DEFAULT_SPARSITY = 6

WEIGHTING_MODES = ("count", "abs-sum")


@dataclass(frozen=True)
class Dictionary:
    """Sampled band matrix acting as an atom dictionary with one band excluded.

    `base` is the shared (n_pixels, bands) sample matrix; dictionaries for
    different excluded bands all reference the same array. The excluded
    band's effective atom is zero (enforced logically, the base is never
    modified).
    """

    base: np.ndarray
    excluded: int

    @property
    def n_atoms(self) -> int:
        return int(self.base.shape[1])

    @property
    def dim(self) -> int:
        return int(self.base.shape[0])

    def atom(self, j: int) -> np.ndarray:
        """Effective atom j (zeros for the excluded index)."""
        if not 0 <= j < self.n_atoms:
            raise InvalidArgumentError(f"atom index {j} outside [0, {self.n_atoms})")
        if j == self.excluded:
            return np.zeros(self.dim)
        return np.asarray(self.base[:, j], dtype=np.float64)


@dataclass(frozen=True)
class SparseCoefficients:
    """Result of one pursuit: chosen atoms, their coefficients, final error."""

    support: np.ndarray
    coeffs: np.ndarray
    residual_norm: float


@dataclass(frozen=True)
class SelectionResult:
    """Selected band indices (descending weight) plus the full weight vector."""

    selected: np.ndarray
    weights: np.ndarray
    method: str
    n_pixels: int
    sparsity: int
    seed: int
    weighting: str = "count"

    def to_json(self) -> str:
        payload = {
            "method": self.method,
            "selected": [int(i) for i in self.selected],
            "weights": [float(w) for w in self.weights],
            "n_pixels": int(self.n_pixels),
            "k0": int(self.sparsity),
            "seed": int(self.seed),
            "weighting": self.weighting,
        }
        return json.dumps(payload, indent=2) + "\n"


def _as_sample_matrix(yhat: np.ndarray) -> np.ndarray:
    yhat = np.asarray(yhat, dtype=np.float64)
    if yhat.ndim != 2:
        raise InvalidArgumentError("sample matrix must be 2-D (pixels x bands)")
    if not np.isfinite(yhat).all():
        raise InvalidDataError("sample matrix contains NaN or infinity")
    if yhat.shape[0] >= yhat.shape[1]:
        raise NotOvercompleteError(
            f"need fewer sampled pixels than bands to stay overcomplete, "
            f"got {yhat.shape[0]} pixels for {yhat.shape[1]} bands"
        )
    return yhat


def build_dictionary(yhat: np.ndarray, i: int) -> Dictionary:
    """Dictionary over the sampled bands with band i's atom zeroed out."""
    base = _as_sample_matrix(yhat)
    if not 0 <= i < base.shape[1]:
        raise InvalidArgumentError(f"band index {i} outside [0, {base.shape[1]})")
    return Dictionary(base=base, excluded=int(i))


def omp(d: Dictionary, y: np.ndarray, sparsity: int, tol: float = 0.0) -> SparseCoefficients:
    """Greedily pursue y over the dictionary, at most `sparsity` atoms.

    Per iteration the atom with the largest |correlation| against the
    current residual is added (correlations use L2-normalized atoms; ties
    break toward the lower index) and the coefficients are re-fit by least
    squares over the accumulated support, which keeps the residual
    orthogonal to every chosen atom. Stops at `sparsity` atoms, when the
    residual norm falls to `tol`, or when no atom is correlated with the
    residual anymore. A zero target returns an empty support.
    """
    if sparsity < 1:
        raise InvalidArgumentError("sparsity must be at least 1")
    if tol < 0:
        raise InvalidArgumentError("tol must be non-negative")
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != d.dim:
        raise InvalidArgumentError(
            f"target length {y.shape[0]} != dictionary dim {d.dim}"
        )
    if not np.isfinite(y).all():
        raise InvalidDataError("pursuit target contains NaN or infinity")
    atoms = np.ascontiguousarray(d.base.T)
    norms = np.sqrt(np.einsum("ij,ij->i", atoms, atoms))
    # A support larger than the pixel dimension cannot shrink the residual.
    max_atoms = min(int(sparsity), d.n_atoms, d.dim)
    support, coeffs, resid_norm = kernels.omp_solve(
        atoms, norms, y, d.excluded, max_atoms, float(tol)
    )
    return SparseCoefficients(support=support, coeffs=coeffs, residual_norm=resid_norm)


def solve_all(yhat: np.ndarray, sparsity: int, tol: float = 0.0) -> np.ndarray:
    """Pursue every band against its self-excluding dictionary.

    Returns the (bands, bands) coefficient matrix whose column i carries
    band i's coefficients scattered over the full band axis; the diagonal
    is exactly zero.
    """
    base = _as_sample_matrix(yhat)
    if sparsity < 1:
        raise InvalidArgumentError("sparsity must be at least 1")
    if tol < 0:
        raise InvalidArgumentError("tol must be non-negative")
    atoms = np.ascontiguousarray(base.T)
    norms = np.sqrt(np.einsum("ij,ij->i", atoms, atoms))
    max_atoms = min(int(sparsity), base.shape[1], base.shape[0])
    return kernels.omp_solve_all(atoms, norms, max_atoms, float(tol))


def band_weights(x: np.ndarray, mode: str = "count") -> np.ndarray:
    """Per-band weights from the coefficient matrix.

    "count" (the default) scores band j by the fraction of bands whose
    representation uses it: (nonzeros in row j) / bands, so every weight is
    a multiple of 1/bands in [0, 1]. "abs-sum" scores by the mean absolute
    coefficient in the row instead.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise InvalidArgumentError("coefficient matrix must be square")
    if mode not in WEIGHTING_MODES:
        raise InvalidArgumentError(f"unknown weighting mode {mode!r}")
    n_bands = x.shape[0]
    significant = np.abs(x) > NONZERO_EPS
    if mode == "count":
        return significant.sum(axis=1) / n_bands
    return np.where(significant, np.abs(x), 0.0).sum(axis=1) / n_bands


def select_bands(weights: np.ndarray, n_select: int) -> np.ndarray:
    """Indices of the n_select largest weights, descending; ties go to the
    lower band index."""
    weights = np.asarray(weights, dtype=np.float64).ravel()
    n_bands = weights.shape[0]
    if not 1 <= n_select <= n_bands:
        raise InvalidArgumentError(f"n_select={n_select} outside [1, {n_bands}]")
    order = np.lexsort((np.arange(n_bands), -weights))
    return order[:n_select].astype(np.int64)


def mdsr_select(
    cube: HyperCube,
    n_select: int,
    n_pixels: int = DEFAULT_N_PIXELS,
    sparsity: int = DEFAULT_SPARSITY,
    seed: int = 0,
    tol: float = 0.0,
    weighting: str = "count",
) -> SelectionResult:
    """Full selection pipeline on a cube.

    Flattens the cube, subsamples `n_pixels` pixels (seed-deterministic),
    solves all per-band pursuits at the given sparsity, weights the bands,
    and returns the top `n_select` by weight.
    """
    bm = flatten(cube)
    if n_pixels >= cube.bands:
        raise NotOvercompleteError(
            f"n_pixels={n_pixels} must be smaller than the band count {cube.bands}"
        )
    yhat = sample_pixels(bm, n_pixels, seed)
    x = solve_all(yhat, sparsity, tol)
    weights = band_weights(x, mode=weighting)
    selected = select_bands(weights, n_select)
    return SelectionResult(
        selected=selected,
        weights=weights,
        method="mdsr",
        n_pixels=n_pixels,
        sparsity=sparsity,
        seed=seed,
        weighting=weighting,
    )
