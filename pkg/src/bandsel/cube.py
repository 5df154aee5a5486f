"""Hyperspectral cube data model, flattening, sampling, and synthetic cubes.

Conventions used everywhere in this package:

* A cube stores its samples band-sequentially: `data` has shape
  ``(bands, height * width)`` with pixels in row-major order, so
  ``data.ravel()`` is the canonical band-sequential sample vector.
* A "band matrix" is a plain ndarray of shape ``(n_pixels, bands)`` whose
  column j is the image vector of band j. All selectors operate on it.
* Band indices are 0-based on every machine interface; printed tables are
  1-based and say so.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, InvalidDataError

__all__ = [
    "HyperCube",
    "GroundTruth",
    "SynthSpec",
    "flatten",
    "unflatten",
    "sample_pixels",
    "restrict_bands",
    "synth_cube",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    view = a.view()
    view.flags.writeable = False
    return view


@dataclass(frozen=True)
class HyperCube:
    """A width x height x bands radiance cube with optional band metadata.

    `data` is ``(bands, height * width)`` float32; values pass through
    loading unscaled. Instances are immutable and safe to share between
    workers.
    """

    width: int
    height: int
    data: np.ndarray
    wavelengths: np.ndarray | None = None
    band_names: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidArgumentError("cube dimensions must be positive")
        data = np.asarray(self.data, dtype=np.float32)
        if data.ndim != 2:
            raise InvalidArgumentError("cube data must be (bands, n_pixels)")
        if data.shape[0] < 1:
            raise InvalidArgumentError("cube must have at least one band")
        if data.shape[1] != self.width * self.height:
            raise InvalidArgumentError(
                f"cube data has {data.shape[1]} pixels per band, "
                f"expected {self.width * self.height}"
            )
        if not np.isfinite(data).all():
            raise InvalidDataError("cube samples contain NaN or infinity")
        object.__setattr__(self, "data", _readonly(data))
        if self.wavelengths is not None:
            wl = np.asarray(self.wavelengths, dtype=np.float64)
            if wl.shape != (data.shape[0],):
                raise InvalidArgumentError("wavelengths length must equal band count")
            if not (np.diff(wl) > 0).all():
                raise InvalidArgumentError("wavelengths must be strictly increasing")
            object.__setattr__(self, "wavelengths", _readonly(wl))
        if self.band_names is not None:
            names = tuple(str(n) for n in self.band_names)
            if len(names) != data.shape[0]:
                raise InvalidArgumentError("band_names length must equal band count")
            object.__setattr__(self, "band_names", names)

    @property
    def bands(self) -> int:
        return int(self.data.shape[0])

    @property
    def n_pixels(self) -> int:
        return int(self.width * self.height)

    @property
    def samples(self) -> np.ndarray:
        """Band-sequential sample vector of length width*height*bands."""
        return self.data.ravel()


@dataclass(frozen=True)
class GroundTruth:
    """Per-pixel class labels matching a cube's spatial grid; 0 = unlabeled."""

    width: int
    height: int
    labels: np.ndarray
    class_names: dict[int, str] | None = None

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidArgumentError("ground truth dimensions must be positive")
        labels = np.asarray(self.labels, dtype=np.int32)
        if labels.shape != (self.width * self.height,):
            raise InvalidArgumentError(
                f"labels length {labels.size} != width*height {self.width * self.height}"
            )
        if labels.min(initial=0) < 0:
            raise InvalidArgumentError("labels must be non-negative")
        object.__setattr__(self, "labels", _readonly(labels))

    @property
    def classes(self) -> np.ndarray:
        """Sorted distinct nonzero labels."""
        return np.unique(self.labels[self.labels > 0])

    def labeled_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labels > 0)


def flatten(cube: HyperCube) -> np.ndarray:
    """Return the (n_pixels, bands) band matrix of a cube as float64."""
    return cube.data.T.astype(np.float64)


def unflatten(
    matrix: np.ndarray,
    width: int,
    height: int,
    wavelengths: np.ndarray | None = None,
    band_names: tuple[str, ...] | None = None,
) -> HyperCube:
    """Inverse of :func:`flatten`: rebuild a cube from a band matrix."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != width * height:
        raise InvalidArgumentError("matrix rows must equal width*height")
    return HyperCube(
        width=width,
        height=height,
        data=np.ascontiguousarray(matrix.T),
        wavelengths=wavelengths,
        band_names=band_names,
    )


def sample_pixels(bm: np.ndarray, n: int, seed: int) -> np.ndarray:
    """Draw n distinct rows of a band matrix uniformly, without replacement.

    The draw is deterministic for a given seed and the returned rows keep
    ascending original-row order.
    """
    bm = np.asarray(bm)
    rows = bm.shape[0]
    if not 1 <= n <= rows:
        raise InvalidArgumentError(f"sample_pixels: n={n} outside [1, {rows}]")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(rows, size=n, replace=False))
    return bm[idx]


def restrict_bands(cube: HyperCube, indices) -> HyperCube:
    """Keep only the given bands, in the given order.

    Wavelength metadata is carried over only when the restricted sequence is
    still strictly increasing (ascending index selections); otherwise it is
    dropped. Band names always follow the selection.
    """
    idx = np.asarray(indices, dtype=np.int64).ravel()
    if idx.size == 0:
        raise InvalidArgumentError("restrict_bands: empty index list")
    if np.unique(idx).size != idx.size:
        raise InvalidArgumentError("restrict_bands: duplicate band index")
    if idx.min() < 0 or idx.max() >= cube.bands:
        raise InvalidArgumentError(
            f"restrict_bands: index out of range [0, {cube.bands})"
        )
    wavelengths = None
    if cube.wavelengths is not None:
        wl = cube.wavelengths[idx]
        if (np.diff(wl) > 0).all():
            wavelengths = wl
    names = None
    if cube.band_names is not None:
        names = tuple(cube.band_names[i] for i in idx)
    return HyperCube(
        width=cube.width,
        height=cube.height,
        data=np.ascontiguousarray(cube.data[idx]),
        wavelengths=wavelengths,
        band_names=names,
    )


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic labeled cube with a known low-rank structure.

    Every pixel draws a latent spectrum (its class mean plus Gaussian noise
    of scale `noise_sigma`); output bands are then either exact copies of
    latent bands ("duplicate": band j copies latent j mod latent_bands) or
    non-negative random mixtures of them ("mix"). Either way the generated
    band matrix has exactly `latent_bands` generator directions.
    """

    width: int
    height: int
    classes: int
    latent_bands: int
    bands: int
    mixing: str = "duplicate"
    noise_sigma: float = 0.0
    class_means: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.classes < 2:
            raise InvalidArgumentError("synth spec needs at least 2 classes")
        if self.latent_bands < 1:
            raise InvalidArgumentError("synth spec needs at least 1 latent band")
        if self.bands < self.latent_bands:
            raise InvalidArgumentError("bands must be >= latent_bands")
        if self.mixing not in ("duplicate", "mix"):
            raise InvalidArgumentError(f"unknown mixing mode {self.mixing!r}")
        if self.noise_sigma < 0:
            raise InvalidArgumentError("noise_sigma must be non-negative")
        if self.class_means is not None:
            means = np.asarray(self.class_means, dtype=np.float64)
            if means.shape != (self.classes, self.latent_bands):
                raise InvalidArgumentError(
                    "class_means must have shape (classes, latent_bands)"
                )
            object.__setattr__(self, "class_means", means)


def synth_cube(spec: SynthSpec, seed: int) -> tuple[HyperCube, GroundTruth]:
    """Generate a deterministic labeled cube from a :class:`SynthSpec`.

    Labels are a balanced random assignment covering all classes (1-based;
    no unlabeled pixels).
    """
    rng = np.random.default_rng(seed)
    n_pix = spec.width * spec.height
    g = spec.latent_bands

    means = spec.class_means
    if means is None:
        # Random baseline plus a unit bump on a per-class coordinate keeps
        # classes well separated and spans min(classes, latent_bands) strongly.
        means = rng.uniform(0.2, 0.8, size=(spec.classes, g))
        means[np.arange(spec.classes), np.arange(spec.classes) % g] += 1.0

    labels = 1 + (rng.permutation(n_pix) % spec.classes)
    latent = means[labels - 1]
    if spec.noise_sigma > 0:
        latent = latent + rng.normal(0.0, spec.noise_sigma, size=latent.shape)

    if spec.mixing == "duplicate":
        bands = latent[:, np.arange(spec.bands) % g]
    else:
        mix = rng.uniform(0.0, 1.0, size=(spec.bands, g))
        bands = latent @ mix.T

    cube = HyperCube(
        width=spec.width,
        height=spec.height,
        data=np.ascontiguousarray(bands.T.astype(np.float32)),
    )
    gt = GroundTruth(width=spec.width, height=spec.height, labels=labels)
    return cube, gt
