"""Classification-based evaluation of band selections.

The protocol: draw a stratified training sample (fixed count per class),
classify the remaining labeled pixels with KNN on the selected bands, and
score overall accuracy plus Cohen's kappa; repeat over trials with shifted
seeds and average. External classifiers are supported by importing their
predictions and scoring them the same way.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from . import baselines, kernels
from .cube import GroundTruth, HyperCube, flatten, sample_pixels
from .errors import (
    CorruptFileError,
    DegenerateInputError,
    InsufficientClassSamplesError,
    InvalidArgumentError,
)
from .sparse import band_weights, select_bands, solve_all

__all__ = [
    "LabeledSplit",
    "SelectorConfig",
    "TrialResult",
    "EvaluationReport",
    "stratified_split",
    "knn_classify",
    "confusion_matrix",
    "oca",
    "kappa",
    "avg_band_correlation",
    "keep_top_classes",
    "run_trials",
    "evaluate_predictions",
    "load_predictions_csv",
]

METHODS = ("mdsr", "lp", "osp", "cluster", "pca")


@dataclass(frozen=True)
class LabeledSplit:
    """Disjoint train/test pixel indices covering all labeled pixels."""

    train_indices: np.ndarray
    test_indices: np.ndarray


def stratified_split(gt: GroundTruth, per_class: int = 20, seed: int = 0) -> LabeledSplit:
    """Draw `per_class` training pixels per class uniformly, rest is test."""
    if per_class < 1:
        raise InvalidArgumentError("per_class must be positive")
    classes = gt.classes
    if classes.size == 0:
        raise InvalidArgumentError("ground truth has no labeled pixels")
    rng = np.random.default_rng(seed)
    train = []
    for cls in classes:
        pixels = np.flatnonzero(gt.labels == cls)
        if pixels.size <= per_class:
            raise InsufficientClassSamplesError(
                f"class {int(cls)} has {pixels.size} labeled pixels, "
                f"needs more than {per_class}"
            )
        train.append(rng.choice(pixels, size=per_class, replace=False))
    train_idx = np.sort(np.concatenate(train))
    labeled = gt.labeled_indices()
    test_idx = np.setdiff1d(labeled, train_idx, assume_unique=True)
    return LabeledSplit(train_indices=train_idx, test_indices=test_idx)


def knn_classify(train_x, train_y, test_x, k: int) -> np.ndarray:
    """Euclidean majority-vote KNN (see kernels.knn_predict for tie rules)."""
    train_x = np.asarray(train_x, dtype=np.float64)
    test_x = np.asarray(test_x, dtype=np.float64)
    train_y = np.asarray(train_y)
    if train_x.ndim != 2 or test_x.ndim != 2:
        raise InvalidArgumentError("feature matrices must be 2-D")
    if train_x.shape[0] == 0:
        raise InvalidArgumentError("empty training set")
    if train_x.shape[1] != test_x.shape[1]:
        raise InvalidArgumentError(
            f"feature width mismatch: train {train_x.shape[1]}, test {test_x.shape[1]}"
        )
    if train_y.shape != (train_x.shape[0],):
        raise InvalidArgumentError("train_y length must match training rows")
    if not 1 <= k <= train_x.shape[0]:
        raise InvalidArgumentError(f"k={k} outside [1, {train_x.shape[0]}]")
    if test_x.shape[0] == 0:
        return np.empty(0, dtype=train_y.dtype)
    classes, dense = np.unique(train_y, return_inverse=True)
    pred = kernels.knn_predict(train_x, dense.astype(np.int64), test_x, k, classes.size)
    return classes[pred]


def confusion_matrix(y_true, y_pred, classes) -> np.ndarray:
    """Counts with rows = true class, columns = predicted class."""
    classes = np.asarray(classes)
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise InvalidArgumentError("prediction length must match truth length")
    lookup = {int(c): i for i, c in enumerate(classes)}
    cm = np.zeros((classes.size, classes.size), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        try:
            cm[lookup[int(t)], lookup[int(p)]] += 1
        except KeyError as exc:
            raise InvalidArgumentError(f"label {exc} not in the evaluated class set") from exc
    return cm


def _check_cm(cm) -> np.ndarray:
    cm = np.asarray(cm, dtype=np.float64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise InvalidArgumentError("confusion matrix must be square")
    if cm.sum() <= 0:
        raise InvalidArgumentError("confusion matrix has no counts")
    return cm


def oca(cm) -> float:
    """Overall classification accuracy: trace over total."""
    cm = _check_cm(cm)
    return float(np.trace(cm) / cm.sum())


def kappa(cm) -> float:
    """Cohen's kappa: chance-corrected agreement between truth and prediction."""
    cm = _check_cm(cm)
    total = cm.sum()
    p_obs = np.trace(cm) / total
    p_exp = float(cm.sum(axis=1) @ cm.sum(axis=0)) / (total * total)
    if p_exp >= 1.0:
        # All mass in a single diagonal cell: perfect by construction.
        return 1.0
    return float((p_obs - p_exp) / (1.0 - p_exp))


def avg_band_correlation(bm, indices) -> float:
    """Mean |Pearson| over all pairs of the selected bands."""
    bm = np.asarray(bm, dtype=np.float64)
    idx = np.asarray(indices, dtype=np.int64).ravel()
    if idx.size < 2:
        raise InvalidArgumentError("need at least two selected bands")
    if np.unique(idx).size != idx.size:
        raise InvalidArgumentError("selected band indices must be unique")
    cols = bm[:, idx]
    centered = cols - cols.mean(axis=0)
    norms = np.sqrt(np.einsum("ij,ij->j", centered, centered))
    if (norms == 0).any():
        dead = idx[norms == 0]
        raise DegenerateInputError(f"constant band(s) in selection: {dead.tolist()}")
    corr = (centered.T @ centered) / np.outer(norms, norms)
    upper = np.triu_indices(idx.size, k=1)
    return float(np.clip(np.abs(corr[upper]), 0.0, 1.0).mean())


def keep_top_classes(gt: GroundTruth, n_classes: int) -> GroundTruth:
    """Zero out labels outside the `n_classes` most populous classes.

    Population ties break toward the lower class label. Used for datasets
    evaluated on a subset of their annotated classes.
    """
    classes = gt.classes
    if not 1 <= n_classes <= classes.size:
        raise InvalidArgumentError(
            f"n_classes={n_classes} outside [1, {classes.size}]"
        )
    counts = np.array([(gt.labels == c).sum() for c in classes])
    order = np.lexsort((classes, -counts))
    keep = set(int(classes[i]) for i in order[:n_classes])
    labels = np.where(np.isin(gt.labels, list(keep)), gt.labels, 0)
    return GroundTruth(
        width=gt.width, height=gt.height, labels=labels, class_names=gt.class_names
    )


@dataclass(frozen=True)
class SelectorConfig:
    """How bands (or components) are chosen inside the evaluation harness."""

    method: str = "mdsr"
    n_pixels: int = 50
    sparsity: int = 6
    weighting: str = "count"
    tol: float = 0.0
    use_full_pixels: bool = False
    lp_init: str = "dissimilarity"

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidArgumentError(
                f"unknown method {self.method!r}, expected one of {METHODS}"
            )


@dataclass(frozen=True)
class TrialResult:
    n_select: int
    trial: int
    seed: int
    oca: float
    kappa: float
    selected: tuple[int, ...] | None
    band_correlation: float | None


@dataclass(frozen=True)
class EvaluationReport:
    """Per-trial scores plus per-n aggregates for one selector."""

    method: str
    grid: tuple[int, ...]
    trials: int
    per_class: int
    knn_k: int
    base_seed: int
    results: tuple[TrialResult, ...]

    def trials_for(self, n_select: int) -> list[TrialResult]:
        return [r for r in self.results if r.n_select == n_select]

    def aggregates(self) -> list[dict]:
        rows = []
        for n in self.grid:
            per_trial = self.trials_for(n)
            ocas = np.array([r.oca for r in per_trial])
            kappas = np.array([r.kappa for r in per_trial])
            corrs = [r.band_correlation for r in per_trial if r.band_correlation is not None]
            rows.append(
                {
                    "n_select": int(n),
                    "mean_oca": float(np.mean(ocas)),
                    "std_oca": float(np.std(ocas)),
                    "mean_kappa": float(np.mean(kappas)),
                    "std_kappa": float(np.std(kappas)),
                    "mean_band_correlation": float(np.mean(corrs)) if corrs else None,
                }
            )
        return rows

    def to_json(self) -> str:
        payload = {
            "method": self.method,
            "note": "band indices are 0-based",
            "grid": [int(n) for n in self.grid],
            "trials": self.trials,
            "per_class": self.per_class,
            "knn_k": self.knn_k,
            "base_seed": self.base_seed,
            "aggregates": self.aggregates(),
            "results": [
                {
                    "n_select": r.n_select,
                    "trial": r.trial,
                    "seed": r.seed,
                    "oca": r.oca,
                    "kappa": r.kappa,
                    "selected": list(r.selected) if r.selected is not None else None,
                    "band_correlation": r.band_correlation,
                }
                for r in self.results
            ],
        }
        return json.dumps(payload, indent=2) + "\n"

    def csv_rows(self) -> list[tuple]:
        """Flat rows (method, n_select, trial, oca, kappa) for curve plotting."""
        return [
            (self.method, r.n_select, r.trial, r.oca, r.kappa) for r in self.results
        ]


def _trial_selections(bm: np.ndarray, selector: SelectorConfig, grid, seed: int):
    """Per-n band selections (or a PCA basis) for one trial's seed."""
    n_bands = bm.shape[1]
    n_max = max(grid)
    if selector.use_full_pixels:
        source = bm
    else:
        if selector.n_pixels > bm.shape[0]:
            raise InvalidArgumentError(
                f"n_pixels={selector.n_pixels} exceeds the {bm.shape[0]} available pixels"
            )
        source = sample_pixels(bm, selector.n_pixels, seed)

    if selector.method == "mdsr":
        x = solve_all(source, selector.sparsity, selector.tol)
        weights = band_weights(x, mode=selector.weighting)
        return {n: select_bands(weights, n) for n in grid}, None
    if selector.method == "lp":
        if min(grid) < 2:
            raise InvalidArgumentError("lp selection needs n_select >= 2")
        order = baselines.lp_select(source, n_max, seed=seed, init=selector.lp_init)
        return {n: order[:n] for n in grid}, None
    if selector.method == "osp":
        order = baselines.osp_select(source, n_max)
        return {n: order[:n] for n in grid}, None
    if selector.method == "cluster":
        return {n: baselines.cluster_select(source, n) for n in grid}, None
    # pca: fit the basis on the same source pixels, project everything later
    means, components, _ = baselines.pca_fit(source, n_max)
    if n_bands != components.shape[0]:
        raise InvalidArgumentError("pca basis width mismatch")
    return None, (means, components)


def run_trials(
    cube: HyperCube,
    gt: GroundTruth,
    selector: SelectorConfig,
    grid,
    knn_k: int,
    trials: int = 10,
    base_seed: int = 0,
    per_class: int = 20,
) -> EvaluationReport:
    """Evaluate one selector over a band-count grid with repeated trials.

    Trial t reuses seed base_seed + t for both the pixel subsample feeding
    the selector and the stratified split, so every trial is independently
    reproducible and different selectors see identical splits.
    """
    grid = tuple(int(n) for n in grid)
    if len(grid) == 0:
        raise InvalidArgumentError("empty n_select grid")
    if len(set(grid)) != len(grid):
        raise InvalidArgumentError("duplicate values in n_select grid")
    if min(grid) < 1 or max(grid) > cube.bands:
        raise InvalidArgumentError(
            f"grid values must lie in [1, {cube.bands}]"
        )
    if trials < 1:
        raise InvalidArgumentError("trials must be positive")
    if (gt.width, gt.height) != (cube.width, cube.height):
        raise InvalidArgumentError("ground truth dimensions do not match the cube")

    bm = flatten(cube)
    results = []
    for trial in range(trials):
        seed = base_seed + trial
        selections, pca_basis = _trial_selections(bm, selector, grid, seed)
        split = stratified_split(gt, per_class=per_class, seed=seed)
        train_y = gt.labels[split.train_indices]
        test_y = gt.labels[split.test_indices]
        classes = gt.classes
        for n in grid:
            if pca_basis is not None:
                means, components = pca_basis
                feats = baselines.pca_transform(bm, means, components[:, :n])
                selected = None
                corr = None
            else:
                sel = selections[n]
                feats = bm[:, sel]
                selected = tuple(int(i) for i in sel)
                corr = (
                    avg_band_correlation(bm, sel) if len(sel) >= 2 else None
                )
            pred = knn_classify(
                feats[split.train_indices], train_y, feats[split.test_indices], knn_k
            )
            cm = confusion_matrix(test_y, pred, classes)
            results.append(
                TrialResult(
                    n_select=int(n),
                    trial=trial,
                    seed=seed,
                    oca=oca(cm),
                    kappa=kappa(cm),
                    selected=selected,
                    band_correlation=corr,
                )
            )
    return EvaluationReport(
        method=selector.method,
        grid=grid,
        trials=trials,
        per_class=per_class,
        knn_k=knn_k,
        base_seed=base_seed,
        results=tuple(results),
    )


def evaluate_predictions(gt: GroundTruth, split: LabeledSplit, predictions):
    """Score externally produced predictions for the split's test pixels.

    Returns ``(confusion, oca, kappa)``.
    """
    predictions = np.asarray(predictions)
    if predictions.shape != (split.test_indices.size,):
        raise InvalidArgumentError(
            f"got {predictions.size} predictions for {split.test_indices.size} test pixels"
        )
    truth = gt.labels[split.test_indices]
    cm = confusion_matrix(truth, predictions, gt.classes)
    return cm, oca(cm), kappa(cm)


def load_predictions_csv(path, split: LabeledSplit) -> np.ndarray:
    """Read ``test_pixel_index,predicted_label`` rows aligned to the split."""
    by_pixel: dict[int, int] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != [
            "test_pixel_index",
            "predicted_label",
        ]:
            raise CorruptFileError(
                f"{path}: expected CSV header 'test_pixel_index,predicted_label'"
            )
        for row in reader:
            if not row:
                continue
            try:
                by_pixel[int(row[0])] = int(row[1])
            except (IndexError, ValueError) as exc:
                raise CorruptFileError(f"{path}: malformed row {row!r}") from exc
    wanted = set(int(i) for i in split.test_indices)
    if set(by_pixel) != wanted:
        missing = sorted(wanted - set(by_pixel))[:5]
        extra = sorted(set(by_pixel) - wanted)[:5]
        raise InvalidArgumentError(
            f"prediction pixel set does not match the split "
            f"(missing {missing}..., unexpected {extra}...)"
        )
    return np.array([by_pixel[int(i)] for i in split.test_indices])
