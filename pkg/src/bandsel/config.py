"""Declarative run configuration (YAML) for the command-line tools.

A config file is validated completely before any work starts: section and
key names are checked against the schema, values are type-checked, and
every referenced file must already exist. Relative paths resolve against
the config file's directory, so shipped presets work from anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .cube import SynthSpec
from .errors import InvalidArgumentError
from .evaluate import METHODS, SelectorConfig

__all__ = ["RunConfig", "load_config"]

_SECTIONS = {"dataset", "selector", "evaluate", "compare", "sweep", "synth", "output", "seed"}
_DATASET_KEYS = {"cube", "format", "ground_truth", "exclude_bands", "top_classes"}
_SELECTOR_KEYS = {
    "method",
    "n_pixels",
    "sparsity",
    "weighting",
    "tol",
    "n_select",
    "use_full_pixels",
    "lp_init",
}
_EVAL_KEYS = {"per_class", "trials", "knn_k", "grid"}
_COMPARE_KEYS = {"methods"}
_SWEEP_KEYS = {"parameter", "values"}
_SYNTH_KEYS = {
    "width",
    "height",
    "classes",
    "latent_bands",
    "bands",
    "mixing",
    "noise_sigma",
    "class_means",
}
_SWEEPABLE = ("n_pixels", "sparsity")


def _require_mapping(value, name: str) -> dict:
    if not isinstance(value, dict):
        raise InvalidArgumentError(f"config section {name!r} must be a mapping")
    return value


def _check_keys(section: dict, allowed: set[str], name: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise InvalidArgumentError(
            f"unknown key(s) in config section {name!r}: {sorted(unknown)}"
        )


def _as_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidArgumentError(f"config value {name!r} must be an integer")
    return value


def _as_number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidArgumentError(f"config value {name!r} must be a number")
    return float(value)


def _as_str(value, name: str) -> str:
    if not isinstance(value, str):
        raise InvalidArgumentError(f"config value {name!r} must be a string")
    return value


def _as_int_list(value, name: str) -> list[int]:
    if not isinstance(value, list) or not value:
        raise InvalidArgumentError(f"config value {name!r} must be a non-empty list")
    return [_as_int(v, name) for v in value]


@dataclass
class RunConfig:
    """Everything a command needs, resolved and validated."""

    source: Path
    seed: int = 0
    out_dir: Path = Path("out")
    cube_path: Path | None = None
    cube_format: str = "container"
    gt_path: Path | None = None
    exclude_bands: list[int] = field(default_factory=list)
    top_classes: int | None = None
    selector: SelectorConfig = field(default_factory=SelectorConfig)
    n_select: int = 10
    per_class: int = 20
    trials: int = 10
    knn_k: int = 6
    grid: list[int] = field(default_factory=lambda: [10, 20, 30, 40, 50])
    compare_methods: list[str] = field(default_factory=lambda: list(METHODS))
    sweep_parameter: str | None = None
    sweep_values: list[int] = field(default_factory=list)
    synth: SynthSpec | None = None


def _load_exclusions(value, base: Path) -> list[int]:
    if isinstance(value, list):
        indices = [_as_int(v, "dataset.exclude_bands") for v in value]
    elif isinstance(value, str):
        path = (base / value).resolve() if not Path(value).is_absolute() else Path(value)
        if not path.is_file():
            raise InvalidArgumentError(f"exclude_bands file not found: {path}")
        indices = []
        for line in path.read_text().splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            for token in line.replace(",", " ").split():
                try:
                    indices.append(int(token))
                except ValueError as exc:
                    raise InvalidArgumentError(
                        f"{path}: bad band index {token!r}"
                    ) from exc
    else:
        raise InvalidArgumentError("dataset.exclude_bands must be a list or a file path")
    if len(set(indices)) != len(indices):
        raise InvalidArgumentError("dataset.exclude_bands contains duplicates")
    if any(i < 0 for i in indices):
        raise InvalidArgumentError("dataset.exclude_bands must be non-negative")
    return indices


def _resolve_path(value: str, base: Path, name: str) -> Path:
    path = Path(value)
    if not path.is_absolute():
        path = base / path
    path = path.resolve()
    if not path.is_file():
        raise InvalidArgumentError(f"{name}: file not found: {path}")
    return path


def load_config(path, need_dataset: bool = False, need_ground_truth: bool = False,
                need_synth: bool = False) -> RunConfig:
    """Parse and fully validate a YAML run config."""
    source = Path(path)
    if not source.is_file():
        raise InvalidArgumentError(f"config file not found: {source}")
    try:
        raw = yaml.safe_load(source.read_text())
    except yaml.YAMLError as exc:
        raise InvalidArgumentError(f"config {source} is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    raw = _require_mapping(raw, "<root>")
    _check_keys(raw, _SECTIONS, "<root>")
    base = source.parent
    cfg = RunConfig(source=source)

    if "seed" in raw:
        cfg.seed = _as_int(raw["seed"], "seed")
        if cfg.seed < 0:
            raise InvalidArgumentError("seed must be non-negative")

    if "output" in raw:
        out = _require_mapping(raw["output"], "output")
        _check_keys(out, {"dir"}, "output")
        if "dir" in out:
            out_dir = Path(_as_str(out["dir"], "output.dir"))
            cfg.out_dir = out_dir if out_dir.is_absolute() else base / out_dir

    if "dataset" in raw:
        ds = _require_mapping(raw["dataset"], "dataset")
        _check_keys(ds, _DATASET_KEYS, "dataset")
        if "format" in ds:
            cfg.cube_format = _as_str(ds["format"], "dataset.format")
            if cfg.cube_format not in ("container", "envi"):
                raise InvalidArgumentError(
                    f"dataset.format must be 'container' or 'envi', got {cfg.cube_format!r}"
                )
        if "cube" in ds:
            cfg.cube_path = _resolve_path(_as_str(ds["cube"], "dataset.cube"), base, "dataset.cube")
        if "ground_truth" in ds:
            cfg.gt_path = _resolve_path(
                _as_str(ds["ground_truth"], "dataset.ground_truth"), base, "dataset.ground_truth"
            )
        if "exclude_bands" in ds:
            cfg.exclude_bands = _load_exclusions(ds["exclude_bands"], base)
        if "top_classes" in ds:
            cfg.top_classes = _as_int(ds["top_classes"], "dataset.top_classes")
            if cfg.top_classes < 1:
                raise InvalidArgumentError("dataset.top_classes must be positive")

    if "selector" in raw:
        sel = _require_mapping(raw["selector"], "selector")
        _check_keys(sel, _SELECTOR_KEYS, "selector")
        kwargs = {}
        if "method" in sel:
            kwargs["method"] = _as_str(sel["method"], "selector.method")
        if "n_pixels" in sel:
            kwargs["n_pixels"] = _as_int(sel["n_pixels"], "selector.n_pixels")
        if "sparsity" in sel:
            kwargs["sparsity"] = _as_int(sel["sparsity"], "selector.sparsity")
        if "weighting" in sel:
            mode = _as_str(sel["weighting"], "selector.weighting").replace("_", "-")
            kwargs["weighting"] = mode
        if "tol" in sel:
            kwargs["tol"] = _as_number(sel["tol"], "selector.tol")
        if "use_full_pixels" in sel:
            if not isinstance(sel["use_full_pixels"], bool):
                raise InvalidArgumentError("selector.use_full_pixels must be a boolean")
            kwargs["use_full_pixels"] = sel["use_full_pixels"]
        if "lp_init" in sel:
            kwargs["lp_init"] = _as_str(sel["lp_init"], "selector.lp_init")
        cfg.selector = SelectorConfig(**kwargs)
        if "n_select" in sel:
            cfg.n_select = _as_int(sel["n_select"], "selector.n_select")
            if cfg.n_select < 1:
                raise InvalidArgumentError("selector.n_select must be positive")

    if "evaluate" in raw:
        ev = _require_mapping(raw["evaluate"], "evaluate")
        _check_keys(ev, _EVAL_KEYS, "evaluate")
        if "per_class" in ev:
            cfg.per_class = _as_int(ev["per_class"], "evaluate.per_class")
        if "trials" in ev:
            cfg.trials = _as_int(ev["trials"], "evaluate.trials")
        if "knn_k" in ev:
            cfg.knn_k = _as_int(ev["knn_k"], "evaluate.knn_k")
        if "grid" in ev:
            cfg.grid = _as_int_list(ev["grid"], "evaluate.grid")
        if min([cfg.per_class, cfg.trials, cfg.knn_k] + cfg.grid) < 1:
            raise InvalidArgumentError("evaluate values must be positive")

    if "compare" in raw:
        cmp_section = _require_mapping(raw["compare"], "compare")
        _check_keys(cmp_section, _COMPARE_KEYS, "compare")
        if "methods" in cmp_section:
            methods = cmp_section["methods"]
            if not isinstance(methods, list) or not methods:
                raise InvalidArgumentError("compare.methods must be a non-empty list")
            for m in methods:
                if m not in METHODS:
                    raise InvalidArgumentError(
                        f"compare.methods entry {m!r} not one of {METHODS}"
                    )
            if len(set(methods)) != len(methods):
                raise InvalidArgumentError("compare.methods contains duplicates")
            cfg.compare_methods = list(methods)

    if "sweep" in raw:
        sw = _require_mapping(raw["sweep"], "sweep")
        _check_keys(sw, _SWEEP_KEYS, "sweep")
        if "parameter" not in sw or "values" not in sw:
            raise InvalidArgumentError("sweep needs both 'parameter' and 'values'")
        cfg.sweep_parameter = _as_str(sw["parameter"], "sweep.parameter")
        if cfg.sweep_parameter not in _SWEEPABLE:
            raise InvalidArgumentError(
                f"sweep.parameter must be one of {_SWEEPABLE}"
            )
        cfg.sweep_values = _as_int_list(sw["values"], "sweep.values")
        if min(cfg.sweep_values) < 1:
            raise InvalidArgumentError("sweep.values must be positive")

    if "synth" in raw:
        sy = _require_mapping(raw["synth"], "synth")
        _check_keys(sy, _SYNTH_KEYS, "synth")
        for key in ("width", "height", "classes", "latent_bands", "bands"):
            if key not in sy:
                raise InvalidArgumentError(f"synth section missing {key!r}")
        means = None
        if "class_means" in sy:
            means = np.asarray(sy["class_means"], dtype=np.float64)
        cfg.synth = SynthSpec(
            width=_as_int(sy["width"], "synth.width"),
            height=_as_int(sy["height"], "synth.height"),
            classes=_as_int(sy["classes"], "synth.classes"),
            latent_bands=_as_int(sy["latent_bands"], "synth.latent_bands"),
            bands=_as_int(sy["bands"], "synth.bands"),
            mixing=_as_str(sy.get("mixing", "duplicate"), "synth.mixing"),
            noise_sigma=_as_number(sy.get("noise_sigma", 0.0), "synth.noise_sigma"),
            class_means=means,
        )

    if need_dataset and cfg.cube_path is None:
        raise InvalidArgumentError(f"config {source} must set dataset.cube")
    if need_ground_truth and cfg.gt_path is None:
        raise InvalidArgumentError(f"config {source} must set dataset.ground_truth")
    if need_synth and cfg.synth is None:
        raise InvalidArgumentError(f"config {source} must have a synth section")
    return cfg
