"""Command-line surface: select, evaluate, compare, synth, inspect.

Every command is driven by a YAML config (see config.py for the schema) and
is fully deterministic given that config; reruns produce byte-identical
output files. Band indices are 0-based in JSON/CSV artifacts and 1-based in
printed tables, as each output states.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .cube import HyperCube, flatten, restrict_bands, sample_pixels, synth_cube
from .errors import BandselError
from .evaluate import EvaluationReport, SelectorConfig, keep_top_classes, run_trials
from .io import (
    atomic_write_text,
    inspect_cube,
    load_cube,
    load_ground_truth,
    save_cube,
    save_ground_truth_csv,
)
from .sparse import mdsr_select
from . import baselines

CSV_HEADER = "method,n_select,trial,oca,kappa"


def _load_dataset(cfg: RunConfig, with_gt: bool):
    cube = load_cube(cfg.cube_path, fmt=cfg.cube_format)
    if cfg.exclude_bands:
        bad = [i for i in cfg.exclude_bands if i >= cube.bands]
        if bad:
            raise BandselError(
                f"exclude_bands indices {bad} out of range for {cube.bands} bands"
            )
        keep = [i for i in range(cube.bands) if i not in set(cfg.exclude_bands)]
        cube = restrict_bands(cube, keep)
    gt = None
    if with_gt:
        gt = load_ground_truth(cfg.gt_path, cube.width, cube.height)
        if cfg.top_classes is not None:
            gt = keep_top_classes(gt, cfg.top_classes)
    return cube, gt


def _selector_source(cube: HyperCube, selector: SelectorConfig, seed: int) -> np.ndarray:
    bm = flatten(cube)
    if selector.use_full_pixels:
        return bm
    return sample_pixels(bm, selector.n_pixels, seed)


def _select_once(cube: HyperCube, selector: SelectorConfig, n_select: int, seed: int):
    """Run one selector; returns (ordered indices, weights-or-None)."""
    if selector.method == "mdsr":
        res = mdsr_select(
            cube,
            n_select=n_select,
            n_pixels=selector.n_pixels,
            sparsity=selector.sparsity,
            seed=seed,
            tol=selector.tol,
            weighting=selector.weighting,
        )
        return res.selected, res.weights
    source = _selector_source(cube, selector, seed)
    if selector.method == "lp":
        return baselines.lp_select(source, n_select, seed=seed, init=selector.lp_init), None
    if selector.method == "osp":
        return baselines.osp_select(source, n_select), None
    if selector.method == "cluster":
        return baselines.cluster_select(source, n_select), None
    raise BandselError(f"method {selector.method!r} does not produce a band list")


def _selection_json(cfg: RunConfig, selected, weights) -> str:
    payload = {
        "method": cfg.selector.method,
        "note": "band indices are 0-based",
        "selected": [int(i) for i in selected],
        "weights": [float(w) for w in weights] if weights is not None else None,
        "n_pixels": cfg.selector.n_pixels,
        "k0": cfg.selector.sparsity if cfg.selector.method == "mdsr" else None,
        "seed": cfg.seed,
        "weighting": cfg.selector.weighting if cfg.selector.method == "mdsr" else None,
    }
    return json.dumps(payload, indent=2) + "\n"


def _format_csv(rows) -> str:
    lines = [CSV_HEADER]
    for method, n, trial, oca_v, kappa_v in rows:
        lines.append(f"{method},{n},{trial},{oca_v!r},{kappa_v!r}")
    return "\n".join(lines) + "\n"


def cmd_select(cfg: RunConfig) -> int:
    cube, _ = _load_dataset(cfg, with_gt=False)
    if cfg.n_select > cube.bands:
        raise BandselError(f"n_select={cfg.n_select} exceeds {cube.bands} bands")
    if cfg.selector.method == "pca":
        raise BandselError("pca extracts components, not bands; use evaluate/compare")
    selected, weights = _select_once(cube, cfg.selector, cfg.n_select, cfg.seed)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    out_path = cfg.out_dir / f"selection_{cfg.selector.method}.json"
    atomic_write_text(out_path, _selection_json(cfg, selected, weights))

    print(f"# method={cfg.selector.method} seed={cfg.seed} (bands 1-based below, 0-based in JSON)")
    print(f"{'rank':>4}  {'band':>5}  weight")
    for rank, band in enumerate(selected, start=1):
        w = f"{weights[band]:.4f}" if weights is not None else "-"
        print(f"{rank:>4}  {band + 1:>5}  {w}")
    print(f"wrote {out_path}")
    return 0


def _grid_for(cfg: RunConfig, cube: HyperCube) -> list[int]:
    grid = [n for n in cfg.grid]
    if max(grid) > cube.bands:
        raise BandselError(
            f"evaluate.grid max {max(grid)} exceeds the cube's {cube.bands} bands"
        )
    return grid


def cmd_evaluate(cfg: RunConfig) -> int:
    cube, gt = _load_dataset(cfg, with_gt=True)
    grid = _grid_for(cfg, cube)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    method = cfg.selector.method

    if cfg.sweep_parameter is None:
        report = run_trials(
            cube, gt, cfg.selector, grid, cfg.knn_k,
            trials=cfg.trials, base_seed=cfg.seed, per_class=cfg.per_class,
        )
        report_path = cfg.out_dir / f"report_{method}.json"
        curves_path = cfg.out_dir / f"curves_{method}.csv"
        atomic_write_text(report_path, report.to_json())
        atomic_write_text(curves_path, _format_csv(report.csv_rows()))
        _print_aggregates(report)
        print(f"wrote {report_path}")
        print(f"wrote {curves_path}")
        return 0

    lines = [f"{cfg.sweep_parameter},{CSV_HEADER}"]
    aggregates = []
    for value in cfg.sweep_values:
        selector = SelectorConfig(
            method=method,
            n_pixels=value if cfg.sweep_parameter == "n_pixels" else cfg.selector.n_pixels,
            sparsity=value if cfg.sweep_parameter == "sparsity" else cfg.selector.sparsity,
            weighting=cfg.selector.weighting,
            tol=cfg.selector.tol,
            use_full_pixels=cfg.selector.use_full_pixels,
            lp_init=cfg.selector.lp_init,
        )
        report = run_trials(
            cube, gt, selector, grid, cfg.knn_k,
            trials=cfg.trials, base_seed=cfg.seed, per_class=cfg.per_class,
        )
        for row in report.csv_rows():
            method_v, n, trial, oca_v, kappa_v = row
            lines.append(f"{value},{method_v},{n},{trial},{oca_v!r},{kappa_v!r}")
        aggregates.append({"value": value, "aggregates": report.aggregates()})
    sweep_csv = cfg.out_dir / f"sweep_{method}.csv"
    sweep_json = cfg.out_dir / f"sweep_{method}.json"
    atomic_write_text(sweep_csv, "\n".join(lines) + "\n")
    atomic_write_text(
        sweep_json,
        json.dumps(
            {"parameter": cfg.sweep_parameter, "method": method, "runs": aggregates},
            indent=2,
        )
        + "\n",
    )
    print(f"wrote {sweep_csv}")
    print(f"wrote {sweep_json}")
    return 0


def _print_aggregates(report: EvaluationReport) -> None:
    print(f"# method={report.method} trials={report.trials} knn_k={report.knn_k}")
    print(f"{'n_select':>8}  {'mean_oca':>9}  {'std_oca':>8}  {'mean_kappa':>10}")
    for row in report.aggregates():
        print(
            f"{row['n_select']:>8}  {row['mean_oca']:>9.4f}  "
            f"{row['std_oca']:>8.4f}  {row['mean_kappa']:>10.4f}"
        )


def cmd_compare(cfg: RunConfig) -> int:
    cube, gt = _load_dataset(cfg, with_gt=True)
    grid = _grid_for(cfg, cube)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    timings = {}
    for method in cfg.compare_methods:
        selector = SelectorConfig(
            method=method,
            n_pixels=cfg.selector.n_pixels,
            sparsity=cfg.selector.sparsity,
            weighting=cfg.selector.weighting,
            tol=cfg.selector.tol,
            use_full_pixels=cfg.selector.use_full_pixels,
            lp_init=cfg.selector.lp_init,
        )
        started = time.perf_counter()
        report = run_trials(
            cube, gt, selector, grid, cfg.knn_k,
            trials=cfg.trials, base_seed=cfg.seed, per_class=cfg.per_class,
        )
        timings[method] = time.perf_counter() - started
        rows.extend(report.csv_rows())
        report_path = cfg.out_dir / f"report_{method}.json"
        atomic_write_text(report_path, report.to_json())
        _print_aggregates(report)

    compare_path = cfg.out_dir / "compare.csv"
    atomic_write_text(compare_path, _format_csv(rows))
    timing_path = cfg.out_dir / "timings.json"
    atomic_write_text(
        timing_path,
        json.dumps({"note": "informational wall-clock seconds", "seconds": timings}, indent=2)
        + "\n",
    )
    for method, seconds in timings.items():
        print(f"timing {method}: {seconds:.2f}s")
    print(f"wrote {compare_path}")
    print(f"wrote {timing_path}")
    return 0


def cmd_synth(cfg: RunConfig) -> int:
    cube, gt = synth_cube(cfg.synth, cfg.seed)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    cube_path = save_cube(cube, cfg.out_dir / "synth_cube.json")
    gt_path = save_ground_truth_csv(gt, cfg.out_dir / "synth_gt.csv")
    print(
        f"synthetic cube: {cube.width}x{cube.height}x{cube.bands} "
        f"({cfg.synth.classes} classes, {cfg.synth.latent_bands} generators, "
        f"mixing={cfg.synth.mixing})"
    )
    print(f"wrote {cube_path}")
    print(f"wrote {gt_path}")
    return 0


def cmd_inspect(cfg: RunConfig | None, path: str | None, fmt: str) -> int:
    if path is None:
        if cfg is None or cfg.cube_path is None:
            raise BandselError("inspect needs a cube path (positional or dataset.cube)")
        path, fmt = cfg.cube_path, cfg.cube_format
    summary = inspect_cube(path, fmt=fmt)
    print(f"cube: {summary['width']}x{summary['height']} pixels, {summary['bands']} bands")
    print(f"wavelength metadata: {'yes' if summary['has_wavelengths'] else 'no'}")
    if summary["non_finite_count"]:
        print(
            f"WARNING: payload contains {summary['nan_count']} NaN and "
            f"{summary['non_finite_count'] - summary['nan_count']} infinite values"
        )
    else:
        print("payload is finite (no NaN/Inf)")
    print(f"{'band':>5}  {'min':>12}  {'max':>12}  {'mean':>12}   (bands 1-based)")
    for b in range(summary["bands"]):
        print(
            f"{b + 1:>5}  {summary['band_min'][b]:>12.4f}  "
            f"{summary['band_max'][b]:>12.4f}  {summary['band_mean'][b]:>12.4f}"
        )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bandsel",
        description="Unsupervised hyperspectral band selection and evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"bandsel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="YAML run config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")

    common(sub.add_parser("select", help="rank and select bands"))
    common(sub.add_parser("evaluate", help="classification evaluation of one selector"))
    common(sub.add_parser("compare", help="evaluate several selectors on identical splits"))
    common(sub.add_parser("synth", help="generate a synthetic labeled cube"))
    inspect_p = sub.add_parser("inspect", help="summarize a cube file")
    inspect_p.add_argument("path", nargs="?", default=None, help="cube file (alternative to --config)")
    inspect_p.add_argument("--format", default="container", choices=("container", "envi"))
    common(inspect_p, config_required=False)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = None
        if args.config is not None:
            cfg = load_config(
                args.config,
                need_dataset=args.command in ("select", "evaluate", "compare"),
                need_ground_truth=args.command in ("evaluate", "compare"),
                need_synth=args.command == "synth",
            )
            if args.seed is not None:
                if args.seed < 0:
                    raise BandselError("--seed must be non-negative")
                cfg.seed = args.seed
            if args.out is not None:
                cfg.out_dir = Path(args.out)
        if args.command == "select":
            return cmd_select(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(cfg)
        if args.command == "compare":
            return cmd_compare(cfg)
        if args.command == "synth":
            return cmd_synth(cfg)
        if args.command == "inspect":
            return cmd_inspect(cfg, args.path, args.format)
        raise BandselError(f"unknown command {args.command!r}")
    except (BandselError, OSError) as exc:
        print(f"bandsel {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
