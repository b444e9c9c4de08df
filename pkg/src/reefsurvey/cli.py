"""Command-line interface wiring the pipeline stages.

Six subcommands mirror the survey workflow: ``plan`` a coverage trajectory,
``simulate`` a synthetic field dataset, compute a ``rugosity`` grid from a
mesh, build a ``hotspot`` abundance map from poses plus detections, ``eval``
detector quality, and ``correlate`` two grids.

Contract: stdout carries machine-parseable ``key=value`` lines (floats with
6 decimals); human prose goes to stderr. Every run writes a manifest, even on
failure. Exit codes: 0 success, 2 usage/config, 3 input parse, 4 semantic
mismatch between well-formed inputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Callable

from .detector_eval import EvalConfig, evaluate, precision_recall_points
from .errors import FormatError, IngestError, ScenarioConfigError, SemanticError
from .figures import (
    save_density_figure,
    save_grid_figure,
    save_plan_figure,
    save_pr_figure,
    save_scatter_figure,
)
from .geom import AABB2, grid_index
from .gridio import read_grid_csv, write_grid_csv
from .hotspot import (
    HotspotConfig,
    abundance_grid,
    correlate_grids,
    hotspot_peaks,
    localize_counts,
    log_transform,
    peaks_csv,
)
from .ingest import (
    parse_obj,
    parse_ply,
    parse_pose_trajectory,
    parse_yolo_detections,
    write_ply,
    write_pose_trajectory,
    write_yolo_detections,
)
from .manifest import RunManifest
from .raster import COLOR_RAMPS, write_raster
from .rugosity import RugosityConfig, rugosity_grid, rugosity_stats
from .survey import (
    CameraGeometry,
    load_scenario,
    plan_csv,
    plan_lawnmower,
    scenario_to_dict,
    simulate_survey,
    synth_reef,
    truth_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_SEMANTIC = 4


# ------------------------------------------------------------- converters
# Converters accept both CLI strings and JSON config values; they raise
# ValueError with a user-facing message on domain violations.


def _to_float(value) -> float:
    if isinstance(value, bool):
        raise ValueError("expected a number")
    return float(value)


def _positive_float(value) -> float:
    f = _to_float(value)
    if f <= 0:
        raise ValueError(f"must be > 0, got {f}")
    return f


def _nonneg_float(value) -> float:
    f = _to_float(value)
    if f < 0:
        raise ValueError(f"must be >= 0, got {f}")
    return f


def _unit_float(value) -> float:
    f = _to_float(value)
    if not (0.0 <= f <= 1.0):
        raise ValueError(f"must be in [0, 1], got {f}")
    return f


def _overlap(value) -> float:
    f = _to_float(value)
    if not (0.0 <= f < 1.0):
        raise ValueError(f"must be in [0, 1), got {f}")
    return f


def _fov(value) -> float:
    f = _to_float(value)
    if not (0.0 < f < 180.0):
        raise ValueError(f"must be in (0, 180) degrees, got {f}")
    return f


def _positive_int(value) -> int:
    i = int(value)
    if i <= 0:
        raise ValueError(f"must be a positive integer, got {value}")
    return i


def _nonneg_int(value) -> int:
    i = int(value)
    if i < 0:
        raise ValueError(f"must be >= 0, got {value}")
    return i


def _choice(*options: str) -> Callable[[Any], str]:
    def convert(value):
        if value not in options:
            raise ValueError(f"must be one of {options}, got {value!r}")
        return value

    return convert


def _parse_region(value) -> AABB2:
    """Accepts 'WxH' (anchored at the origin), 'x0,y0,x1,y1', or a 4-list."""
    if isinstance(value, (list, tuple)):
        parts = [float(v) for v in value]
    else:
        s = str(value).strip()
        if "," in s:
            parts = [float(p) for p in s.split(",")]
        elif "x" in s.lower():
            w, h = (float(p) for p in s.lower().split("x"))
            parts = [0.0, 0.0, w, h]
        else:
            raise ValueError(f"region must be WxH or x0,y0,x1,y1, got {value!r}")
    if len(parts) != 4:
        raise ValueError(f"region needs 4 values, got {len(parts)}")
    region = AABB2(*parts)
    if region.width <= 0 or region.height <= 0:
        raise ValueError(f"region must have positive extent, got {value!r}")
    return region


def _thresholds(value) -> tuple[float, ...]:
    if isinstance(value, (list, tuple)):
        raw = [float(v) for v in value]
    else:
        raw = [float(p) for p in str(value).split(",") if p.strip()]
    EvalConfig(iou_thresholds=tuple(raw))  # domain check with its own message
    return tuple(raw)


def _boolish(value) -> bool:
    if isinstance(value, bool):
        return value
    if str(value).lower() in ("1", "true", "yes"):
        return True
    if str(value).lower() in ("0", "false", "no"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


# ---------------------------------------------------------- option tables


@dataclasses.dataclass(frozen=True)
class Opt:
    dest: str
    flag: str
    convert: Callable[[Any], Any]
    default: Any = None
    required: bool = False
    is_flag: bool = False
    help: str = ""


_CAMERA_OPTS = [
    Opt("altitude", "--altitude", _positive_float, 2.0, help="camera altitude above the seafloor, m"),
    Opt("hfov", "--hfov", _fov, 120.0, help="horizontal field of view, degrees"),
    Opt("vfov", "--vfov", _fov, 58.0, help="vertical field of view, degrees"),
    Opt("fps", "--fps", _positive_float, 6.0, help="camera frame rate, Hz"),
]

_PLAN_OPTS = [
    Opt("overlap", "--overlap", _overlap, 0.2, help="across-track footprint overlap in [0, 1)"),
    Opt("travel_axis", "--travel-axis", _choice("x", "y"), "y", help="transect travel axis"),
    Opt("speed", "--speed", _positive_float, 0.3, help="survey speed, m/s"),
]

_RASTER_OPTS = [
    Opt("colormap", "--colormap", _choice(*sorted(COLOR_RAMPS)), "ocean", help="raster color ramp"),
    Opt("raster_scale", "--raster-scale", _positive_int, 1, help="integer pixel upscale for the PPM"),
]

COMMANDS: dict[str, tuple[str, list[Opt], list[str]]] = {
    "plan": (
        "plan a lawnmower coverage survey and write the waypoint CSV",
        [
            Opt("region", "--region", _parse_region, required=True, help="survey region, WxH or x0,y0,x1,y1"),
            *_CAMERA_OPTS,
            *_PLAN_OPTS,
            Opt("out_prefix", "--out-prefix", str, "plan", help="output path prefix"),
        ],
        [],
    ),
    "rugosity": (
        "compute a per-cell rugosity grid from a PLY/OBJ reef mesh",
        [
            Opt("mesh", "--mesh", str, required=True, help="mesh file (PLY ascii/binary or OBJ)"),
            Opt("cell_size", "--cell-size", _positive_float, 0.5, help="grid cell size, m"),
            Opt("region", "--region", _parse_region, help="grid region (default: mesh XY bounds)"),
            Opt("min_coverage", "--min-coverage", _unit_float, 0.5, help="coverage fraction below which a cell is no-data"),
            *_RASTER_OPTS,
            Opt("out_prefix", "--out-prefix", str, "out", help="output path prefix"),
        ],
        [],
    ),
    "hotspot": (
        "build an abundance hotspot map from poses and YOLO detections",
        [
            Opt("poses", "--poses", str, required=True, help="trajectory CSV"),
            Opt("detections", "--detections", str, required=True, help="directory of <frame_id>.txt files"),
            Opt("conf_threshold", "--conf-threshold", _unit_float, 0.25, help="counting confidence threshold"),
            Opt("cell_size", "--cell-size", _positive_float, 0.5, help="grid cell size, m"),
            Opt("reducer", "--reducer", _choice("max", "mean", "sum"), "max", help="per-cell count reducer"),
            Opt("region", "--region", _parse_region, help="grid region (default: sample bounds)"),
            Opt("peak_count", "--peak-count", _nonneg_int, 5, help="number of peaks to extract"),
            Opt("peak_separation", "--peak-separation", _nonneg_float, 2.0, help="minimum peak separation, m"),
            *_RASTER_OPTS,
            Opt("out_prefix", "--out-prefix", str, "out", help="output path prefix"),
        ],
        [],
    ),
    "eval": (
        "score predicted detections against ground truth (mAP metrics)",
        [
            Opt("predictions", "--predictions", str, required=True, help="directory of prediction label files"),
            Opt("ground_truth", "--ground-truth", str, required=True, help="directory of ground-truth label files"),
            Opt("iou_thresholds", "--iou-thresholds", _thresholds, help="comma list (default 0.5:0.95 step 0.05)"),
            Opt("conf_threshold", "--conf-threshold", _unit_float, 0.25, help="counting confidence threshold"),
            Opt("pr_curve", "--pr-curve", _boolish, False, is_flag=True, help="also write the PR curve CSV and figure"),
            Opt("out_prefix", "--out-prefix", str, "eval", help="output path prefix"),
        ],
        [],
    ),
    "simulate": (
        "synthesize a full survey dataset from a reef scenario config",
        [
            Opt("scenario", "--scenario", str, required=True, help="scenario JSON (see scenarios/)"),
            *_CAMERA_OPTS,
            *_PLAN_OPTS,
            Opt("vertex_spacing", "--vertex-spacing", _positive_float, 0.125, help="reef mesh vertex spacing, m"),
            Opt("out", "--out", str, "simdata", help="output directory"),
        ],
        [],
    ),
    "correlate": (
        "correlate two grid CSVs (e.g. rugosity vs abundance)",
        [
            Opt("out_prefix", "--out-prefix", str, "correlate", help="output path prefix"),
        ],
        ["grid_a", "grid_b"],
    ),
}


def _add_global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # Global flags are accepted both before and after the subcommand; the
    # subparser copies use SUPPRESS defaults so they never clobber values
    # already parsed at the root level.
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", metavar="PATH", default=default,
                        help="JSON file of per-command option defaults; flags override")
    parser.add_argument("--threads", metavar="N", default=default,
                        help="worker threads for grid/simulation stages (0 = auto)")
    parser.add_argument("--seed", type=int, metavar="S", default=default,
                        help="override the scenario seed (simulate)")
    parser.add_argument("--no-figures", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="skip matplotlib figure outputs")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reefsurvey",
        description="AUV reef survey toolkit: coverage planning, rugosity, hotspot maps, detector eval, simulation.",
    )
    _add_global_flags(parser, suppress=False)
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for command, (help_text, opts, positionals) in COMMANDS.items():
        sub = subparsers.add_parser(command, help=help_text, description=help_text)
        _add_global_flags(sub, suppress=True)
        for name in positionals:
            sub.add_argument(name)
        for opt in opts:
            if opt.is_flag:
                sub.add_argument(opt.flag, dest=opt.dest, action="store_const", const=True, default=None, help=opt.help)
            else:
                sub.add_argument(opt.flag, dest=opt.dest, default=None, metavar="V", help=opt.help)
        sub.set_defaults(_subparser=sub)
    return parser


def _resolve_options(args, command: str, file_config: dict) -> dict:
    sub: argparse.ArgumentParser = args._subparser
    section = file_config.get(command, {})
    if not isinstance(section, dict):
        sub.error(f"config: section {command!r} must be an object")
    known = {o.dest for o in COMMANDS[command][1]}
    unknown = sorted(set(section) - known)
    if unknown:
        sub.error(f"config: unknown option {command}.{unknown[0]}")

    resolved = {}
    for opt in COMMANDS[command][1]:
        raw = getattr(args, opt.dest, None)
        from_config = False
        if raw is None and opt.dest in section:
            raw = section[opt.dest]
            from_config = True
        if raw is None:
            if opt.required:
                sub.error(f"{opt.flag} is required")
            resolved[opt.dest] = opt.default
            continue
        try:
            resolved[opt.dest] = opt.convert(raw)
        except (TypeError, ValueError) as exc:
            where = f"config {command}.{opt.dest}" if from_config else opt.flag
            sub.error(f"{where}: {exc}")
    return resolved


def _jsonable(value):
    if isinstance(value, AABB2):
        return [value.x_min, value.y_min, value.x_max, value.y_max]
    if isinstance(value, tuple):
        return list(value)
    return value


def _manifest_config(cfg: dict, **extra) -> dict:
    out = {k: _jsonable(v) for k, v in cfg.items()}
    out.update(extra)
    return out


def _emit(pairs: list[tuple[str, Any]]) -> list[str]:
    lines = []
    for key, value in pairs:
        if value is None:
            text = f"{key}=undefined"
        elif isinstance(value, float):
            text = f"{key}={value:.6f}"
        else:
            text = f"{key}={value}"
        lines.append(text)
        print(text)
    return lines


def _read_text(path_str: str) -> tuple[str, str]:
    path = Path(path_str)
    if not path.is_file():
        raise FormatError(f"input file {path} does not exist", str(path))
    return path.read_text(encoding="utf-8"), str(path)


def _load_mesh(path_str: str):
    path = Path(path_str)
    if not path.is_file():
        raise FormatError(f"mesh file {path} does not exist", str(path))
    data = path.read_bytes()
    if data.startswith(b"ply"):
        return parse_ply(data, str(path))
    try:
        return parse_obj(data.decode("utf-8"), str(path))
    except UnicodeDecodeError:
        raise FormatError("file is neither PLY nor OBJ text", str(path), 1) from None


def _ensure_parent(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _snap_region(xs, ys, cell_size: float) -> AABB2:
    """Cell-aligned region containing every sample (half-open safe)."""
    x0 = math.floor(min(xs) / cell_size) * cell_size
    y0 = math.floor(min(ys) / cell_size) * cell_size
    x1 = (math.floor(max(xs) / cell_size) + 1) * cell_size
    y1 = (math.floor(max(ys) / cell_size) + 1) * cell_size
    return AABB2(x0, y0, x1, y1)


# ---------------------------------------------------------------- commands


def cmd_plan(cfg: dict, *, threads: int, figures: bool, seed: int | None) -> int:
    cam = CameraGeometry(cfg["altitude"], cfg["hfov"], cfg["vfov"], cfg["fps"])
    manifest = RunManifest("plan", _manifest_config(cfg))
    prefix = cfg["out_prefix"]
    manifest_path = Path(f"{prefix}_manifest.json")
    try:
        with manifest.stage("plan"):
            plan = plan_lawnmower(cfg["region"], cam, cfg["overlap"], cfg["travel_axis"], cfg["speed"])
        csv_path = _ensure_parent(Path(f"{prefix}.csv"))
        csv_path.write_text(plan_csv(plan), encoding="ascii")
        manifest.add_output(csv_path)
        pairs = [
            ("tracks", plan.track_count),
            ("spacing", plan.track_spacing),
            ("waypoints", len(plan.waypoints)),
            ("path_length", plan.path_length()),
            ("plan_csv", csv_path),
        ]
        if figures:
            with manifest.stage("figures"):
                fig_path = save_plan_figure(plan, cfg["region"], f"{prefix}.png")
            manifest.add_output(fig_path)
            pairs.append(("figure", fig_path))
    except Exception as exc:
        manifest.write(manifest_path, error=f"{type(exc).__name__}: {exc}")
        raise
    _emit(pairs)
    manifest.write(manifest_path)
    return EXIT_OK


def cmd_rugosity(cfg: dict, *, threads: int, figures: bool, seed: int | None) -> int:
    manifest = RunManifest("rugosity", _manifest_config(cfg, threads=threads))
    prefix = cfg["out_prefix"]
    manifest_path = Path(f"{prefix}_manifest.json")
    try:
        manifest.add_input(cfg["mesh"])
        with manifest.stage("parse_mesh"):
            mesh = _load_mesh(cfg["mesh"])
        rcfg = RugosityConfig(
            cell_size=cfg["cell_size"],
            region=cfg["region"],
            min_coverage_fraction=cfg["min_coverage"],
        )
        with manifest.stage("rugosity_grid"):
            grid = rugosity_grid(mesh, rcfg, threads=threads)
        stats = rugosity_stats(grid)

        csv_path = _ensure_parent(Path(f"{prefix}_rugosity.csv"))
        csv_path.write_text(write_grid_csv(grid), encoding="ascii")
        manifest.add_output(csv_path)
        ppm_path = write_raster(Path(f"{prefix}_rugosity.ppm"), grid, cfg["colormap"], cfg["raster_scale"])
        manifest.add_output(ppm_path)
        manifest.add_output(str(ppm_path) + ".txt")

        pairs = [
            ("mesh_triangles", mesh.num_faces),
            ("cells", grid.nx * grid.ny),
            ("valid_cells", stats.count),
            ("min", stats.minimum),
            ("max", stats.maximum),
            ("mean", stats.mean),
            ("grid_csv", csv_path),
            ("raster", ppm_path),
        ]
        if figures:
            with manifest.stage("figures"):
                fig_path = save_grid_figure(
                    grid, f"{prefix}_rugosity.png", title="rugosity", colorbar_label="rugosity"
                )
            manifest.add_output(fig_path)
            pairs.append(("figure", fig_path))
    except Exception as exc:
        manifest.write(manifest_path, error=f"{type(exc).__name__}: {exc}")
        raise
    _emit(pairs)
    manifest.write(manifest_path)
    return EXIT_OK


def cmd_hotspot(cfg: dict, *, threads: int, figures: bool, seed: int | None) -> int:
    manifest = RunManifest("hotspot", _manifest_config(cfg))
    prefix = cfg["out_prefix"]
    manifest_path = Path(f"{prefix}_manifest.json")
    try:
        manifest.add_input(cfg["poses"])
        manifest.add_input(cfg["detections"])
        with manifest.stage("parse_inputs"):
            pose_text, pose_source = _read_text(cfg["poses"])
            trajectory = parse_pose_trajectory(pose_text, pose_source)
            detections = parse_yolo_detections(cfg["detections"])
        with manifest.stage("localize"):
            samples = localize_counts(trajectory, detections, cfg["conf_threshold"])

        hcfg = HotspotConfig(
            cell_size=cfg["cell_size"],
            reducer=cfg["reducer"],
            peak_count=cfg["peak_count"],
            peak_min_separation=cfg["peak_separation"],
        )
        region = cfg["region"]
        if region is None:
            if not samples:
                raise SemanticError("no localized samples and no --region given")
            region = _snap_region([s.x for s in samples], [s.y for s in samples], hcfg.cell_size)

        with manifest.stage("grid"):
            grid = abundance_grid(samples, hcfg, region)
            log_grid = log_transform(grid)
            peaks = hotspot_peaks(log_grid, hcfg)

        csv_path = _ensure_parent(Path(f"{prefix}_abundance.csv"))
        csv_path.write_text(write_grid_csv(grid), encoding="ascii")
        manifest.add_output(csv_path)
        ppm_path = write_raster(
            Path(f"{prefix}_abundance_log.ppm"), log_grid, cfg["colormap"], cfg["raster_scale"]
        )
        manifest.add_output(ppm_path)
        manifest.add_output(str(ppm_path) + ".txt")

        # Peak positions come from the log grid (same argmax ordering); the
        # reported values are raw per-cell counts, which are interpretable.
        raw_peaks = []
        for p in peaks:
            idx = grid_index(grid, p.x, p.y)
            raw_peaks.append(dataclasses.replace(p, value=float(grid.values[idx])))
        peaks_path = Path(f"{prefix}_peaks.csv")
        peaks_path.write_text(peaks_csv(raw_peaks), encoding="ascii")
        manifest.add_output(peaks_path)

        pairs = [
            ("samples", len(samples)),
            ("valid_cells", int(grid.valid.sum())),
            ("reducer", hcfg.reducer),
            ("peaks", len(raw_peaks)),
        ]
        for rank, p in enumerate(raw_peaks, 1):
            pairs.extend(
                [(f"peak{rank}_x", p.x), (f"peak{rank}_y", p.y), (f"peak{rank}_value", p.value)]
            )
        pairs.extend([("grid_csv", csv_path), ("raster", ppm_path), ("peaks_csv", peaks_path)])
        if figures:
            with manifest.stage("figures"):
                fig_path = save_grid_figure(
                    log_grid,
                    f"{prefix}_abundance.png",
                    title="fish abundance (log scale)",
                    colorbar_label="ln(1 + count)",
                    cmap="magma",
                    peaks=raw_peaks,
                )
            manifest.add_output(fig_path)
            pairs.append(("figure", fig_path))
    except Exception as exc:
        manifest.write(manifest_path, error=f"{type(exc).__name__}: {exc}")
        raise
    _emit(pairs)
    manifest.write(manifest_path)
    return EXIT_OK


def cmd_eval(cfg: dict, *, threads: int, figures: bool, seed: int | None) -> int:
    manifest = RunManifest("eval", _manifest_config(cfg))
    prefix = cfg["out_prefix"]
    manifest_path = Path(f"{prefix}_manifest.json")
    try:
        manifest.add_input(cfg["predictions"])
        manifest.add_input(cfg["ground_truth"])
        with manifest.stage("parse_inputs"):
            preds = parse_yolo_detections(cfg["predictions"])
            gts = parse_yolo_detections(cfg["ground_truth"])
        if not set(preds) & set(gts):
            raise SemanticError("predictions and ground truth share no frame ids")

        ecfg = EvalConfig(
            iou_thresholds=cfg["iou_thresholds"] or EvalConfig().iou_thresholds,
            count_confidence=cfg["conf_threshold"],
        )
        with manifest.stage("evaluate"):
            report = evaluate(preds, gts, ecfg)

        pairs = [
            ("frames", report.n_frames),
            ("ground_truth", report.n_ground_truth),
            ("predictions", report.n_predictions),
            ("interpolation", "all_point"),
            ("mAP50", report.map50),
            ("mAP50_95", report.mean_ap),
            ("AP@0.95", report.ap_by_threshold.get(0.95)),
            ("tp", report.true_positives),
            ("fp", report.false_positives),
            ("fn", report.false_negatives),
        ]
        lines = _emit(pairs)
        report_path = _ensure_parent(Path(f"{prefix}_eval.txt"))
        report_path.write_text("".join(line + "\n" for line in lines), encoding="ascii")
        manifest.add_output(report_path)

        if cfg["pr_curve"]:
            points = precision_recall_points(preds, gts, ecfg.iou_thresholds[0])
            pr_path = Path(f"{prefix}_pr.csv")
            rows = ["confidence,precision,recall"]
            rows.extend(f"{c!r},{p!r},{r!r}" for c, p, r in points)
            pr_path.write_text("\n".join(rows) + "\n", encoding="ascii")
            manifest.add_output(pr_path)
            if figures:
                fig_path = save_pr_figure(points, f"{prefix}_pr.png")
                manifest.add_output(fig_path)
    except Exception as exc:
        manifest.write(manifest_path, error=f"{type(exc).__name__}: {exc}")
        raise
    manifest.write(manifest_path)
    return EXIT_OK


def cmd_simulate(cfg: dict, *, threads: int, figures: bool, seed: int | None) -> int:
    manifest = RunManifest("simulate", _manifest_config(cfg, seed_override=seed, threads=threads))
    out_dir = Path(cfg["out"])
    manifest_path = out_dir / "manifest.json"
    try:
        manifest.add_input(cfg["scenario"])
        scenario = load_scenario(cfg["scenario"])
        if seed is not None:
            scenario = dataclasses.replace(scenario, seed=seed)
        cam = CameraGeometry(cfg["altitude"], cfg["hfov"], cfg["vfov"], cfg["fps"])

        with manifest.stage("plan"):
            plan = plan_lawnmower(scenario.region, cam, cfg["overlap"], cfg["travel_axis"], cfg["speed"])
        with manifest.stage("simulate"):
            trajectory, detections = simulate_survey(plan, cam, scenario, threads=threads)
        with manifest.stage("synth_reef"):
            mesh = synth_reef(scenario, cfg["vertex_spacing"])

        out_dir.mkdir(parents=True, exist_ok=True)
        with manifest.stage("write_outputs"):
            ply_path = out_dir / "reef.ply"
            ply_path.write_bytes(write_ply(mesh, "binary_little_endian"))
            poses_path = out_dir / "poses.csv"
            poses_path.write_text(write_pose_trajectory(trajectory), encoding="ascii")
            det_dir = out_dir / "detections"
            write_yolo_detections(detections, det_dir)
            truth_path = out_dir / "truth.csv"
            truth_path.write_text(truth_csv(scenario), encoding="ascii")
            scn_path = out_dir / "scenario.json"
            scn_path.write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n", encoding="utf-8")
            planned_path = out_dir / "plan.csv"
            planned_path.write_text(plan_csv(plan), encoding="ascii")
        for p in (ply_path, poses_path, truth_path, scn_path, planned_path):
            manifest.add_output(p)

        pairs = [
            ("frames", len(trajectory)),
            ("tracks", plan.track_count),
            ("spacing", plan.track_spacing),
            ("mesh_triangles", mesh.num_faces),
            ("detections_total", sum(len(v) for v in detections.values())),
            ("out_dir", out_dir),
        ]
        if figures:
            with manifest.stage("figures"):
                fig_path = save_density_figure(scenario, plan, out_dir / "truth.png")
            manifest.add_output(fig_path)
            pairs.append(("figure", fig_path))
    except Exception as exc:
        manifest.write(manifest_path, error=f"{type(exc).__name__}: {exc}")
        raise
    _emit(pairs)
    manifest.write(manifest_path)
    return EXIT_OK


def cmd_correlate(cfg: dict, *, threads: int, figures: bool, seed: int | None) -> int:
    manifest = RunManifest("correlate", _manifest_config(cfg))
    prefix = cfg["out_prefix"]
    manifest_path = Path(f"{prefix}_manifest.json")
    try:
        manifest.add_input(cfg["grid_a"])
        manifest.add_input(cfg["grid_b"])
        with manifest.stage("parse_inputs"):
            text_a, source_a = _read_text(cfg["grid_a"])
            text_b, source_b = _read_text(cfg["grid_b"])
            grid_a = read_grid_csv(text_a, source_a)
            grid_b = read_grid_csv(text_b, source_b)
        with manifest.stage("correlate"):
            result = correlate_grids(grid_a, grid_b)
        pairs = [
            ("pearson", result.pearson),
            ("spearman", result.spearman),
            ("n", result.n),
        ]
        if figures and result.n > 0:
            joint = grid_a.valid & grid_b.valid
            with manifest.stage("figures"):
                fig_path = save_scatter_figure(
                    grid_a.values[joint],
                    grid_b.values[joint],
                    _ensure_parent(Path(f"{prefix}_scatter.png")),
                    xlabel=Path(cfg["grid_a"]).stem,
                    ylabel=Path(cfg["grid_b"]).stem,
                    title=f"n={result.n}",
                )
            manifest.add_output(fig_path)
            pairs.append(("figure", fig_path))
    except Exception as exc:
        manifest.write(manifest_path, error=f"{type(exc).__name__}: {exc}")
        raise
    _emit(pairs)
    manifest.write(manifest_path)
    return EXIT_OK


_HANDLERS = {
    "plan": cmd_plan,
    "rugosity": cmd_rugosity,
    "hotspot": cmd_hotspot,
    "eval": cmd_eval,
    "simulate": cmd_simulate,
    "correlate": cmd_correlate,
}


def _resolve_threads(value, parser) -> int:
    if value is None:
        return 1
    try:
        n = int(value)
        if n < 0:
            raise ValueError
    except ValueError:
        parser.error(f"--threads: expected a non-negative integer, got {value!r}")
    if n == 0:
        return max(1, min(8, os.cpu_count() or 1))
    return n


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s: %(message)s")

    file_config: dict = {}
    if args.config:
        config_path = Path(args.config)
        if not config_path.is_file():
            parser.error(f"--config: file {config_path} does not exist")
        try:
            file_config = json.loads(config_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            parser.error(f"--config: invalid JSON: {exc}")
        if not isinstance(file_config, dict):
            parser.error("--config: top level must be an object keyed by command name")
        unknown = sorted(set(file_config) - set(COMMANDS))
        if unknown:
            parser.error(f"--config: unknown command section {unknown[0]!r}")

    threads = _resolve_threads(args.threads, parser)
    cfg = _resolve_options(args, args.command, file_config)
    for positional in COMMANDS[args.command][2]:
        cfg[positional] = getattr(args, positional)

    try:
        return _HANDLERS[args.command](
            cfg, threads=threads, figures=not args.no_figures, seed=args.seed
        )
    except ScenarioConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SemanticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
