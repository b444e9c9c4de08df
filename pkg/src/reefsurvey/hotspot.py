"""Fish-abundance hotspot mapping.

Per-frame fish counts are assigned to the camera's XY position (the stated
downward-camera simplification), reduced per grid cell, log-transformed for
display, and compared against rugosity. The default per-cell reducer is max:
one frame never counts an individual twice, whereas summing or averaging
across overlapping frames would re-count the same fish. ``mean`` and ``sum``
remain available for sensitivity analysis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .detector_eval import count_fish
from .errors import DomainError, FrameMappingError, GridShapeError
from .geom import AABB2, Grid2D, grid_index
from .ingest.detections import DetectionSet
from .ingest.poses import FramePose
from .raster import render_raster  # noqa: F401  (module surface: rendering lives with hotspot maps)

__all__ = [
    "CountSample",
    "HotspotConfig",
    "Peak",
    "CorrelationResult",
    "localize_counts",
    "abundance_grid",
    "log_transform",
    "correlate_grids",
    "hotspot_peaks",
    "render_raster",
    "peaks_csv",
]

logger = logging.getLogger(__name__)

REDUCERS = ("max", "mean", "sum")


@dataclass(frozen=True)
class CountSample:
    """Fish count observed at one camera position (XY projection)."""

    frame_id: int
    x: float
    y: float
    count: int

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"sample position must be finite, got ({self.x}, {self.y})")
        if self.count < 0:
            raise ValueError(f"count must be non-negative, got {self.count}")


@dataclass(frozen=True)
class HotspotConfig:
    cell_size: float = 0.5
    reducer: str = "max"
    peak_count: int = 5
    peak_min_separation: float = 2.0

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValueError(f"cell_size must be > 0, got {self.cell_size}")
        if self.reducer not in REDUCERS:
            raise ValueError(f"reducer must be one of {REDUCERS}, got {self.reducer!r}")
        if self.peak_count < 0:
            raise ValueError(f"peak_count must be >= 0, got {self.peak_count}")
        if self.peak_min_separation < 0:
            raise ValueError(f"peak_min_separation must be >= 0, got {self.peak_min_separation}")


@dataclass(frozen=True)
class Peak:
    x: float
    y: float
    value: float


@dataclass(frozen=True)
class CorrelationResult:
    """Pearson/Spearman over jointly valid cells; None when undefined."""

    pearson: float | None
    spearman: float | None
    n: int

    @property
    def is_defined(self) -> bool:
        return self.pearson is not None


def localize_counts(
    trajectory: list[FramePose], detections: DetectionSet, conf_threshold: float = 0.25
) -> list[CountSample]:
    """One CountSample per trajectory frame that has a detection record.

    Frames whose detection file marks them observed-empty get count 0;
    frames with no detection record at all are skipped and reported via a
    warning. Detection frames absent from the trajectory raise
    FrameMappingError listing the orphans.
    """
    traj_ids = {fp.frame_id for fp in trajectory}
    orphans = [fid for fid in detections if fid not in traj_ids]
    if orphans:
        raise FrameMappingError(orphans)
    if not trajectory:
        return []

    samples = []
    skipped = 0
    for fp in sorted(trajectory, key=lambda p: p.frame_id):
        frame = detections.get(fp.frame_id)
        if frame is None:
            skipped += 1
            continue
        t = fp.pose.translation
        samples.append(CountSample(fp.frame_id, t.x, t.y, count_fish(frame, conf_threshold)))
    if skipped:
        logger.warning("%d trajectory frames have no detection record and were skipped", skipped)
    return samples


def abundance_grid(samples: list[CountSample], cfg: HotspotConfig, region: AABB2) -> Grid2D:
    """Reduce samples into their containing cells; unvisited cells are no-data."""
    grid = Grid2D.allocate(region, cfg.cell_size)
    buckets: dict[tuple[int, int], list[int]] = {}
    dropped = 0
    for s in samples:
        idx = grid_index(grid, s.x, s.y)
        if idx is None:
            dropped += 1
            continue
        buckets.setdefault(idx, []).append(s.count)
    if dropped:
        logger.warning("%d of %d samples fall outside the grid region", dropped, len(samples))

    for (i, j), counts in buckets.items():
        if cfg.reducer == "max":
            value = max(counts)
        elif cfg.reducer == "mean":
            value = sum(counts) / len(counts)
        else:
            value = sum(counts)
        grid.values[i, j] = value
        grid.valid[i, j] = True
    return grid


def log_transform(grid: Grid2D) -> Grid2D:
    """Map valid cells through ln(1 + value); invalid cells are untouched."""
    vals = grid.values[grid.valid]
    if vals.size and vals.min() < 0:
        raise DomainError(f"log_transform requires values >= 0, found {vals.min()}")
    out = np.where(grid.valid, np.log1p(np.maximum(grid.values, 0.0)), grid.values)
    return grid.with_values(out)


def _average_ranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks with ties averaged."""
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    sorted_x = x[order]
    pos = 0
    while pos < len(x):
        end = pos
        while end + 1 < len(x) and sorted_x[end + 1] == sorted_x[pos]:
            end += 1
        ranks[order[pos : end + 1]] = (pos + 1 + end + 1) / 2.0
        pos = end + 1
    return ranks


def _pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float((xc * xc).sum()) * float((yc * yc).sum()))
    if denom == 0.0:
        return None
    return float((xc * yc).sum()) / denom


def correlate_grids(a: Grid2D, b: Grid2D) -> CorrelationResult:
    """Pearson and Spearman over cells valid in both grids.

    Grids must share origin, cell size, and dimensions. The result is
    undefined (None coefficients) when fewer than 3 cells are jointly valid
    or either grid is constant over them.
    """
    if not a.same_layout(b):
        raise GridShapeError(
            f"grid layouts differ: {a.nx}x{a.ny} cs={a.cell_size} origin=({a.origin_x}, {a.origin_y}) vs "
            f"{b.nx}x{b.ny} cs={b.cell_size} origin=({b.origin_x}, {b.origin_y})"
        )
    joint = a.valid & b.valid
    n = int(joint.sum())
    if n < 3:
        return CorrelationResult(None, None, n)
    xs = a.values[joint]
    ys = b.values[joint]
    pearson = _pearson(xs, ys)
    spearman = _pearson(_average_ranks(xs), _average_ranks(ys))
    return CorrelationResult(pearson, spearman, n)


def hotspot_peaks(grid: Grid2D, cfg: HotspotConfig) -> list[Peak]:
    """Up to ``peak_count`` peaks by greedy non-maximum suppression.

    Valid cells are visited in descending value order (ties by (i, j)); a
    cell within ``peak_min_separation`` of an already-selected peak is
    skipped, so returned peaks are pairwise separated by at least that
    distance.
    """
    candidates = sorted(
        ((-float(grid.values[i, j]), i, j) for i, j in zip(*np.nonzero(grid.valid))),
    )
    peaks: list[Peak] = []
    for neg_value, i, j in candidates:
        if len(peaks) >= cfg.peak_count:
            break
        cx, cy = grid.cell_center(i, j)
        if any(math.hypot(cx - p.x, cy - p.y) < cfg.peak_min_separation for p in peaks):
            continue
        peaks.append(Peak(cx, cy, -neg_value))
    return peaks


def peaks_csv(peaks: list[Peak]) -> str:
    lines = ["rank,x,y,value"]
    for rank, p in enumerate(peaks, 1):
        lines.append(f"{rank},{p.x!r},{p.y!r},{p.value!r}")
    return "\n".join(lines) + "\n"
