"""Lawnmower survey planning and a synthetic-reef simulator.

The simulator builds a heightfield reef (Gaussian bumps plus an optional
logistic-edged pillar), plants a fish density field, walks a survey plan at
constant speed, and emits per-frame detections with configurable
false-positive and miss noise. Every frame draws from its own seeded
substream keyed by ``(scenario seed, frame_id)``, so outputs are
bit-reproducible and independent of evaluation order. Simulator outputs use
exactly the ingest formats (pose CSV, YOLO txt, PLY), so downstream stages
cannot distinguish simulated from field data.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ScenarioConfigError
from .geom import AABB2, Grid2D, PoseSE3, TriangleMesh, Vec3
from .hotspot import (
    CorrelationResult,
    HotspotConfig,
    Peak,
    abundance_grid,
    correlate_grids,
    hotspot_peaks,
    localize_counts,
    log_transform,
)
from .ingest.detections import Detection, DetectionSet
from .ingest.poses import FramePose
from .rugosity import RugosityConfig, rugosity_grid

__all__ = [
    "CameraGeometry",
    "SurveyPlan",
    "GaussianBump",
    "Pillar",
    "FishHotspot",
    "NoiseModel",
    "ReefScenario",
    "EndToEndReport",
    "footprint_dims",
    "plan_lawnmower",
    "plan_csv",
    "reef_height",
    "local_rugosity",
    "fish_density",
    "synth_reef",
    "simulate_frame_detections",
    "simulate_survey",
    "run_end_to_end",
    "load_scenario",
    "scenario_to_dict",
    "truth_csv",
]

# Frames are simulated in fixed-size chunks; chunking is independent of the
# thread count so outputs never depend on parallelism.
_FRAME_CHUNK = 512

# Simulated box sizes as a fraction of image width (small reef fish at 2 m
# altitude) and confidence Beta shapes for true vs spurious detections.
_BOX_SIZE_RANGE = (0.02, 0.06)
_TRUE_CONF_BETA = (8.0, 2.0)
_FALSE_CONF_BETA = (2.0, 5.0)


@dataclass(frozen=True)
class CameraGeometry:
    """Downward-facing survey camera; defaults match the field configuration."""

    altitude: float = 2.0
    hfov_deg: float = 120.0
    vfov_deg: float = 58.0
    fps: float = 6.0
    image_width: int = 3840
    image_height: int = 2160

    def __post_init__(self):
        if self.altitude <= 0:
            raise ValueError(f"altitude must be > 0, got {self.altitude}")
        if not (0 < self.hfov_deg < 180) or not (0 < self.vfov_deg < 180):
            raise ValueError(f"FOV angles must be in (0, 180), got {self.hfov_deg}x{self.vfov_deg}")
        if self.fps <= 0:
            raise ValueError(f"fps must be > 0, got {self.fps}")


def footprint_dims(cam: CameraGeometry) -> tuple[float, float]:
    """Flat-seafloor nadir footprint (width, length) in meters."""
    width = 2.0 * cam.altitude * math.tan(math.radians(cam.hfov_deg) / 2.0)
    length = 2.0 * cam.altitude * math.tan(math.radians(cam.vfov_deg) / 2.0)
    return width, length


@dataclass(frozen=True)
class SurveyPlan:
    """Boustrophedon waypoint list: long transects joined by short cross-steps."""

    waypoints: tuple[tuple[float, float, float], ...]
    track_spacing: float  # nominal spacing from footprint width and overlap
    track_count: int
    speed: float
    travel_axis: str

    def path_length(self) -> float:
        pts = np.asarray(self.waypoints)
        return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())

    def frame_positions(self, fps: float) -> np.ndarray:
        """(n, 3) camera positions when the plan is flown at ``speed`` and ``fps``."""
        return _frame_positions(self, fps)[0]


def plan_lawnmower(
    region: AABB2,
    cam: CameraGeometry,
    overlap: float = 0.2,
    travel_axis: str = "y",
    speed: float = 0.3,
) -> SurveyPlan:
    """Lawnmower coverage plan over a rectangular region.

    The wide FOV axis is oriented across-track, so the nominal track spacing
    is ``footprint_width * (1 - overlap)``. Track count is the ceiling of the
    across-track extent over that spacing; the tracks themselves are then
    distributed evenly (outermost tracks half an effective spacing inside the
    region edge), which keeps every waypoint inside the region and never
    reduces coverage below the nominal plan. A region narrower than one
    footprint gets a single center track.
    """
    if not (0.0 <= overlap < 1.0):
        raise ValueError(f"overlap must be in [0, 1), got {overlap}")
    if travel_axis not in ("x", "y"):
        raise ValueError(f"travel_axis must be 'x' or 'y', got {travel_axis!r}")
    if speed <= 0:
        raise ValueError(f"speed must be > 0, got {speed}")
    if region.width <= 0 or region.height <= 0:
        raise ValueError("region must be non-degenerate")

    width, _ = footprint_dims(cam)
    spacing = width * (1.0 - overlap)
    if travel_axis == "y":
        across_lo, across_extent = region.x_min, region.width
        along_lo, along_hi = region.y_min, region.y_max
    else:
        across_lo, across_extent = region.y_min, region.height
        along_lo, along_hi = region.x_min, region.x_max

    if spacing >= across_extent:
        n_tracks = 1
        positions = [across_lo + across_extent / 2.0]
    else:
        n_tracks = math.ceil(across_extent / spacing - 1e-12)
        effective = across_extent / n_tracks
        positions = [across_lo + (k + 0.5) * effective for k in range(n_tracks)]

    z = -cam.altitude
    waypoints = []
    for k, pos in enumerate(positions):
        ends = (along_lo, along_hi) if k % 2 == 0 else (along_hi, along_lo)
        for along in ends:
            if travel_axis == "y":
                waypoints.append((pos, along, z))
            else:
                waypoints.append((along, pos, z))
    return SurveyPlan(
        waypoints=tuple(waypoints),
        track_spacing=spacing,
        track_count=n_tracks,
        speed=speed,
        travel_axis=travel_axis,
    )


def plan_csv(plan: SurveyPlan) -> str:
    lines = ["idx,x,y,z"]
    for idx, (x, y, z) in enumerate(plan.waypoints):
        lines.append(f"{idx},{x!r},{y!r},{z!r}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------- scenario


@dataclass(frozen=True)
class GaussianBump:
    cx: float
    cy: float
    sigma: float
    height: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"bump sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class Pillar:
    """Steep-sided plateau: height scaled by a logistic of radial distance."""

    cx: float
    cy: float
    radius: float
    height: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"pillar radius must be > 0, got {self.radius}")

    @property
    def edge_width(self) -> float:
        return self.radius / 8.0


@dataclass(frozen=True)
class FishHotspot:
    cx: float
    cy: float
    sigma: float
    peak_density: float  # fish per m^2 at the center

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"hotspot sigma must be > 0, got {self.sigma}")
        if self.peak_density < 0:
            raise ValueError(f"peak_density must be >= 0, got {self.peak_density}")


@dataclass(frozen=True)
class NoiseModel:
    false_positive_rate: float = 0.0  # spurious boxes per frame (Poisson rate)
    miss_probability: float = 0.0  # per-fish probability of no detection

    def __post_init__(self):
        if self.false_positive_rate < 0:
            raise ValueError(f"false_positive_rate must be >= 0, got {self.false_positive_rate}")
        if not (0.0 <= self.miss_probability <= 1.0):
            raise ValueError(f"miss_probability must be in [0, 1], got {self.miss_probability}")


@dataclass(frozen=True)
class ReefScenario:
    """Everything the simulator needs: terrain, fish field, and noise."""

    seed: int
    region: AABB2
    base_depth: float = 2.0
    bumps: tuple[GaussianBump, ...] = ()
    pillar: Pillar | None = None
    fish_base_density: float = 0.0
    fish_hotspots: tuple[FishHotspot, ...] = ()
    rugosity_coupling: float = 0.0  # fish/m^2 per unit of excess local rugosity
    noise: NoiseModel = field(default_factory=NoiseModel)

    def __post_init__(self):
        if self.fish_base_density < 0:
            raise ValueError(f"fish_base_density must be >= 0, got {self.fish_base_density}")
        if self.rugosity_coupling < 0:
            raise ValueError(f"rugosity_coupling must be >= 0, got {self.rugosity_coupling}")


def _stable_logistic(u: np.ndarray) -> np.ndarray:
    """1 / (1 + exp(u)) without overflow."""
    out = np.empty_like(u, dtype=float)
    pos = u >= 0
    eu = np.exp(-u[pos])
    out[pos] = eu / (1.0 + eu)
    out[~pos] = 1.0 / (1.0 + np.exp(u[~pos]))
    return out


def reef_height(scn: ReefScenario, x, y):
    """Heightfield z(x, y): base depth plus bumps plus the pillar plateau."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.full(np.broadcast(x, y).shape, -scn.base_depth)
    for b in scn.bumps:
        z = z + b.height * np.exp(-((x - b.cx) ** 2 + (y - b.cy) ** 2) / (2.0 * b.sigma**2))
    if scn.pillar is not None:
        p = scn.pillar
        r = np.hypot(x - p.cx, y - p.cy)
        z = z + p.height * _stable_logistic((r - p.radius) / p.edge_width)
    return z if z.shape else float(z)


def _reef_slope(scn: ReefScenario, x, y):
    """Analytic gradient (dz/dx, dz/dy) of the heightfield."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(x, y).shape
    dzdx = np.zeros(shape)
    dzdy = np.zeros(shape)
    for b in scn.bumps:
        g = b.height * np.exp(-((x - b.cx) ** 2 + (y - b.cy) ** 2) / (2.0 * b.sigma**2))
        dzdx = dzdx - g * (x - b.cx) / b.sigma**2
        dzdy = dzdy - g * (y - b.cy) / b.sigma**2
    if scn.pillar is not None:
        p = scn.pillar
        rx = x - p.cx
        ry = y - p.cy
        r = np.hypot(rx, ry)
        logistic = _stable_logistic((r - p.radius) / p.edge_width)
        dz_dr = -p.height * logistic * (1.0 - logistic) / p.edge_width
        safe_r = np.where(r > 1e-12, r, 1.0)
        dzdx = dzdx + np.where(r > 1e-12, dz_dr * rx / safe_r, 0.0)
        dzdy = dzdy + np.where(r > 1e-12, dz_dr * ry / safe_r, 0.0)
    return dzdx, dzdy


def local_rugosity(scn: ReefScenario, x, y):
    """Pointwise surface-to-planar area ratio sqrt(1 + |grad z|^2)."""
    dzdx, dzdy = _reef_slope(scn, x, y)
    r = np.sqrt(1.0 + dzdx**2 + dzdy**2)
    return r if r.shape else float(r)


def fish_density(scn: ReefScenario, x, y):
    """Fish per m^2: base plus Gaussian hotspots plus rugosity coupling."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = np.full(np.broadcast(x, y).shape, float(scn.fish_base_density))
    for h in scn.fish_hotspots:
        d = d + h.peak_density * np.exp(-((x - h.cx) ** 2 + (y - h.cy) ** 2) / (2.0 * h.sigma**2))
    if scn.rugosity_coupling > 0:
        d = d + scn.rugosity_coupling * (local_rugosity(scn, x, y) - 1.0)
    return d if d.shape else float(d)


def synth_reef(scn: ReefScenario, vertex_spacing: float) -> TriangleMesh:
    """Heightfield mesh sampled on a regular grid, each quad split in two.

    Deterministic given the scenario; the interior is watertight (every
    interior edge is shared by exactly two triangles).
    """
    if vertex_spacing <= 0:
        raise ValueError(f"vertex_spacing must be > 0, got {vertex_spacing}")
    region = scn.region
    nx = max(1, round(region.width / vertex_spacing))
    ny = max(1, round(region.height / vertex_spacing))
    xs = np.linspace(region.x_min, region.x_max, nx + 1)
    ys = np.linspace(region.y_min, region.y_max, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = reef_height(scn, X, Y)
    vertices = np.column_stack([X.ravel(), Y.ravel(), np.asarray(Z).ravel()])

    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    v00 = (ii * (ny + 1) + jj).ravel()
    v10 = ((ii + 1) * (ny + 1) + jj).ravel()
    v11 = ((ii + 1) * (ny + 1) + jj + 1).ravel()
    v01 = (ii * (ny + 1) + jj + 1).ravel()
    faces = np.empty((2 * nx * ny, 3), dtype=np.int64)
    faces[0::2] = np.column_stack([v00, v10, v11])
    faces[1::2] = np.column_stack([v00, v11, v01])
    return TriangleMesh(vertices, faces)


# --------------------------------------------------------------- simulation


def _frame_rng(scn: ReefScenario, frame_id: int) -> np.random.Generator:
    return np.random.default_rng([int(scn.seed) & 0x7FFFFFFF, int(frame_id)])


def simulate_frame_detections(
    scn: ReefScenario, cam: CameraGeometry, frame_id: int, x: float, y: float
) -> list[Detection]:
    """Detections for one frame at camera position (x, y).

    The expected true count is the density at the footprint center times the
    footprint area; the observed set is that count Poisson-sampled, thinned
    by the miss probability, plus Poisson false positives. Draw order within
    the frame's substream is fixed, so any frame reproduces in isolation.
    """
    rng = _frame_rng(scn, frame_id)
    fw, fl = footprint_dims(cam)
    expected = float(fish_density(scn, x, y)) * fw * fl
    true_count = int(rng.poisson(expected))
    kept = int(rng.binomial(true_count, 1.0 - scn.noise.miss_probability)) if true_count else 0
    n_false = int(rng.poisson(scn.noise.false_positive_rate))

    detections = []
    for is_true in [True] * kept + [False] * n_false:
        w = float(rng.uniform(*_BOX_SIZE_RANGE))
        h = float(rng.uniform(*_BOX_SIZE_RANGE))
        cx = float(rng.uniform(0.0, 1.0))
        cy = float(rng.uniform(0.0, 1.0))
        a, b = _TRUE_CONF_BETA if is_true else _FALSE_CONF_BETA
        conf = float(rng.beta(a, b))
        detections.append(Detection(0, cx, cy, w, h, conf))
    return detections


def _frame_positions(plan: SurveyPlan, fps: float) -> tuple[np.ndarray, np.ndarray]:
    """Camera positions (n, 3) and segment headings (n, 3) along the plan."""
    pts = np.asarray(plan.waypoints, dtype=float)
    seg = np.diff(pts, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = float(cum[-1])
    step = plan.speed / fps
    n_frames = int(math.floor(total / step + 1e-9)) + 1
    s = np.minimum(np.arange(n_frames) * step, total)
    idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seg) - 1)
    denom = np.where(seg_len[idx] > 0, seg_len[idx], 1.0)
    t = (s - cum[idx]) / denom
    return pts[idx] + t[:, None] * seg[idx], seg[idx]


def simulate_survey(
    plan: SurveyPlan, cam: CameraGeometry, scn: ReefScenario, threads: int = 1
) -> tuple[list[FramePose], DetectionSet]:
    """Walk the plan at constant speed and synthesize per-frame detections.

    Every frame gets a pose (camera yawed along the travel direction) and a
    detection record; frames with nothing detected are observed-empty.
    Bit-reproducible for a fixed scenario seed at any thread count.
    """
    positions, headings = _frame_positions(plan, cam.fps)
    trajectory = []
    for k, (pos, head) in enumerate(zip(positions, headings)):
        yaw = math.atan2(head[1], head[0])
        q = (math.cos(yaw / 2.0), 0.0, 0.0, math.sin(yaw / 2.0))
        trajectory.append(FramePose(k, k / cam.fps, PoseSE3(Vec3(*pos), q)))

    def chunk_detections(frame_ids) -> list[list[Detection]]:
        return [
            simulate_frame_detections(scn, cam, int(fid), positions[fid][0], positions[fid][1])
            for fid in frame_ids
        ]

    chunks = [range(k, min(k + _FRAME_CHUNK, len(positions))) for k in range(0, len(positions), _FRAME_CHUNK)]
    if threads == 1 or len(chunks) == 1:
        results = [chunk_detections(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(chunk_detections, chunks))
    detections: DetectionSet = {}
    for chunk, frames in zip(chunks, results):
        for fid, frame in zip(chunk, frames):
            detections[fid] = frame
    return trajectory, detections


# ------------------------------------------------------------- end to end


@dataclass(frozen=True)
class EndToEndReport:
    """Planted ground truth versus what the pipeline recovered."""

    plan: SurveyPlan
    n_frames: int
    abundance: Grid2D
    log_abundance: Grid2D
    rugosity: Grid2D
    peaks: list[Peak]
    planted: tuple[FishHotspot, ...]
    top_peak_offset: float | None  # top recovered peak to nearest planted center
    peak_offsets: list[float]  # per planted hotspot: distance to nearest peak
    correlation: CorrelationResult


def run_end_to_end(
    scn: ReefScenario,
    cam: CameraGeometry | None = None,
    overlap: float = 0.2,
    conf_threshold: float = 0.25,
    cell_size: float = 0.5,
    vertex_spacing: float = 0.125,
    threads: int = 1,
) -> EndToEndReport:
    """Full pipeline on synthetic data: plan, simulate, map, and score.

    Runs plan -> simulate -> abundance -> log -> peaks alongside
    reef -> rugosity, and correlates the two grids over jointly valid cells.
    """
    cam = cam or CameraGeometry()
    plan = plan_lawnmower(scn.region, cam, overlap)
    trajectory, detections = simulate_survey(plan, cam, scn, threads=threads)
    samples = localize_counts(trajectory, detections, conf_threshold)

    hcfg = HotspotConfig(cell_size=cell_size)
    abundance = abundance_grid(samples, hcfg, scn.region)
    log_abundance = log_transform(abundance)
    peaks = hotspot_peaks(log_abundance, hcfg)

    mesh = synth_reef(scn, vertex_spacing)
    rugosity = rugosity_grid(mesh, RugosityConfig(cell_size=cell_size, region=scn.region), threads=threads)
    correlation = correlate_grids(rugosity, abundance)

    top_peak_offset = None
    if peaks and scn.fish_hotspots:
        top = peaks[0]
        top_peak_offset = min(math.hypot(top.x - h.cx, top.y - h.cy) for h in scn.fish_hotspots)
    peak_offsets = [
        min((math.hypot(p.x - h.cx, p.y - h.cy) for p in peaks), default=math.inf)
        for h in scn.fish_hotspots
    ]

    return EndToEndReport(
        plan=plan,
        n_frames=len(trajectory),
        abundance=abundance,
        log_abundance=log_abundance,
        rugosity=rugosity,
        peaks=peaks,
        planted=scn.fish_hotspots,
        top_peak_offset=top_peak_offset,
        peak_offsets=peak_offsets,
        correlation=correlation,
    )


# --------------------------------------------------------- scenario config


def _check_keys(obj: dict, allowed: set[str], path: str):
    unknown = set(obj) - allowed
    if unknown:
        raise ScenarioConfigError(f"{path}.{sorted(unknown)[0]}" if path else sorted(unknown)[0], "unknown key")


def _get_number(obj: dict, key: str, path: str, default=None, required=False):
    if key not in obj:
        if required:
            raise ScenarioConfigError(f"{path}{key}", "missing required key")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioConfigError(f"{path}{key}", f"expected a number, got {type(v).__name__}")
    return float(v)


def _parse_bump(obj, path) -> GaussianBump:
    if not isinstance(obj, dict):
        raise ScenarioConfigError(path, "expected an object")
    _check_keys(obj, {"cx", "cy", "sigma", "height"}, path)
    try:
        return GaussianBump(
            cx=_get_number(obj, "cx", f"{path}.", required=True),
            cy=_get_number(obj, "cy", f"{path}.", required=True),
            sigma=_get_number(obj, "sigma", f"{path}.", required=True),
            height=_get_number(obj, "height", f"{path}.", required=True),
        )
    except ValueError as exc:
        raise ScenarioConfigError(path, str(exc)) from None


def _parse_hotspot(obj, path) -> FishHotspot:
    if not isinstance(obj, dict):
        raise ScenarioConfigError(path, "expected an object")
    _check_keys(obj, {"cx", "cy", "sigma", "peak_density"}, path)
    try:
        return FishHotspot(
            cx=_get_number(obj, "cx", f"{path}.", required=True),
            cy=_get_number(obj, "cy", f"{path}.", required=True),
            sigma=_get_number(obj, "sigma", f"{path}.", required=True),
            peak_density=_get_number(obj, "peak_density", f"{path}.", required=True),
        )
    except ValueError as exc:
        raise ScenarioConfigError(path, str(exc)) from None


def load_scenario(source: dict | str | Path) -> ReefScenario:
    """Build a ReefScenario from a JSON file path or an already-parsed dict.

    Raises ScenarioConfigError naming the failing key path on any schema
    violation. See ``scenarios/`` in the repository for examples.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.is_file():
            raise ScenarioConfigError(str(path), "scenario file does not exist")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ScenarioConfigError(str(path), f"invalid JSON: {exc}") from None
    else:
        data = source
    if not isinstance(data, dict):
        raise ScenarioConfigError("<root>", "scenario must be a JSON object")

    _check_keys(data, {"seed", "region", "base_depth", "bumps", "pillar", "fish", "noise"}, "")

    seed = data.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ScenarioConfigError("seed", "expected an integer")

    region_raw = data.get("region")
    if not (isinstance(region_raw, (list, tuple)) and len(region_raw) == 4):
        raise ScenarioConfigError("region", "expected [x_min, y_min, x_max, y_max]")
    try:
        region = AABB2(*(float(v) for v in region_raw))
    except (TypeError, ValueError) as exc:
        raise ScenarioConfigError("region", str(exc)) from None

    bumps_raw = data.get("bumps", [])
    if not isinstance(bumps_raw, list):
        raise ScenarioConfigError("bumps", "expected a list")
    bumps = tuple(_parse_bump(b, f"bumps[{k}]") for k, b in enumerate(bumps_raw))

    pillar = None
    if data.get("pillar") is not None:
        p = data["pillar"]
        if not isinstance(p, dict):
            raise ScenarioConfigError("pillar", "expected an object or null")
        _check_keys(p, {"cx", "cy", "radius", "height"}, "pillar")
        try:
            pillar = Pillar(
                cx=_get_number(p, "cx", "pillar.", required=True),
                cy=_get_number(p, "cy", "pillar.", required=True),
                radius=_get_number(p, "radius", "pillar.", required=True),
                height=_get_number(p, "height", "pillar.", required=True),
            )
        except ValueError as exc:
            raise ScenarioConfigError("pillar", str(exc)) from None

    fish = data.get("fish", {})
    if not isinstance(fish, dict):
        raise ScenarioConfigError("fish", "expected an object")
    _check_keys(fish, {"base_density", "hotspots", "rugosity_coupling"}, "fish")
    hotspots_raw = fish.get("hotspots", [])
    if not isinstance(hotspots_raw, list):
        raise ScenarioConfigError("fish.hotspots", "expected a list")
    hotspots = tuple(_parse_hotspot(h, f"fish.hotspots[{k}]") for k, h in enumerate(hotspots_raw))

    noise_raw = data.get("noise", {})
    if not isinstance(noise_raw, dict):
        raise ScenarioConfigError("noise", "expected an object")
    _check_keys(noise_raw, {"false_positive_rate", "miss_probability"}, "noise")

    try:
        return ReefScenario(
            seed=seed,
            region=region,
            base_depth=_get_number(data, "base_depth", "", default=2.0),
            bumps=bumps,
            pillar=pillar,
            fish_base_density=_get_number(fish, "base_density", "fish.", default=0.0),
            fish_hotspots=hotspots,
            rugosity_coupling=_get_number(fish, "rugosity_coupling", "fish.", default=0.0),
            noise=NoiseModel(
                false_positive_rate=_get_number(noise_raw, "false_positive_rate", "noise.", default=0.0),
                miss_probability=_get_number(noise_raw, "miss_probability", "noise.", default=0.0),
            ),
        )
    except ValueError as exc:
        raise ScenarioConfigError("<root>", str(exc)) from None


def scenario_to_dict(scn: ReefScenario) -> dict:
    """Inverse of load_scenario for writing the effective scenario to disk."""
    return {
        "seed": scn.seed,
        "region": [scn.region.x_min, scn.region.y_min, scn.region.x_max, scn.region.y_max],
        "base_depth": scn.base_depth,
        "bumps": [
            {"cx": b.cx, "cy": b.cy, "sigma": b.sigma, "height": b.height} for b in scn.bumps
        ],
        "pillar": (
            None
            if scn.pillar is None
            else {
                "cx": scn.pillar.cx,
                "cy": scn.pillar.cy,
                "radius": scn.pillar.radius,
                "height": scn.pillar.height,
            }
        ),
        "fish": {
            "base_density": scn.fish_base_density,
            "hotspots": [
                {"cx": h.cx, "cy": h.cy, "sigma": h.sigma, "peak_density": h.peak_density}
                for h in scn.fish_hotspots
            ],
            "rugosity_coupling": scn.rugosity_coupling,
        },
        "noise": {
            "false_positive_rate": scn.noise.false_positive_rate,
            "miss_probability": scn.noise.miss_probability,
        },
    }


def truth_csv(scn: ReefScenario) -> str:
    """Planted structure for later scoring: one row per hotspot/bump/pillar."""
    lines = ["kind,cx,cy,scale,magnitude"]
    for h in scn.fish_hotspots:
        lines.append(f"hotspot,{h.cx!r},{h.cy!r},{h.sigma!r},{h.peak_density!r}")
    for b in scn.bumps:
        lines.append(f"bump,{b.cx!r},{b.cy!r},{b.sigma!r},{b.height!r}")
    if scn.pillar is not None:
        p = scn.pillar
        lines.append(f"pillar,{p.cx!r},{p.cy!r},{p.radius!r},{p.height!r}")
    return "\n".join(lines) + "\n"
