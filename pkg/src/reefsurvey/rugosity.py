"""Per-cell rugosity: true 3D surface area over planar cell area.

Each mesh triangle is clipped exactly against the rectangle of every grid
cell it overlaps (Sutherland-Hodgman against the four cell edges in XY).
Clip vertices are interpolated linearly along triangle edges, which keeps
them on the original triangle's plane (equivalent to barycentric recovery
of Z), so the clipped pieces are planar 3D polygons and their areas sum to
the exact triangle area. Cells partition the plane under the half-open
indexing convention, which makes total clipped area conserve the mesh
surface area to rounding error.

Accumulation order is fixed (fast-path triangles first, then straddling
triangles in index order, in fixed-size chunks), so results are bit-identical
at any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geom import AABB2, Grid2D, TriangleMesh

__all__ = [
    "RugosityConfig",
    "GridStats",
    "clip_triangle_to_rect",
    "polygon_area_3d",
    "accumulate_clipped_areas",
    "rugosity_grid",
    "rugosity_stats",
]

# Straddling triangles are processed in fixed-size chunks so floating-point
# accumulation order does not depend on the thread count.
_CHUNK = 4096


@dataclass(frozen=True)
class RugosityConfig:
    """Grid geometry and validity rule for rugosity_grid.

    ``region`` defaults to the mesh XY bounding box. Cells whose projected
    mesh coverage is below ``min_coverage_fraction`` of the cell area are
    marked no-data instead of reporting misleadingly low rugosity.
    """

    cell_size: float = 0.5
    region: AABB2 | None = None
    min_coverage_fraction: float = 0.5

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValueError(f"cell_size must be > 0, got {self.cell_size}")
        if not (0.0 <= self.min_coverage_fraction <= 1.0):
            raise ValueError(
                f"min_coverage_fraction must be in [0, 1], got {self.min_coverage_fraction}"
            )


@dataclass(frozen=True)
class GridStats:
    """Summary over valid cells; count 0 means no valid cells."""

    count: int
    minimum: float | None = None
    maximum: float | None = None
    mean: float | None = None

    @property
    def is_empty(self) -> bool:
        return self.count == 0


def _clip_halfplane(poly: list, axis: int, bound: float, keep_ge: bool) -> list:
    out = []
    n = len(poly)
    for k in range(n):
        cur = poly[k]
        prev = poly[k - 1]
        cur_in = (cur[axis] >= bound) if keep_ge else (cur[axis] <= bound)
        prev_in = (prev[axis] >= bound) if keep_ge else (prev[axis] <= bound)
        if cur_in != prev_in:
            t = (bound - prev[axis]) / (cur[axis] - prev[axis])
            out.append(
                (
                    prev[0] + t * (cur[0] - prev[0]),
                    prev[1] + t * (cur[1] - prev[1]),
                    prev[2] + t * (cur[2] - prev[2]),
                )
            )
        if cur_in:
            out.append(cur)
    return out


def _clip_to_bounds(tri, x_lo, x_hi, y_lo, y_hi) -> list:
    poly = [tuple(map(float, v)) for v in tri]
    poly = _clip_halfplane(poly, 0, x_lo, True)
    if poly:
        poly = _clip_halfplane(poly, 0, x_hi, False)
    if poly:
        poly = _clip_halfplane(poly, 1, y_lo, True)
    if poly:
        poly = _clip_halfplane(poly, 1, y_hi, False)
    return poly


def clip_triangle_to_rect(tri, rect: AABB2) -> np.ndarray:
    """Clip a 3D triangle against a rectangle's XY extent.

    Returns the clipped planar polygon as a (k, 3) array, possibly empty,
    with up to 7 vertices.
    """
    poly = _clip_to_bounds(np.asarray(tri, dtype=float), rect.x_min, rect.x_max, rect.y_min, rect.y_max)
    if not poly:
        return np.empty((0, 3))
    return np.asarray(poly)


def _poly_area_3d(poly: list) -> float:
    if len(poly) < 3:
        return 0.0
    x0, y0, z0 = poly[0]
    total = 0.0
    for k in range(1, len(poly) - 1):
        ax = poly[k][0] - x0
        ay = poly[k][1] - y0
        az = poly[k][2] - z0
        bx = poly[k + 1][0] - x0
        by = poly[k + 1][1] - y0
        bz = poly[k + 1][2] - z0
        cx = ay * bz - az * by
        cy = az * bx - ax * bz
        cz = ax * by - ay * bx
        total += 0.5 * math.sqrt(cx * cx + cy * cy + cz * cz)
    return total


def _poly_area_xy(poly: list) -> float:
    if len(poly) < 3:
        return 0.0
    s = 0.0
    n = len(poly)
    for k in range(n):
        x1, y1 = poly[k][0], poly[k][1]
        x2, y2 = poly[(k + 1) % n][0], poly[(k + 1) % n][1]
        s += x1 * y2 - x2 * y1
    return abs(s) / 2.0


def polygon_area_3d(poly) -> float:
    """Fan-triangulated area of a planar 3D polygon; 0 for fewer than 3 vertices."""
    arr = np.asarray(poly, dtype=float)
    if arr.size == 0:
        return 0.0
    return _poly_area_3d([tuple(v) for v in arr])


def _straddler_chunk(tris, indices, grid: Grid2D):
    """Clip one chunk of straddling triangles; contributions in index order."""
    x0, y0, cs = grid.origin_x, grid.origin_y, grid.cell_size
    nx, ny = grid.nx, grid.ny
    out_i: list[int] = []
    out_j: list[int] = []
    out_a3: list[float] = []
    out_ap: list[float] = []
    for t in indices:
        tri = tris[t]
        xs = tri[:, 0]
        ys = tri[:, 1]
        i_lo = max(0, math.floor((xs.min() - x0) / cs))
        i_hi = min(nx - 1, math.floor((xs.max() - x0) / cs))
        j_lo = max(0, math.floor((ys.min() - y0) / cs))
        j_hi = min(ny - 1, math.floor((ys.max() - y0) / cs))
        if i_lo > i_hi or j_lo > j_hi:
            continue
        for i in range(i_lo, i_hi + 1):
            cx_lo = x0 + i * cs
            cx_hi = cx_lo + cs
            for j in range(j_lo, j_hi + 1):
                cy_lo = y0 + j * cs
                poly = _clip_to_bounds(tri, cx_lo, cx_hi, cy_lo, cy_lo + cs)
                if len(poly) < 3:
                    continue
                a3 = _poly_area_3d(poly)
                if a3 == 0.0:
                    continue
                out_i.append(i)
                out_j.append(j)
                out_a3.append(a3)
                out_ap.append(_poly_area_xy(poly))
    return out_i, out_j, out_a3, out_ap


def accumulate_clipped_areas(
    mesh: TriangleMesh, grid: Grid2D, threads: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell clipped 3D area and projected XY area, both (nx, ny).

    Covers every cell, including ones that will later be marked no-data; on a
    grid covering the mesh bounds the 3D array sums to the mesh surface area.
    Output is bit-identical for any ``threads`` value.
    """
    area3d = np.zeros((grid.nx, grid.ny))
    areaproj = np.zeros((grid.nx, grid.ny))
    if mesh.num_faces == 0:
        return area3d, areaproj

    tris = mesh.triangles()
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    cross = np.cross(e1, e2)
    tri_a3 = 0.5 * np.linalg.norm(cross, axis=1)
    tri_ap = 0.5 * np.abs(cross[:, 2])

    x0, y0, cs = grid.origin_x, grid.origin_y, grid.cell_size
    i_lo = np.floor((tris[:, :, 0].min(axis=1) - x0) / cs).astype(np.int64)
    i_hi = np.floor((tris[:, :, 0].max(axis=1) - x0) / cs).astype(np.int64)
    j_lo = np.floor((tris[:, :, 1].min(axis=1) - y0) / cs).astype(np.int64)
    j_hi = np.floor((tris[:, :, 1].max(axis=1) - y0) / cs).astype(np.int64)

    single = (i_lo == i_hi) & (j_lo == j_hi)
    inside = single & (i_lo >= 0) & (i_lo < grid.nx) & (j_lo >= 0) & (j_lo < grid.ny)
    np.add.at(area3d, (i_lo[inside], j_lo[inside]), tri_a3[inside])
    np.add.at(areaproj, (i_lo[inside], j_lo[inside]), tri_ap[inside])

    straddlers = np.nonzero(~single)[0]
    if straddlers.size == 0:
        return area3d, areaproj

    chunks = [straddlers[k : k + _CHUNK] for k in range(0, straddlers.size, _CHUNK)]
    if threads == 1 or len(chunks) == 1:
        results = (_straddler_chunk(tris, c, grid) for c in chunks)
        for ii, jj, a3, ap in results:
            np.add.at(area3d, (ii, jj), a3)
            np.add.at(areaproj, (ii, jj), ap)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for ii, jj, a3, ap in pool.map(lambda c: _straddler_chunk(tris, c, grid), chunks):
                np.add.at(area3d, (ii, jj), a3)
                np.add.at(areaproj, (ii, jj), ap)
    return area3d, areaproj


def rugosity_grid(mesh: TriangleMesh, cfg: RugosityConfig | None = None, threads: int = 1) -> Grid2D:
    """Rugosity raster: per-cell clipped 3D area divided by the cell area.

    Cells with projected coverage below ``cfg.min_coverage_fraction`` are
    no-data. Overhanging sheets all contribute, so values can exceed the
    single-sheet slope bound. An empty mesh yields an all-invalid grid.
    """
    cfg = cfg or RugosityConfig()
    if cfg.region is not None:
        region = cfg.region
    elif mesh.num_vertices:
        region = mesh.xy_bounds()
    else:
        region = AABB2(0.0, 0.0, cfg.cell_size, cfg.cell_size)
    grid = Grid2D.allocate(region, cfg.cell_size)

    area3d, areaproj = accumulate_clipped_areas(mesh, grid, threads=threads)
    cell_area = cfg.cell_size * cfg.cell_size
    coverage = areaproj / cell_area
    valid = coverage >= cfg.min_coverage_fraction - 1e-12
    values = np.where(valid, area3d / cell_area, 0.0)
    grid.values = values
    grid.valid = valid
    return grid


def rugosity_stats(grid: Grid2D) -> GridStats:
    """Min/max/mean over valid cells; empty summary when no cell is valid."""
    vals = grid.values[grid.valid]
    if vals.size == 0:
        return GridStats(count=0)
    return GridStats(
        count=int(vals.size),
        minimum=float(vals.min()),
        maximum=float(vals.max()),
        mean=float(vals.mean()),
    )
