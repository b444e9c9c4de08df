"""Core geometric types and exact primitive operations.

Conventions used throughout the toolkit:

* World frame is Z-up; rugosity and abundance grids live in the XY plane.
  A Z-down reconstruction must be flipped before ingestion.
* Quaternions are scalar-first ``(w, x, y, z)``.
* Grid cell ``(i, j)`` spans the half-open square
  ``[x0 + i*cs, x0 + (i+1)*cs) x [y0 + j*cs, y0 + (j+1)*cs)``, so every
  point belongs to exactly one cell.

All types are immutable after construction and all operations are pure
functions, so everything here is safe for concurrent read access.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Vec3",
    "PoseSE3",
    "TriangleMesh",
    "Grid2D",
    "AABB2",
    "triangle_area_3d",
    "pose_apply",
    "grid_index",
    "mesh_surface_area",
]

# Construction renormalizes quaternions whose norm is off by at most this much;
# anything worse is rejected as corrupt data rather than silently fixed.
QUAT_NORM_TOLERANCE = 1e-3


@dataclass(frozen=True)
class Vec3:
    """Point or vector in the world frame, meters."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"Vec3.{name} must be finite, got {v!r}")
            object.__setattr__(self, name, float(v))

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y, self.z], dtype=dtype or float)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    @classmethod
    def from_array(cls, a) -> "Vec3":
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class PoseSE3:
    """Rigid camera pose: translation plus scalar-first unit quaternion.

    Quaternions within ``QUAT_NORM_TOLERANCE`` of unit norm are renormalized
    at construction; worse inputs raise ValueError. After construction the
    stored norm is within 1e-6 of 1.
    """

    translation: Vec3
    rotation: tuple[float, float, float, float]  # (w, x, y, z)

    def __post_init__(self):
        q = tuple(float(c) for c in self.rotation)
        if len(q) != 4 or not all(math.isfinite(c) for c in q):
            raise ValueError(f"quaternion must be 4 finite components, got {self.rotation!r}")
        norm = math.sqrt(sum(c * c for c in q))
        if abs(norm - 1.0) > QUAT_NORM_TOLERANCE:
            raise ValueError(f"quaternion norm {norm:.6g} outside unit tolerance {QUAT_NORM_TOLERANCE}")
        object.__setattr__(self, "rotation", tuple(c / norm for c in q))

    @classmethod
    def identity(cls) -> "PoseSE3":
        return cls(Vec3(0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0))

    def rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self.rotation
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )

    def apply(self, p: Vec3) -> Vec3:
        return pose_apply(self, p)


def pose_apply(pose: PoseSE3, p: Vec3) -> Vec3:
    """Transform point ``p`` by the pose: ``R @ p + t``."""
    out = pose.rotation_matrix() @ np.asarray(p) + np.asarray(pose.translation)
    return Vec3.from_array(out)


class TriangleMesh:
    """Indexed triangle surface from photogrammetry.

    Vertices are stored as an ``(n, 3)`` float64 array and faces as an
    ``(m, 3)`` int64 array of vertex indices. Degenerate (zero-area) faces
    are legal and contribute zero area everywhere. Arrays are frozen after
    construction.
    """

    def __init__(self, vertices, faces):
        v = np.asarray(vertices, dtype=np.float64)
        if v.size == 0:
            v = v.reshape(0, 3)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"vertices must be (n, 3), got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertex coordinates must be finite")

        f = np.asarray(faces, dtype=np.int64)
        if f.size == 0:
            f = f.reshape(0, 3)
        if f.ndim != 2 or f.shape[1] != 3:
            raise ValueError(f"faces must be (m, 3), got shape {f.shape}")
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            bad = np.nonzero((f < 0) | (f >= len(v)))[0][0]
            raise ValueError(f"face {bad} references vertex index outside [0, {len(v)})")

        v.setflags(write=False)
        f.setflags(write=False)
        self.vertices = v
        self.faces = f

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    def triangles(self) -> np.ndarray:
        """Per-face vertex coordinates, shape (m, 3, 3)."""
        return self.vertices[self.faces]

    def xy_bounds(self) -> "AABB2":
        if self.num_vertices == 0:
            raise ValueError("empty mesh has no bounds")
        return AABB2(
            float(self.vertices[:, 0].min()),
            float(self.vertices[:, 1].min()),
            float(self.vertices[:, 0].max()),
            float(self.vertices[:, 1].max()),
        )


@dataclass(frozen=True)
class AABB2:
    """Axis-aligned rectangle in the XY plane, meters."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        vals = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"AABB2 bounds must be finite, got {vals!r}")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"AABB2 min must be <= max, got {vals!r}")
        for name in ("x_min", "y_min", "x_max", "y_max"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def expanded(self, margin: float) -> "AABB2":
        return AABB2(self.x_min - margin, self.y_min - margin, self.x_max + margin, self.y_max + margin)

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass
class Grid2D:
    """Axis-aligned XY raster with a no-data mask.

    ``values`` and ``valid`` are ``(nx, ny)`` arrays indexed ``[i, j]`` where
    ``i`` runs along x and ``j`` along y. Invalid cells carry no semantic
    value and are excluded from all statistics; their stored value is 0.
    """

    origin_x: float
    origin_y: float
    cell_size: float
    nx: int
    ny: int
    values: np.ndarray = field(repr=False)
    valid: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValueError(f"cell_size must be > 0, got {self.cell_size}")
        if self.nx < 1 or self.ny < 1:
            raise ValueError(f"grid must have at least one cell, got {self.nx}x{self.ny}")
        self.origin_x = float(self.origin_x)
        self.origin_y = float(self.origin_y)
        self.cell_size = float(self.cell_size)
        self.values = np.asarray(self.values, dtype=np.float64)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.values.shape != (self.nx, self.ny) or self.valid.shape != (self.nx, self.ny):
            raise ValueError(
                f"values/valid must have shape ({self.nx}, {self.ny}), "
                f"got {self.values.shape} and {self.valid.shape}"
            )

    @classmethod
    def allocate(cls, region: AABB2, cell_size: float) -> "Grid2D":
        """All-invalid grid whose cells cover ``region`` completely."""
        if cell_size <= 0:
            raise ValueError(f"cell_size must be > 0, got {cell_size}")
        nx = max(1, math.ceil(region.width / cell_size - 1e-9))
        ny = max(1, math.ceil(region.height / cell_size - 1e-9))
        return cls(
            origin_x=region.x_min,
            origin_y=region.y_min,
            cell_size=cell_size,
            nx=nx,
            ny=ny,
            values=np.zeros((nx, ny)),
            valid=np.zeros((nx, ny), dtype=bool),
        )

    def cell_center(self, i: int, j: int) -> tuple[float, float]:
        return (
            self.origin_x + (i + 0.5) * self.cell_size,
            self.origin_y + (j + 0.5) * self.cell_size,
        )

    def cell_rect(self, i: int, j: int) -> AABB2:
        cs = self.cell_size
        return AABB2(
            self.origin_x + i * cs,
            self.origin_y + j * cs,
            self.origin_x + (i + 1) * cs,
            self.origin_y + (j + 1) * cs,
        )

    def index(self, x: float, y: float) -> tuple[int, int] | None:
        return grid_index(self, x, y)

    def same_layout(self, other: "Grid2D", tol: float = 1e-9) -> bool:
        return (
            self.nx == other.nx
            and self.ny == other.ny
            and math.isclose(self.cell_size, other.cell_size, rel_tol=tol, abs_tol=tol)
            and math.isclose(self.origin_x, other.origin_x, rel_tol=tol, abs_tol=tol)
            and math.isclose(self.origin_y, other.origin_y, rel_tol=tol, abs_tol=tol)
        )

    def with_values(self, values: np.ndarray, valid: np.ndarray | None = None) -> "Grid2D":
        return Grid2D(
            origin_x=self.origin_x,
            origin_y=self.origin_y,
            cell_size=self.cell_size,
            nx=self.nx,
            ny=self.ny,
            values=np.array(values, dtype=np.float64),
            valid=np.array(self.valid if valid is None else valid, dtype=bool),
        )


def triangle_area_3d(v0, v1, v2) -> float:
    """Area of the 3D triangle: half the cross-product magnitude of its edges.

    Degenerate (collinear) triangles return 0.
    """
    a = np.asarray(v1, dtype=float) - np.asarray(v0, dtype=float)
    b = np.asarray(v2, dtype=float) - np.asarray(v0, dtype=float)
    c = np.cross(a, b)
    return 0.5 * float(np.linalg.norm(c))


def grid_index(grid: Grid2D, x: float, y: float) -> tuple[int, int] | None:
    """Cell containing ``(x, y)`` under the half-open convention, or None.

    Points on a cell's max edge belong to the next cell over; points on the
    grid's overall max edge are outside.
    """
    i = math.floor((x - grid.origin_x) / grid.cell_size)
    j = math.floor((y - grid.origin_y) / grid.cell_size)
    if 0 <= i < grid.nx and 0 <= j < grid.ny:
        return (int(i), int(j))
    return None


def mesh_surface_area(mesh: TriangleMesh) -> float:
    """Total 3D surface area: sum of triangle_area_3d over all faces."""
    if mesh.num_faces == 0:
        return 0.0
    tri = mesh.triangles()
    cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    return 0.5 * float(np.linalg.norm(cross, axis=1).sum())
