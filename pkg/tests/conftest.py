import numpy as np
import pytest

from reefsurvey.geom import AABB2, TriangleMesh


def make_random_mesh(rng, n_vertices: int = 30, n_faces: int = 50, span: float = 5.0) -> TriangleMesh:
    vertices = rng.uniform(-span, span, size=(n_vertices, 3))
    faces = rng.integers(0, n_vertices, size=(n_faces, 3))
    return TriangleMesh(vertices, faces)


def make_heightfield_mesh(region: AABB2, spacing: float, height_fn) -> TriangleMesh:
    """Regular-grid heightfield mesh over the region, each quad split in two.

    ``height_fn(X, Y)`` must broadcast over arrays. This generator is kept
    independent of the simulator so conservation oracles do not share code
    with the module under test.
    """
    nx = max(1, round(region.width / spacing))
    ny = max(1, round(region.height / spacing))
    xs = np.linspace(region.x_min, region.x_max, nx + 1)
    ys = np.linspace(region.y_min, region.y_max, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = np.broadcast_to(height_fn(X, Y), X.shape)
    vertices = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    v00 = (ii * (ny + 1) + jj).ravel()
    v10 = ((ii + 1) * (ny + 1) + jj).ravel()
    v11 = ((ii + 1) * (ny + 1) + jj + 1).ravel()
    v01 = (ii * (ny + 1) + jj + 1).ravel()
    faces = np.concatenate(
        [
            np.column_stack([v00, v10, v11]),
            np.column_stack([v00, v11, v01]),
        ]
    )
    return TriangleMesh(vertices, faces)


def make_bumpy_height_fn(rng, n_bumps: int = 5, base: float = -2.0):
    centers = rng.uniform(0, 12, size=(n_bumps, 2))
    sigmas = rng.uniform(0.5, 2.5, size=n_bumps)
    heights = rng.uniform(0.2, 1.5, size=n_bumps)

    def fn(X, Y):
        Z = np.full_like(X, base, dtype=float)
        for (cx, cy), s, h in zip(centers, sigmas, heights):
            Z = Z + h * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2 * s * s))
        return Z

    return fn


@pytest.fixture
def rng():
    return np.random.default_rng(20221103)
