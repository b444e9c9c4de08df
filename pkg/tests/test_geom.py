"""Tests for core geometric types and primitives."""

import math

import numpy as np
import pytest

from reefsurvey.geom import (
    AABB2,
    Grid2D,
    PoseSE3,
    TriangleMesh,
    Vec3,
    grid_index,
    mesh_surface_area,
    pose_apply,
    triangle_area_3d,
)


def random_unit_quaternion(rng) -> tuple[float, float, float, float]:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return tuple(q)


def random_pose(rng) -> PoseSE3:
    t = Vec3(*rng.uniform(-10, 10, size=3))
    return PoseSE3(t, random_unit_quaternion(rng))


def heron_area(v0, v1, v2) -> float:
    a = np.linalg.norm(np.asarray(v1) - np.asarray(v0))
    b = np.linalg.norm(np.asarray(v2) - np.asarray(v1))
    c = np.linalg.norm(np.asarray(v0) - np.asarray(v2))
    s = (a + b + c) / 2.0
    return math.sqrt(max(0.0, s * (s - a) * (s - b) * (s - c)))


class TestVec3:
    def test_rejects_nan_and_inf(self):
        with pytest.raises(ValueError):
            Vec3(float("nan"), 0, 0)
        with pytest.raises(ValueError):
            Vec3(0, float("inf"), 0)

    def test_array_protocol(self):
        assert np.allclose(np.asarray(Vec3(1, 2, 3)), [1, 2, 3])


class TestPoseSE3:
    def test_slightly_off_norm_is_renormalized(self):
        pose = PoseSE3(Vec3(0, 0, 0), (0.9999, 0, 0, 0))
        assert abs(math.hypot(*pose.rotation) - 1.0) <= 1e-6

    def test_bad_norm_rejected(self):
        with pytest.raises(ValueError):
            PoseSE3(Vec3(0, 0, 0), (0.5, 0, 0, 0))

    def test_identity_apply(self):
        p = pose_apply(PoseSE3.identity(), Vec3(1, 2, 3))
        assert p.as_tuple() == (1.0, 2.0, 3.0)

    def test_pure_translation(self):
        pose = PoseSE3(Vec3(5, 0, 0), (1, 0, 0, 0))
        assert pose_apply(pose, Vec3(1, 2, 3)).as_tuple() == (6.0, 2.0, 3.0)

    def test_quarter_turn_about_z(self):
        # Analytic oracle: R_z(90 deg) @ (1,0,0) = (0,1,0).
        h = math.sqrt(0.5)
        pose = PoseSE3(Vec3(0, 0, 0), (h, 0, 0, h))
        p = pose_apply(pose, Vec3(1, 0, 0))
        assert np.allclose(p.as_tuple(), (0.0, 1.0, 0.0), atol=1e-12)

    def test_distance_preservation(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            pose = random_pose(rng)
            a = Vec3(*rng.uniform(-5, 5, size=3))
            b = Vec3(*rng.uniform(-5, 5, size=3))
            da = np.linalg.norm(np.asarray(a) - np.asarray(b))
            db = np.linalg.norm(np.asarray(pose_apply(pose, a)) - np.asarray(pose_apply(pose, b)))
            assert abs(da - db) < 1e-9


class TestTriangleArea:
    def test_unit_right_triangle(self):
        assert triangle_area_3d((0, 0, 0), (1, 0, 0), (0, 1, 0)) == 0.5

    def test_collinear_is_zero(self):
        assert triangle_area_3d((0, 0, 0), (1, 1, 1), (2, 2, 2)) == 0.0

    def test_against_heron(self):
        v = ((0, 0, 0), (3, 0, 0), (0, 4, 5))
        got = triangle_area_3d(*v)
        want = heron_area(*v)
        assert abs(got - want) <= 1e-12 * want

    def test_heron_on_random_triangles(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            v = rng.uniform(-3, 3, size=(3, 3))
            got = triangle_area_3d(*v)
            want = heron_area(*v)
            assert got == pytest.approx(want, rel=1e-9, abs=1e-12)

    def test_cyclic_permutation_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            v0, v1, v2 = rng.uniform(-2, 2, size=(3, 3))
            a = triangle_area_3d(v0, v1, v2)
            assert abs(triangle_area_3d(v1, v2, v0) - a) < 1e-9
            assert abs(triangle_area_3d(v2, v0, v1) - a) < 1e-9

    def test_rigid_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            verts = [Vec3(*v) for v in rng.uniform(-2, 2, size=(3, 3))]
            pose = random_pose(rng)
            a = triangle_area_3d(*verts)
            b = triangle_area_3d(*(pose_apply(pose, v) for v in verts))
            assert abs(a - b) < 1e-9


class TestGridIndex:
    def make_grid(self, nx=24, ny=24, cs=0.5):
        return Grid2D.allocate(AABB2(0, 0, nx * cs, ny * cs), cs)

    def test_origin_cell(self):
        assert grid_index(self.make_grid(), 0.0, 0.0) == (0, 0)

    def test_boundary_belongs_to_right_cell(self):
        assert grid_index(self.make_grid(), 0.5, 0.0) == (1, 0)

    def test_max_edge_is_outside(self):
        # 12.0 is the exclusive upper bound of a 12 m / 0.5 m grid.
        assert grid_index(self.make_grid(), 12.0, 3.0) is None

    def test_below_origin_is_outside(self):
        assert grid_index(self.make_grid(), -1e-9, 3.0) is None

    def test_cell_centers_map_back(self):
        g = Grid2D.allocate(AABB2(-3.25, 2.0, 7.75, 9.5), 0.37)
        for i in range(g.nx):
            for j in range(g.ny):
                cx, cy = g.cell_center(i, j)
                assert grid_index(g, cx, cy) == (i, j)


class TestMeshArea:
    def test_empty_mesh(self):
        assert mesh_surface_area(TriangleMesh([], [])) == 0.0

    def test_unit_square(self):
        mesh = TriangleMesh(
            [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)],
            [(0, 1, 2), (0, 2, 3)],
        )
        assert mesh_surface_area(mesh) == pytest.approx(1.0, abs=1e-15)

    def test_matches_per_face_oracle(self):
        rng = np.random.default_rng(19)
        verts = rng.uniform(-4, 4, size=(40, 3))
        faces = rng.integers(0, 40, size=(60, 3))
        mesh = TriangleMesh(verts, faces)
        want = sum(triangle_area_3d(*verts[f]) for f in faces)
        assert mesh_surface_area(mesh) == pytest.approx(want, rel=1e-12)

    def test_rigid_invariance(self):
        rng = np.random.default_rng(23)
        verts = rng.uniform(-4, 4, size=(30, 3))
        faces = rng.integers(0, 30, size=(50, 3))
        mesh = TriangleMesh(verts, faces)
        pose = random_pose(rng)
        moved = (pose.rotation_matrix() @ verts.T).T + np.asarray(pose.translation)
        a = mesh_surface_area(mesh)
        b = mesh_surface_area(TriangleMesh(moved, faces))
        assert b == pytest.approx(a, rel=1e-9)

    def test_face_index_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            TriangleMesh([(0, 0, 0), (1, 0, 0)], [(0, 1, 2)])

    def test_nonfinite_vertex_rejected(self):
        with pytest.raises(ValueError):
            TriangleMesh([(0, 0, float("nan"))], [])
