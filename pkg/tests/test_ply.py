"""PLY parser/writer tests, including round-trip oracles."""

import numpy as np
import pytest

from reefsurvey.errors import FormatError, MeshIndexError, TruncatedFileError
from reefsurvey.geom import mesh_surface_area
from reefsurvey.ingest import parse_ply, write_ply

from conftest import make_random_mesh

UNIT_SQUARE_QUAD = b"""ply
format ascii 1.0
comment unit square
element vertex 4
property float x
property float y
property float z
element face 1
property list uchar int vertex_indices
end_header
0 0 0
1 0 0
1 1 0
0 1 0
4 0 1 2 3
"""


def test_ascii_quad_fan_triangulated():
    mesh = parse_ply(UNIT_SQUARE_QUAD)
    assert mesh.num_vertices == 4
    assert mesh.num_faces == 2
    assert mesh_surface_area(mesh) == pytest.approx(1.0)


def test_ascii_bad_face_index():
    data = UNIT_SQUARE_QUAD.replace(b"4 0 1 2 3", b"3 0 1 9")
    with pytest.raises(MeshIndexError, match="face 0"):
        parse_ply(data, "square.ply")


def test_extra_vertex_properties_skipped():
    data = b"""ply
format ascii 1.0
element vertex 3
property float x
property float y
property float z
property uchar red
property uchar green
property uchar blue
element face 1
property list uchar int vertex_indices
end_header
0 0 0 255 0 0
1 0 0 0 255 0
0 1 0 0 0 255
3 0 1 2
"""
    mesh = parse_ply(data)
    assert mesh.num_faces == 1
    assert mesh_surface_area(mesh) == pytest.approx(0.5)


def test_malformed_header_has_line_number():
    data = b"ply\nformat ascii 1.0\nelephant vertex 3\nend_header\n"
    with pytest.raises(FormatError, match=r"reef\.ply:3"):
        parse_ply(data, "reef.ply")


def test_unsupported_big_endian_rejected():
    data = b"ply\nformat binary_big_endian 1.0\nelement vertex 0\nproperty float x\nproperty float y\nproperty float z\nelement face 0\nproperty list uchar int vertex_indices\nend_header\n"
    with pytest.raises(FormatError, match="binary_big_endian"):
        parse_ply(data)


def test_not_a_ply_file():
    with pytest.raises(FormatError):
        parse_ply(b"OFF\n3 1 0\n")


def test_ascii_bad_numeric_field_names_line():
    data = UNIT_SQUARE_QUAD.replace(b"1 0 0\n", b"1 zero 0\n", 1)
    with pytest.raises(FormatError, match=":12"):
        parse_ply(data, "square.ply")


def test_truncated_binary_payload():
    mesh = parse_ply(UNIT_SQUARE_QUAD)
    data = write_ply(mesh, "binary_little_endian")
    with pytest.raises(TruncatedFileError, match="truncated"):
        parse_ply(data[:-5], "cut.ply")


def test_empty_mesh_roundtrip():
    from reefsurvey.geom import TriangleMesh

    empty = TriangleMesh([], [])
    for mode in ("ascii", "binary_little_endian"):
        back = parse_ply(write_ply(empty, mode))
        assert back.num_vertices == 0
        assert back.num_faces == 0


def test_binary_roundtrip_bit_exact(rng):
    for _ in range(20):
        mesh = make_random_mesh(rng, n_vertices=25, n_faces=40)
        back = parse_ply(write_ply(mesh, "binary_little_endian"))
        assert np.array_equal(back.vertices, mesh.vertices)
        assert np.array_equal(back.faces, mesh.faces)


def test_ascii_roundtrip_within_print_precision(rng):
    for _ in range(20):
        mesh = make_random_mesh(rng, n_vertices=25, n_faces=40)
        back = parse_ply(write_ply(mesh, "ascii"))
        # The parsed value is exactly the printed 9-significant-digit decimal.
        want = np.array([[float(f"{c:.9g}") for c in row] for row in mesh.vertices])
        assert np.array_equal(back.vertices, want)
        assert np.array_equal(back.faces, mesh.faces)


def test_ascii_and_binary_parses_agree(rng):
    mesh = make_random_mesh(rng, n_vertices=40, n_faces=70)
    # Use grid-snapped coordinates so the 9-digit ascii print is lossless.
    snapped = np.round(mesh.vertices, 3)
    from reefsurvey.geom import TriangleMesh

    mesh = TriangleMesh(snapped, mesh.faces)
    a = parse_ply(write_ply(mesh, "ascii"))
    b = parse_ply(write_ply(mesh, "binary_little_endian"))
    assert np.array_equal(a.vertices, b.vertices)
    assert np.array_equal(a.faces, b.faces)


def test_decimal_point_formatting_is_locale_independent():
    text = write_ply(parse_ply(UNIT_SQUARE_QUAD), "ascii").decode("ascii")
    assert "," not in text
