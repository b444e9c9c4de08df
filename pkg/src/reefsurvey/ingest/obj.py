"""Wavefront OBJ mesh reader (v/f records only).

``f`` entries of the form ``i``, ``i/j``, ``i/j/k``, and ``i//k`` are
accepted; negative indices are resolved relative to the vertices defined so
far. Texture coordinates, normals, materials, and groups are ignored.
"""

from __future__ import annotations

from ..errors import FormatError, MeshIndexError
from ..geom import TriangleMesh

__all__ = ["parse_obj"]


def _resolve_index(token: str, n_vertices: int, source: str, line_no: int) -> int:
    head = token.split("/", 1)[0]
    try:
        idx = int(head)
    except ValueError:
        raise FormatError(f"face index {head!r} is not an integer", source, line_no) from None
    if idx == 0:
        raise MeshIndexError(f"{source}:{line_no}: OBJ face indices are 1-based; 0 is invalid")
    if idx < 0:
        resolved = n_vertices + idx
    else:
        resolved = idx - 1
    if resolved < 0 or resolved >= n_vertices:
        raise MeshIndexError(
            f"{source}:{line_no}: face index {idx} out of range (file has {n_vertices} vertices so far)"
        )
    return resolved


def parse_obj(text: str, source: str = "<obj>") -> TriangleMesh:
    """Parse OBJ text into a TriangleMesh; polygon faces are fan-triangulated."""
    vertices: list[tuple[float, float, float]] = []
    triangles: list[tuple[int, int, int]] = []

    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        key = tok[0]
        if key == "v":
            if len(tok) < 4:
                raise FormatError(f"vertex record needs 3 coordinates, got {len(tok) - 1}", source, line_no)
            try:
                vertices.append((float(tok[1]), float(tok[2]), float(tok[3])))
            except ValueError:
                raise FormatError(f"bad numeric field in vertex record {line!r}", source, line_no) from None
        elif key == "f":
            if len(tok) < 4:
                raise FormatError(f"face record needs at least 3 indices, got {len(tok) - 1}", source, line_no)
            idxs = [_resolve_index(t, len(vertices), source, line_no) for t in tok[1:]]
            for i in range(1, len(idxs) - 1):
                triangles.append((idxs[0], idxs[i], idxs[i + 1]))
        # vt/vn/vp/g/o/s/mtllib/usemtl/l/p records are intentionally skipped

    try:
        return TriangleMesh(vertices, triangles)
    except ValueError as exc:
        raise FormatError(str(exc), source) from None
