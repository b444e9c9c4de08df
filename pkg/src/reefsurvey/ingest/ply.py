"""PLY mesh reader and writer.

Supports ``format ascii 1.0`` and ``format binary_little_endian 1.0`` with a
vertex element carrying float32/float64 x/y/z properties and a face element
carrying a vertex-index list. Extra vertex properties (normals, colors) are
skipped; faces with more than 3 vertices are fan-triangulated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import FormatError, MeshIndexError, TruncatedFileError
from ..geom import TriangleMesh

__all__ = ["parse_ply", "write_ply"]

# PLY scalar type name -> (numpy little-endian dtype, byte size)
_SCALAR_TYPES = {
    "char": ("<i1", 1),
    "int8": ("<i1", 1),
    "uchar": ("<u1", 1),
    "uint8": ("<u1", 1),
    "short": ("<i2", 2),
    "int16": ("<i2", 2),
    "ushort": ("<u2", 2),
    "uint16": ("<u2", 2),
    "int": ("<i4", 4),
    "int32": ("<i4", 4),
    "uint": ("<u4", 4),
    "uint32": ("<u4", 4),
    "float": ("<f4", 4),
    "float32": ("<f4", 4),
    "double": ("<f8", 8),
    "float64": ("<f8", 8),
}

_FLOAT_TYPES = {"float", "float32", "double", "float64"}
_INT_TYPES = {"char", "int8", "uchar", "uint8", "short", "int16", "ushort", "uint16", "int", "int32", "uint", "uint32"}


@dataclass
class _Property:
    name: str
    dtype: str  # PLY type name of the value (list: of the items)
    is_list: bool = False
    count_dtype: str = ""


@dataclass
class _Element:
    name: str
    count: int
    line: int  # header line where declared
    properties: list[_Property] = field(default_factory=list)


def _parse_header(data: bytes, source: str):
    """Returns (format_name, elements, payload_offset, header_line_count)."""
    end = data.find(b"end_header")
    if not data.startswith(b"ply") or end < 0:
        raise FormatError("not a PLY file (missing 'ply'/'end_header')", source, 1)
    nl = data.find(b"\n", end)
    if nl < 0:
        raise FormatError("missing newline after end_header", source, 1)
    try:
        header_text = data[:nl].decode("ascii")
    except UnicodeDecodeError:
        raise FormatError("header is not ASCII", source, 1) from None

    fmt = ""
    elements: list[_Element] = []
    lines = header_text.split("\n")
    for line_no, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith(("comment", "obj_info")):
            continue
        tok = line.split()
        if line_no == 1:
            if tok != ["ply"]:
                raise FormatError("first line must be 'ply'", source, 1)
            continue
        if tok[0] == "format":
            if len(tok) != 3 or tok[2] != "1.0":
                raise FormatError(f"unsupported format declaration {line!r}", source, line_no)
            if tok[1] not in ("ascii", "binary_little_endian"):
                raise FormatError(f"unsupported PLY format {tok[1]!r}", source, line_no)
            fmt = tok[1]
        elif tok[0] == "element":
            if len(tok) != 3:
                raise FormatError(f"malformed element declaration {line!r}", source, line_no)
            try:
                count = int(tok[2])
            except ValueError:
                raise FormatError(f"element count {tok[2]!r} is not an integer", source, line_no) from None
            if count < 0:
                raise FormatError(f"negative element count {count}", source, line_no)
            elements.append(_Element(tok[1], count, line_no))
        elif tok[0] == "property":
            if not elements:
                raise FormatError("property before any element", source, line_no)
            if len(tok) >= 2 and tok[1] == "list":
                if len(tok) != 5:
                    raise FormatError(f"malformed list property {line!r}", source, line_no)
                count_t, item_t, name = tok[2], tok[3], tok[4]
                if count_t not in _INT_TYPES or item_t not in _SCALAR_TYPES:
                    raise FormatError(f"unsupported list property types in {line!r}", source, line_no)
                elements[-1].properties.append(_Property(name, item_t, is_list=True, count_dtype=count_t))
            else:
                if len(tok) != 3:
                    raise FormatError(f"malformed property {line!r}", source, line_no)
                if tok[1] not in _SCALAR_TYPES:
                    raise FormatError(f"unsupported property type {tok[1]!r}", source, line_no)
                elements[-1].properties.append(_Property(tok[2], tok[1]))
        elif tok[0] == "end_header":
            break
        else:
            raise FormatError(f"unexpected header keyword {tok[0]!r}", source, line_no)

    if not fmt:
        raise FormatError("header has no format declaration", source, 1)
    return fmt, elements, nl + 1, len(lines)


def _vertex_xyz_columns(elem: _Element, source: str) -> dict[str, int]:
    cols = {}
    for idx, prop in enumerate(elem.properties):
        if prop.name in ("x", "y", "z") and not prop.is_list:
            if prop.dtype not in _FLOAT_TYPES:
                raise FormatError(f"vertex property {prop.name!r} must be float32/float64", source, elem.line)
            cols[prop.name] = idx
    missing = {"x", "y", "z"} - set(cols)
    if missing:
        raise FormatError(f"vertex element missing properties: {sorted(missing)}", source, elem.line)
    return cols


def _index_list_column(elem: _Element, source: str) -> int:
    for idx, prop in enumerate(elem.properties):
        if prop.is_list and prop.dtype in _INT_TYPES:
            return idx
    raise FormatError("face element has no vertex-index list property", source, elem.line)


def _fan_triangulate(indices, face_no: int, source: str) -> list[tuple[int, int, int]]:
    if len(indices) < 3:
        raise FormatError(f"face {face_no} has {len(indices)} vertices (need >= 3)", source)
    return [(indices[0], indices[i], indices[i + 1]) for i in range(1, len(indices) - 1)]


def _validate_indices(face_lists, n_vertices: int, source: str):
    for face_no, indices in enumerate(face_lists):
        for idx in indices:
            if idx < 0 or idx >= n_vertices:
                raise MeshIndexError(
                    f"{source}: face {face_no} references vertex {idx} "
                    f"but file has {n_vertices} vertices"
                )


def _parse_ascii_payload(data: bytes, offset: int, first_line: int, elements, source: str):
    try:
        text = data[offset:].decode("ascii")
    except UnicodeDecodeError:
        raise FormatError("ascii payload contains non-ASCII bytes", source, first_line) from None

    lines = text.split("\n")
    cursor = 0

    def next_line():
        nonlocal cursor
        while cursor < len(lines):
            ln = first_line + cursor
            stripped = lines[cursor].strip()
            cursor += 1
            if stripped:
                return ln, stripped.split()
        raise FormatError("payload ended before all elements were read", source, first_line + cursor)

    vertices = None
    face_lists = None
    for elem in elements:
        is_vertex = elem.name == "vertex"
        is_face = elem.name == "face"
        if is_vertex:
            cols = _vertex_xyz_columns(elem, source)
            vertices = np.empty((elem.count, 3))
        if is_face:
            list_col = _index_list_column(elem, source)
            face_lists = []

        for item in range(elem.count):
            ln, tok = next_line()
            pos = 0
            row = {}
            for col, prop in enumerate(elem.properties):
                if prop.is_list:
                    if pos >= len(tok):
                        raise FormatError("missing list count", source, ln)
                    try:
                        k = int(tok[pos])
                    except ValueError:
                        raise FormatError(f"list count {tok[pos]!r} is not an integer", source, ln) from None
                    if k < 0 or pos + 1 + k > len(tok):
                        raise FormatError(f"list of {k} items does not fit on line", source, ln)
                    if is_face and col == list_col:
                        try:
                            row["indices"] = [int(t) for t in tok[pos + 1 : pos + 1 + k]]
                        except ValueError:
                            raise FormatError("face index is not an integer", source, ln) from None
                    pos += 1 + k
                else:
                    if pos >= len(tok):
                        raise FormatError(
                            f"expected value for property {prop.name!r}, line has {len(tok)} fields",
                            source,
                            ln,
                        )
                    if is_vertex and col in (cols["x"], cols["y"], cols["z"]):
                        try:
                            row[prop.name] = float(tok[pos])
                        except ValueError:
                            raise FormatError(f"bad numeric field {tok[pos]!r}", source, ln) from None
                    pos += 1
            if pos != len(tok):
                raise FormatError(f"trailing fields on line (expected {pos}, got {len(tok)})", source, ln)
            if is_vertex:
                vertices[item] = (row["x"], row["y"], row["z"])
            if is_face:
                face_lists.append(row["indices"])

    return vertices, face_lists


def _parse_binary_payload(data: bytes, offset: int, elements, source: str):
    vertices = None
    face_lists = None
    pos = offset
    n = len(data)

    def need(nbytes: int, what: str):
        if pos + nbytes > n:
            raise TruncatedFileError(
                f"{source}: truncated at byte {pos}: need {nbytes} more bytes for {what}"
            )

    for elem in elements:
        is_vertex = elem.name == "vertex"
        is_face = elem.name == "face"
        all_scalar = all(not p.is_list for p in elem.properties)

        if is_vertex:
            cols = _vertex_xyz_columns(elem, source)

        if all_scalar:
            # Fixed stride: one frombuffer for the whole element.
            dtype = np.dtype([(f"f{i}", _SCALAR_TYPES[p.dtype][0]) for i, p in enumerate(elem.properties)])
            nbytes = dtype.itemsize * elem.count
            need(nbytes, f"element {elem.name!r}")
            if is_vertex:
                table = np.frombuffer(data, dtype=dtype, count=elem.count, offset=pos)
                vertices = np.column_stack(
                    [table[f"f{cols['x']}"], table[f"f{cols['y']}"], table[f"f{cols['z']}"]]
                ).astype(np.float64)
            pos += nbytes
            continue

        if is_face:
            list_col = _index_list_column(elem, source)
            face_lists = []
        for item in range(elem.count):
            for col, prop in enumerate(elem.properties):
                if prop.is_list:
                    cdt, csize = _SCALAR_TYPES[prop.count_dtype]
                    need(csize, f"{elem.name} {item} list count")
                    k = int(np.frombuffer(data, dtype=cdt, count=1, offset=pos)[0])
                    pos += csize
                    idt, isize = _SCALAR_TYPES[prop.dtype]
                    need(k * isize, f"{elem.name} {item} list items")
                    if is_face and col == list_col:
                        face_lists.append(
                            [int(v) for v in np.frombuffer(data, dtype=idt, count=k, offset=pos)]
                        )
                    pos += k * isize
                else:
                    _, size = _SCALAR_TYPES[prop.dtype]
                    need(size, f"{elem.name} {item} property {prop.name!r}")
                    pos += size

    if vertices is not None and not np.all(np.isfinite(vertices)):
        raise FormatError("non-finite vertex coordinate in binary payload", source)
    return vertices, face_lists


def parse_ply(data: bytes, source: str = "<ply>") -> TriangleMesh:
    """Parse PLY bytes into a TriangleMesh.

    Raises FormatError for malformed headers or records, MeshIndexError for
    out-of-range face indices, and TruncatedFileError when a binary payload
    ends early.
    """
    fmt, elements, payload_offset, header_lines = _parse_header(data, source)

    if fmt == "ascii":
        vertices, face_lists = _parse_ascii_payload(data, payload_offset, header_lines + 1, elements, source)
    else:
        vertices, face_lists = _parse_binary_payload(data, payload_offset, elements, source)

    if vertices is None:
        vertices = np.empty((0, 3))
    if face_lists is None:
        face_lists = []

    _validate_indices(face_lists, len(vertices), source)
    triangles = []
    for face_no, indices in enumerate(face_lists):
        triangles.extend(_fan_triangulate(indices, face_no, source))
    try:
        return TriangleMesh(vertices, triangles)
    except ValueError as exc:
        raise FormatError(str(exc), source) from None


def write_ply(mesh: TriangleMesh, mode: str = "binary_little_endian") -> bytes:
    """Serialize a mesh to PLY bytes that parse_ply round-trips.

    ``ascii`` mode prints coordinates with 9 significant digits; binary mode
    stores float64 vertices and round-trips bit-exactly.
    """
    if mode not in ("ascii", "binary_little_endian"):
        raise ValueError(f"mode must be 'ascii' or 'binary_little_endian', got {mode!r}")

    coord_type = "double"
    header = (
        "ply\n"
        f"format {mode} 1.0\n"
        f"element vertex {mesh.num_vertices}\n"
        f"property {coord_type} x\n"
        f"property {coord_type} y\n"
        f"property {coord_type} z\n"
        f"element face {mesh.num_faces}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    ).encode("ascii")

    if mode == "ascii":
        body = []
        for x, y, z in mesh.vertices:
            body.append(f"{x:.9g} {y:.9g} {z:.9g}\n")
        for a, b, c in mesh.faces:
            body.append(f"3 {a} {b} {c}\n")
        return header + "".join(body).encode("ascii")

    vert_bytes = np.ascontiguousarray(mesh.vertices, dtype="<f8").tobytes()
    face_rec = np.empty(mesh.num_faces, dtype=[("n", "<u1"), ("idx", "<i4", (3,))])
    face_rec["n"] = 3
    if mesh.num_faces:
        face_rec["idx"] = mesh.faces
    return header + vert_bytes + face_rec.tobytes()
