"""Grid CSV format shared by the rugosity and hotspot paths.

One row per cell in row-major order (i outer, j inner) with the exact header
``i,j,x_center,y_center,value,valid``. Values use shortest round-trip float
formatting, so a written grid reads back bit-exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import FormatError
from .geom import Grid2D

__all__ = ["GRID_CSV_HEADER", "write_grid_csv", "read_grid_csv"]

GRID_CSV_HEADER = "i,j,x_center,y_center,value,valid"


def write_grid_csv(grid: Grid2D) -> str:
    lines = [GRID_CSV_HEADER]
    for i in range(grid.nx):
        for j in range(grid.ny):
            cx, cy = grid.cell_center(i, j)
            lines.append(
                f"{i},{j},{cx!r},{cy!r},{float(grid.values[i, j])!r},{int(grid.valid[i, j])}"
            )
    return "\n".join(lines) + "\n"


def read_grid_csv(text: str, source: str = "<grid>") -> Grid2D:
    rows: dict[tuple[int, int], tuple[float, float, float, bool]] = {}
    header_seen = False
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != GRID_CSV_HEADER:
                raise FormatError(f"expected header {GRID_CSV_HEADER!r}, got {line!r}", source, line_no)
            header_seen = True
            continue
        fields = line.split(",")
        if len(fields) != 6:
            raise FormatError(f"expected 6 columns, got {len(fields)}", source, line_no)
        try:
            i, j = int(fields[0]), int(fields[1])
            cx, cy, value = float(fields[2]), float(fields[3]), float(fields[4])
            valid = bool(int(fields[5]))
        except ValueError:
            raise FormatError(f"bad field in row {line!r}", source, line_no) from None
        if (i, j) in rows:
            raise FormatError(f"duplicate cell ({i}, {j})", source, line_no)
        rows[(i, j)] = (cx, cy, value, valid)

    if not header_seen:
        raise FormatError("file has no header row", source, 1)
    if not rows:
        raise FormatError("grid file has no cells", source, 1)

    nx = max(i for i, _ in rows) + 1
    ny = max(j for _, j in rows) + 1
    if len(rows) != nx * ny:
        raise FormatError(f"grid is missing cells: expected {nx * ny}, got {len(rows)}", source)

    # Recover cell size from adjacent centers; a 1x1 grid has no pair to
    # measure, so fall back to 1.0 (correlation on it is degenerate anyway).
    if nx > 1:
        cell_size = rows[(1, 0)][0] - rows[(0, 0)][0]
    elif ny > 1:
        cell_size = rows[(0, 1)][1] - rows[(0, 0)][1]
    else:
        cell_size = 1.0
    if cell_size <= 0:
        raise FormatError(f"non-positive inferred cell size {cell_size}", source)

    cx0, cy0 = rows[(0, 0)][0], rows[(0, 0)][1]
    values = np.zeros((nx, ny))
    valid = np.zeros((nx, ny), dtype=bool)
    for (i, j), (_, _, value, ok) in rows.items():
        values[i, j] = value
        valid[i, j] = ok
    return Grid2D(
        origin_x=cx0 - cell_size / 2,
        origin_y=cy0 - cell_size / 2,
        cell_size=cell_size,
        nx=nx,
        ny=ny,
        values=values,
        valid=valid,
    )
