"""Binary PPM (P6) raster rendering of grids.

One pixel per cell (optionally integer-upscaled). Valid cells are min-max
normalized and mapped through a 5-anchor linearly interpolated color ramp;
no-data cells render mid-gray. Pixel row r, column c maps to cell
``(i=c//scale, j=r//scale)``; a world-file-style sidecar records the
cell size and origin so the pixel-to-world mapping is recoverable.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import FormatError
from .geom import Grid2D

__all__ = ["COLOR_RAMPS", "INVALID_COLOR", "render_raster", "write_raster", "parse_ppm"]

# name -> 5 (position, rgb) anchors, positions covering [0, 1]
COLOR_RAMPS: dict[str, tuple[tuple[float, tuple[int, int, int]], ...]] = {
    "ocean": (
        (0.00, (8, 16, 84)),
        (0.25, (18, 74, 140)),
        (0.50, (28, 144, 120)),
        (0.75, (116, 196, 66)),
        (1.00, (250, 232, 52)),
    ),
    "gray": (
        (0.00, (0, 0, 0)),
        (0.25, (64, 64, 64)),
        (0.50, (128, 128, 128)),
        (0.75, (192, 192, 192)),
        (1.00, (255, 255, 255)),
    ),
    "heat": (
        (0.00, (12, 8, 64)),
        (0.25, (120, 28, 110)),
        (0.50, (204, 64, 76)),
        (0.75, (244, 144, 32)),
        (1.00, (252, 252, 160)),
    ),
}

INVALID_COLOR = (128, 128, 128)


def _ramp_lookup(t: np.ndarray, ramp) -> np.ndarray:
    positions = np.array([p for p, _ in ramp])
    channels = np.array([c for _, c in ramp], dtype=float)
    out = np.empty(t.shape + (3,))
    for ch in range(3):
        out[..., ch] = np.interp(t, positions, channels[:, ch])
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def _resolve_ramp(colormap):
    if isinstance(colormap, str):
        if colormap not in COLOR_RAMPS:
            raise ValueError(f"unknown colormap {colormap!r}; have {sorted(COLOR_RAMPS)}")
        return COLOR_RAMPS[colormap]
    ramp = tuple((float(pos), tuple(int(c) for c in rgb)) for pos, rgb in colormap)
    positions = [pos for pos, _ in ramp]
    if len(ramp) < 2 or positions[0] != 0.0 or positions[-1] != 1.0:
        raise ValueError("ramp anchors must start at 0.0 and end at 1.0")
    if any(b <= a for a, b in zip(positions, positions[1:])):
        raise ValueError(f"ramp anchor positions must be strictly increasing, got {positions}")
    if any(not (0 <= c <= 255) for _, rgb in ramp for c in rgb):
        raise ValueError("ramp colors must be 8-bit RGB triples")
    return ramp


def render_raster(grid: Grid2D, colormap="ocean", scale: int = 1) -> bytes:
    """Render a grid to P6 PPM bytes, ``grid.nx * scale`` wide.

    ``colormap`` is a ramp name or an explicit anchor sequence of
    ``(position, (r, g, b))`` pairs covering [0, 1]. Values are min-max
    normalized over valid cells (a constant grid maps to the ramp's low
    end); invalid cells are mid-gray.
    """
    ramp = _resolve_ramp(colormap)
    if scale < 1 or scale != int(scale):
        raise ValueError(f"scale must be a positive integer, got {scale}")

    valid_vals = grid.values[grid.valid]
    if valid_vals.size:
        lo = float(valid_vals.min())
        hi = float(valid_vals.max())
        span = hi - lo
        t = np.zeros_like(grid.values) if span == 0.0 else (grid.values - lo) / span
    else:
        t = np.zeros_like(grid.values)
    colors = _ramp_lookup(np.clip(t, 0.0, 1.0), ramp)

    # Image rows follow j, columns follow i.
    pixels = np.empty((grid.ny, grid.nx, 3), dtype=np.uint8)
    pixels[:] = INVALID_COLOR
    valid_t = grid.valid.T
    pixels[valid_t] = colors.transpose(1, 0, 2)[valid_t]

    if scale > 1:
        pixels = np.repeat(np.repeat(pixels, scale, axis=0), scale, axis=1)

    header = f"P6\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    return header + pixels.tobytes()


def sidecar_text(grid: Grid2D, scale: int = 1) -> str:
    """World-file-style sidecar: pixel (col, row) -> cell (col//scale, row//scale)."""
    return (
        f"cell_size={grid.cell_size!r}\n"
        f"origin_x={grid.origin_x!r}\n"
        f"origin_y={grid.origin_y!r}\n"
        f"scale={scale}\n"
    )


def write_raster(path: str | Path, grid: Grid2D, colormap="ocean", scale: int = 1) -> Path:
    """Write the PPM plus its ``.txt`` sidecar; returns the PPM path."""
    path = Path(path)
    path.write_bytes(render_raster(grid, colormap, scale))
    Path(str(path) + ".txt").write_text(sidecar_text(grid, scale), encoding="ascii")
    return path


def parse_ppm(data: bytes) -> tuple[int, int, np.ndarray]:
    """Parse P6 bytes back into (width, height, pixels[h, w, 3])."""
    if not data.startswith(b"P6"):
        raise FormatError("not a P6 PPM", "<ppm>", 1)
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    width, height, maxval = (int(f) for f in fields)
    if maxval != 255:
        raise FormatError(f"expected maxval 255, got {maxval}", "<ppm>")
    pos += 1  # single whitespace after maxval
    body = data[pos:]
    if len(body) != width * height * 3:
        raise FormatError(f"payload is {len(body)} bytes, expected {width * height * 3}", "<ppm>")
    return width, height, np.frombuffer(body, dtype=np.uint8).reshape(height, width, 3)
