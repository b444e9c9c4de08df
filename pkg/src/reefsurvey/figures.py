"""Matplotlib figures rendered by the CLI alongside the delimited outputs.

All figures are written to files with the Agg backend; nothing here opens a
display. PNG metadata that varies between environments is stripped so
repeated runs produce byte-identical images.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .geom import AABB2, Grid2D

__all__ = [
    "save_grid_figure",
    "save_plan_figure",
    "save_density_figure",
    "save_pr_figure",
    "save_scatter_figure",
]

_PNG_METADATA = {"Software": None}
_DPI = 130


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=_DPI, metadata=_PNG_METADATA, bbox_inches="tight")
    plt.close(fig)
    return path


def _grid_extent(grid: Grid2D):
    return (
        grid.origin_x,
        grid.origin_x + grid.nx * grid.cell_size,
        grid.origin_y,
        grid.origin_y + grid.ny * grid.cell_size,
    )


def save_grid_figure(
    grid: Grid2D,
    path: str | Path,
    title: str = "",
    colorbar_label: str = "",
    cmap: str = "viridis",
    peaks=None,
) -> Path:
    """Render a grid as a map-oriented heatmap; no-data cells are gray."""
    fig, ax = plt.subplots(figsize=(6.4, 5.4))
    if grid.valid.any():
        colormap = matplotlib.colormaps[cmap].copy()
        colormap.set_bad("#9a9a9a")
        masked = np.ma.masked_where(~grid.valid.T, grid.values.T)
        im = ax.imshow(
            masked,
            origin="lower",
            extent=_grid_extent(grid),
            cmap=colormap,
            interpolation="nearest",
        )
        fig.colorbar(im, ax=ax, label=colorbar_label, shrink=0.85)
    else:
        ax.text(0.5, 0.5, "no valid cells", ha="center", va="center", transform=ax.transAxes)
        ax.set_xlim(_grid_extent(grid)[:2])
        ax.set_ylim(_grid_extent(grid)[2:])
    if peaks:
        ax.scatter(
            [p.x for p in peaks],
            [p.y for p in peaks],
            marker="x",
            s=70,
            c="red",
            linewidths=1.8,
            zorder=3,
        )
        for rank, p in enumerate(peaks, 1):
            ax.annotate(str(rank), (p.x, p.y), textcoords="offset points", xytext=(5, 5), color="red")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def save_plan_figure(plan, region: AABB2, path: str | Path) -> Path:
    """Survey plan overview: region outline and the boustrophedon path."""
    fig, ax = plt.subplots(figsize=(6.0, 5.4))
    ax.add_patch(
        plt.Rectangle(
            (region.x_min, region.y_min),
            region.width,
            region.height,
            fill=False,
            edgecolor="black",
            linewidth=1.2,
        )
    )
    pts = np.asarray(plan.waypoints)
    ax.plot(pts[:, 0], pts[:, 1], "-o", color="tab:blue", markersize=3.5, linewidth=1.4)
    ax.plot(pts[0, 0], pts[0, 1], "s", color="tab:green", markersize=8, label="start")
    ax.plot(pts[-1, 0], pts[-1, 1], "^", color="tab:red", markersize=8, label="end")
    ax.legend(loc="upper right")
    margin = max(region.width, region.height) * 0.08
    ax.set_xlim(region.x_min - margin, region.x_max + margin)
    ax.set_ylim(region.y_min - margin, region.y_max + margin)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_aspect("equal")
    ax.set_title(f"{plan.track_count} tracks, spacing {plan.track_spacing:.2f} m")
    return _save(fig, path)


def save_density_figure(scenario, plan, path: str | Path, resolution: float = 0.25) -> Path:
    """Planted fish density field with the survey path overlaid."""
    from .survey import fish_density  # local import: figures stays survey-agnostic otherwise

    region = scenario.region
    xs = np.arange(region.x_min + resolution / 2, region.x_max, resolution)
    ys = np.arange(region.y_min + resolution / 2, region.y_max, resolution)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    density = np.asarray(fish_density(scenario, X, Y))

    fig, ax = plt.subplots(figsize=(6.4, 5.4))
    im = ax.imshow(
        density.T,
        origin="lower",
        extent=(region.x_min, region.x_max, region.y_min, region.y_max),
        cmap="cividis",
        interpolation="nearest",
    )
    fig.colorbar(im, ax=ax, label="fish density (1/m$^2$)", shrink=0.85)
    pts = np.asarray(plan.waypoints)
    ax.plot(pts[:, 0], pts[:, 1], "-", color="white", linewidth=1.0, alpha=0.8)
    for h in scenario.fish_hotspots:
        ax.plot(h.cx, h.cy, "*", color="red", markersize=12)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_aspect("equal")
    ax.set_title("planted fish density")
    return _save(fig, path)


def save_pr_figure(points, path: str | Path, title: str = "precision-recall") -> Path:
    """PR curve from pooled (confidence, precision, recall) points."""
    fig, ax = plt.subplots(figsize=(5.6, 4.6))
    if points:
        recalls = [r for _, _, r in points]
        precisions = [p for _, p, _ in points]
        ax.step([0.0] + recalls, [precisions[0] if precisions else 1.0] + precisions, where="post")
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, 1.02)
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def save_scatter_figure(
    x, y, path: str | Path, xlabel: str = "", ylabel: str = "", title: str = ""
) -> Path:
    """Scatter of jointly valid cell values (correlation report)."""
    fig, ax = plt.subplots(figsize=(5.6, 4.6))
    ax.scatter(x, y, s=14, alpha=0.65, edgecolors="none")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    return _save(fig, path)
