"""Loss-surface evaluation on grids and surface diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import GridSpec, LossObservation
from .surrogate import Surrogate, predict_values


@dataclass(frozen=True)
class SurfaceGrid:
    """Values over a grid, stored (resolution, resolution) in C order.

    values[j, i] is the value at node (i, j), i.e. at (axis0[i], axis1[j]),
    so values.ravel() enumerates nodes in flat-index order.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        want = (self.grid.resolution, self.grid.resolution)
        if self.values.shape != want:
            raise ValueError(f"values shape {self.values.shape}, expected {want}")


@dataclass(frozen=True)
class SurfaceReport:
    """Diagnostics of one surface; rmse_vs_reference is None when unreferenced."""

    argmin: tuple[float, float]
    min_value: float
    local_min_count: int
    negative_fraction: float
    rmse_vs_reference: float | None = None

    def as_dict(self) -> dict:
        out = {
            "argmin": [self.argmin[0], self.argmin[1]],
            "min_value": self.min_value,
            "local_min_count": self.local_min_count,
            "negative_fraction": self.negative_fraction,
        }
        if self.rmse_vs_reference is not None:
            out["rmse_vs_reference"] = self.rmse_vs_reference
        return out


def evaluate_surface(source, grid: GridSpec) -> SurfaceGrid:
    """Evaluate a surface source on every grid node.

    The source may be a fitted Surrogate, a callable taking an (n, 2) array
    of points and returning n values (e.g. the closed-form loss), or a list
    of LossObservation taken on exactly this grid in node order.
    """
    res = grid.resolution
    pts = grid.points()
    if isinstance(source, Surrogate):
        flat = predict_values(source, pts)
    elif callable(source):
        flat = np.asarray(source(pts), dtype=np.float64)
        if flat.shape != (pts.shape[0],):
            raise ValueError(f"callable returned shape {flat.shape}, expected ({pts.shape[0]},)")
    elif isinstance(source, list):
        if len(source) != pts.shape[0]:
            raise ValueError(f"{len(source)} observations for {pts.shape[0]} grid nodes")
        obs_pts = np.array([o.w for o in source], dtype=np.float64)
        if not np.array_equal(obs_pts, pts):
            raise ValueError("observation locations do not match the grid nodes")
        flat = np.array([o.value for o in source], dtype=np.float64)
    else:
        raise TypeError(f"cannot evaluate a surface from {type(source).__name__}")
    return SurfaceGrid(grid=grid, values=flat.reshape(res, res))


def locate_min(surface: SurfaceGrid) -> tuple[np.ndarray, float]:
    """Node with the lowest value; ties resolved to the smallest flat index."""
    flat = surface.values.ravel()
    k = int(np.argmin(flat))
    return surface.grid.points()[k], float(flat[k])


def count_local_minima(surface: SurfaceGrid) -> int:
    """Number of nodes strictly below all existing neighbours (8-connected)."""
    v = surface.values
    res = surface.grid.resolution
    padded = np.full((res + 2, res + 2), np.inf)
    padded[1:-1, 1:-1] = v
    neighbour_min = np.full_like(v, np.inf)
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            if dj == 0 and di == 0:
                continue
            shifted = padded[1 + dj : 1 + dj + res, 1 + di : 1 + di + res]
            neighbour_min = np.minimum(neighbour_min, shifted)
    return int(np.sum(v < neighbour_min))


def negative_fraction(surface: SurfaceGrid) -> float:
    """Fraction of grid nodes with a strictly negative value."""
    return float(np.mean(surface.values < 0))


def surface_rmse(a: SurfaceGrid, b: SurfaceGrid) -> float:
    """Root-mean-square difference of two surfaces over the same grid."""
    if a.grid != b.grid:
        raise ValueError(f"grids differ: {a.grid} vs {b.grid}")
    d = a.values - b.values
    return float(np.sqrt(np.mean(d * d)))


def make_report(surface: SurfaceGrid, reference: SurfaceGrid | None = None) -> SurfaceReport:
    """Bundle the standard diagnostics of one surface."""
    point, value = locate_min(surface)
    return SurfaceReport(
        argmin=(float(point[0]), float(point[1])),
        min_value=value,
        local_min_count=count_local_minima(surface),
        negative_fraction=negative_fraction(surface),
        rmse_vs_reference=None if reference is None else surface_rmse(surface, reference),
    )
