"""Static SVG heatmaps of surface grids.

One rectangle per grid node, coloured by linear interpolation between
rgb(13, 8, 135) at the grid minimum and rgb(240, 249, 33) at the maximum
(a constant surface renders entirely at the low colour).  The vertical
axis points up: larger w2 is drawn higher.  An optional marker draws a
red square on the given node, conventionally the lowest sampled value.
"""

from __future__ import annotations

from .analysis import SurfaceGrid
from .artifacts import _open_out

_LOW = (13, 8, 135)
_HIGH = (240, 249, 33)


def _colour(t: float) -> str:
    rgb = (int(round(lo + t * (hi - lo))) for lo, hi in zip(_LOW, _HIGH))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _node_index(grid, point, axis: int) -> int:
    step = (grid.upper[axis] - grid.lower[axis]) / (grid.resolution - 1)
    k = int(round((float(point[axis]) - grid.lower[axis]) / step))
    return min(max(k, 0), grid.resolution - 1)


def render_heatmap_svg(surface: SurfaceGrid, path, marker=None) -> None:
    """Write surface as an SVG heatmap; marker is an optional (w1, w2) node."""
    grid = surface.grid
    res = grid.resolution
    px = max(2, 600 // res)
    size = px * res
    flat = surface.values.ravel()
    vmin = float(flat.min())
    span = float(flat.max()) - vmin
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">'
    ]
    for k, v in enumerate(flat):
        i = k % res
        j = k // res
        t = 0.0 if span == 0 else (float(v) - vmin) / span
        x = i * px
        y = (res - 1 - j) * px
        lines.append(f'<rect x="{x}" y="{y}" width="{px}" height="{px}" fill="{_colour(t)}"/>')
    if marker is not None:
        i = _node_index(grid, marker, 0)
        j = _node_index(grid, marker, 1)
        inset = px // 6
        side = px - 2 * inset
        x = i * px + inset
        y = (res - 1 - j) * px + inset
        lines.append(f'<rect x="{x}" y="{y}" width="{side}" height="{side}" fill="#ff0000"/>')
    lines.append("</svg>")
    with _open_out(path) as f:
        f.write("\n".join(lines) + "\n")
