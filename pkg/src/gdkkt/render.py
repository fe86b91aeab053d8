"""Static SVG rendering of grid windows (colours and descent arrows)."""

from __future__ import annotations

from .grid import DOWN, GridModel, LEFT, RIGHT, UP


class WindowTooLarge(ValueError):
    pass


_FILL = {
    0: "#d62728",  # red
    1: "#ff9a00",  # orange
    2: "#222222",  # black
    3: "#2ca02c",  # green
    4: "#1f77b4",  # blue
}

_DELTA = {LEFT: (-1, 0), RIGHT: (1, 0), UP: (0, 1), DOWN: (0, -1)}


def render_svg(model: GridModel, window, path: str, cell_px: int = 18) -> str:
    """Write an SVG of the grid points inside ``window`` = (x0, y0, x1, y1)."""
    x0, y0, x1, y1 = (int(v) for v in window)
    N = model.gs.N
    if not (0 <= x0 <= x1 <= N and 0 <= y0 <= y1 <= N):
        raise ValueError("window outside the domain")
    if (x1 - x0 + 1) * (y1 - y0 + 1) > 10**6:
        raise WindowTooLarge("window would contain more than 1e6 grid points")
    width = (x1 - x0 + 2) * cell_px
    height = (y1 - y0 + 2) * cell_px
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#f7f7f2"/>',
    ]

    def pos(x, y):
        # svg y grows downward; grid y grows upward
        return ((x - x0 + 1) * cell_px, (y1 - y + 1) * cell_px)

    arrow_len = cell_px * 0.42
    r = max(2, cell_px // 6)
    for y in range(y0, y1 + 1):
        for x in range(x0, x1 + 1):
            color, arrow = model.point_data(x, y)
            cx, cy = pos(x, y)
            dx, dy = _DELTA[arrow]
            ex = cx + dx * arrow_len
            ey = cy - dy * arrow_len
            parts.append(
                f'<line x1="{cx}" y1="{cy}" x2="{ex:.1f}" y2="{ey:.1f}" '
                f'stroke="#555" stroke-width="1.2"/>'
            )
            parts.append(
                f'<circle cx="{cx}" cy="{cy}" r="{r}" fill="{_FILL[color]}"/>'
            )
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"
    with open(path, "w") as fh:
        fh.write(svg)
    return path
