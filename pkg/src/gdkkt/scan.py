"""High-level exact scans over a compiled grid model.

The kernels do the heavy lifting in scaled int64 / float arithmetic;
every reported point is re-verified here in exact rationals before it
counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import _core as core
from .bicubic import eval_direct
from .grid import GridModel, decode_cell


@dataclass
class StationaryReport:
    sampled_hits: list = field(default_factory=list)  # (X, Y) cells
    verified_points: list = field(default_factory=list)  # (X, Y, point)
    by_region: dict = field(default_factory=dict)
    outside: list = field(default_factory=list)


def sampled_stationary_cells(model: GridModel, eps=(1, 100), tables=None):
    """Cells with a 3x3-lattice sample point that is eps-stationary (exact)."""
    tables = tables if tables is not None else core.build_tables(model)
    return core.scan_cells(tables, model, eps=eps)


def stationary_sweep(model: GridModel, eps=Fraction(1, 100), tables=None,
                     margin: float = 2.0) -> StationaryReport:
    """Global falsification sweep: lattice sampling plus per-cell Newton.

    Every float candidate is re-checked with exact rational arithmetic;
    only exact eps-stationary points are reported.
    """
    eps = Fraction(eps)
    tables = tables if tables is not None else core.build_tables(model)
    report = StationaryReport()
    report.sampled_hits = core.scan_cells(
        tables, model, eps=(eps.numerator, eps.denominator)
    )
    cands = core.newton_cells(
        tables, model, eps=(eps.numerator, eps.denominator), margin=margin
    )
    seen = set()
    for X, Y, px, py in cands:
        p = (
            Fraction(X) + Fraction(px).limit_denominator(1 << 30),
            Fraction(Y) + Fraction(py).limit_denominator(1 << 30),
        )
        _, (gx, gy) = eval_direct(model, p)
        if abs(gx) <= eps and abs(gy) <= eps:
            key = (X, Y)
            report.verified_points.append((X, Y, p))
            kind, val = decode_cell(model, X, Y)
            report.by_region.setdefault((kind, val), 0)
            report.by_region[(kind, val)] += 1
            if kind == "none" and key not in seen:
                report.outside.append((X, Y, p))
            seen.add(key)
    return report


def polish_root(model: GridModel, p, steps: int = 4, denom_cap: int = 1 << 256):
    """Exact Newton polishing of a stationary point inside its cell.

    Starting from a float-accurate root, a few exact Newton steps push the
    gradient norm far below any fixpoint threshold; iterates are capped in
    denominator size, re-verifying the gradient exactly each round.
    """
    from .bicubic import cell_corner_data, cell_of, patch_coeffs, patch_grad

    x, y = Fraction(p[0]), Fraction(p[1])
    X, Y = cell_of(model, x, y)
    A = patch_coeffs(cell_corner_data(model, X, Y))
    u, w = x - X, y - Y
    best = None
    for _ in range(steps):
        fx, fy = patch_grad(A, u, w)
        score = max(abs(fx), abs(fy))
        if best is None or score < best[0]:
            best = (score, u, w)
        # exact Hessian of the patch
        fxx = sum(
            i * (i - 1) * A[i][j] * u ** (i - 2) * w**j
            for i in range(2, 4)
            for j in range(4)
        )
        fxy = sum(
            i * j * A[i][j] * u ** (i - 1) * w ** (j - 1)
            for i in range(1, 4)
            for j in range(1, 4)
        )
        fyy = sum(
            j * (j - 1) * A[i][j] * u**i * w ** (j - 2)
            for i in range(4)
            for j in range(2, 4)
        )
        det = fxx * fyy - fxy * fxy
        if det == 0:
            break
        u = (u - (fyy * fx - fxy * fy) / det).limit_denominator(denom_cap)
        w = (w - (fxx * fy - fxy * fx) / det).limit_denominator(denom_cap)
        u = min(Fraction(1), max(Fraction(0), u))
        w = min(Fraction(1), max(Fraction(0), w))
    fx, fy = patch_grad(A, u, w)
    score = max(abs(fx), abs(fy))
    if score < best[0]:
        best = (score, u, w)
    _, u, w = best
    return (X + u, Y + w), best[0]


def regime_gap_check(model: GridModel) -> bool:
    """All pairwise regime gaps are >= 10 on the whole grid (exhaustive)."""
    return core.gap_check(model.gs.N)


def classification_matches_values(model: GridModel, tables=None,
                                  stride: int = 1) -> bool:
    """Kernel colours agree with the model and regime values match formulas."""
    import numpy as np

    from ._core import regime_values

    tables = tables if tables is not None else core.build_tables(model)
    N = model.gs.N
    xs = np.arange(0, N + 1, stride)
    for y in range(0, N + 1, stride):
        colors, _ = core.classify_window(tables, model, 0, y, N + 1, 1)
        sub = colors[0, ::stride]
        vals = regime_values(sub, xs, np.full(len(xs), y), N)
        for k in range(0, len(xs), max(1, len(xs) // 8)):
            expected = model.value(int(xs[k]), y)
            if Fraction(int(vals[k])) != expected:
                return False
    return True
