"""Bicubic interpolation patches over grid cells.

Each unit cell gets the degree-(3,3) polynomial determined by the corner
values, corner first derivatives (from the arrows, length 1/2) and zero
mixed derivatives.  Adjacent cells share corner data, which makes the
stitched function C^1 on the whole domain.
"""

from __future__ import annotations

from fractions import Fraction

from .grid import GridModel, arrow_to_grad, regime_value

# the two constant matrices of the coefficient formula
_ML = (
    (1, 0, 0, 0),
    (0, 0, 1, 0),
    (-3, 3, -2, -1),
    (2, -2, 1, 1),
)
_MR = (
    (1, 0, -3, 2),
    (0, 0, 3, -2),
    (0, 1, -2, 1),
    (0, 0, -1, 1),
)


def patch_coeffs(corner_data) -> tuple:
    """4x4 coefficient matrix a[i][j] (i the x power, j the y power).

    ``corner_data[(dx, dy)] = (f, fx, fy)`` for the four cell corners;
    mixed derivatives are always zero.
    """
    f00, fx00, fy00 = corner_data[(0, 0)]
    f01, fx01, fy01 = corner_data[(0, 1)]
    f10, fx10, fy10 = corner_data[(1, 0)]
    f11, fx11, fy11 = corner_data[(1, 1)]
    zero = Fraction(0)
    F = (
        (f00, f01, fy00, fy01),
        (f10, f11, fy10, fy11),
        (fx00, fx01, zero, zero),
        (fx10, fx11, zero, zero),
    )
    tmp = [
        [sum(_ML[r][k] * F[k][c] for k in range(4)) for c in range(4)]
        for r in range(4)
    ]
    return tuple(
        tuple(sum(tmp[r][k] * _MR[k][c] for k in range(4)) for c in range(4))
        for r in range(4)
    )


def patch_eval(a, x, y) -> Fraction:
    x = Fraction(x)
    y = Fraction(y)
    xp = (Fraction(1), x, x * x, x * x * x)
    yp = (Fraction(1), y, y * y, y * y * y)
    return sum(a[i][j] * xp[i] * yp[j] for i in range(4) for j in range(4))


def patch_grad(a, x, y) -> tuple:
    x = Fraction(x)
    y = Fraction(y)
    xp = (Fraction(1), x, x * x, x * x * x)
    yp = (Fraction(1), y, y * y, y * y * y)
    fx = sum(
        i * a[i][j] * xp[i - 1] * yp[j] for i in range(1, 4) for j in range(4)
    )
    fy = sum(
        j * a[i][j] * xp[i] * yp[j - 1] for i in range(4) for j in range(1, 4)
    )
    return fx, fy


def cell_corner_data(model: GridModel, X: int, Y: int) -> dict:
    """Corner data of the cell with bottom-left grid point (X, Y)."""
    N = model.gs.N
    data = {}
    for dx in (0, 1):
        for dy in (0, 1):
            color, arrow = model.point_data(X + dx, Y + dy)
            f = regime_value(color, X + dx, Y + dy, N)
            fx, fy = arrow_to_grad(arrow)
            data[(dx, dy)] = (f, fx, fy)
    return data


def cell_of(model: GridModel, x, y) -> tuple:
    """Cell index for a point; outside points use the nearest cell."""
    N = model.gs.N
    X = min(max(int(Fraction(x).__floor__()), 0), N - 1)
    Y = min(max(int(Fraction(y).__floor__()), 0), N - 1)
    return X, Y


def eval_direct(model: GridModel, p) -> tuple:
    """Exact (f, grad f) at a rational point via the containing cell's patch."""
    x, y = Fraction(p[0]), Fraction(p[1])
    X, Y = cell_of(model, x, y)
    a = patch_coeffs(cell_corner_data(model, X, Y))
    u = x - X
    w = y - Y
    return patch_eval(a, u, w), patch_grad(a, u, w)
