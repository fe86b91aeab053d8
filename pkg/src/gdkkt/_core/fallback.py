"""Pure-Python/numpy kernels: grid classification and exact cell scans.

All cell arithmetic is exact: corner data and patch coefficients are
small integers once scaled by 2, and the sampled gradients scaled by
2 * 4^5 stay far below 2^63, so int64 numpy arithmetic is lossless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grid import (
    BIG_TYPES,
    BLACK,
    BLUE,
    DOWN,
    GREEN,
    GridModel,
    LEFT,
    ORANGE,
    RED,
    RIGHT,
    UP,
    layout_point_kinds,
)

IMPL = "python"

TYPE_CODE = {name: i for i, name in enumerate(BIG_TYPES)}

# scale of the sampled gradients: values x2, offsets denominator 4^5
GRAD_SCALE = 2 * 4**5

_ML = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [-3, 3, -2, -1], [2, -2, 1, 1]], dtype=np.int64
)
_MR = np.array(
    [[1, 0, -3, 2], [0, 0, 3, -2], [0, 1, -2, 1], [0, 0, -1, 1]], dtype=np.int64
)


@dataclass
class ScanTables:
    """Instance data in table form for the scan kernels."""

    n: int
    m: int
    btype: np.ndarray  # (2^n, 2^n) uint8, TYPE_CODE values
    kind: np.ndarray  # (2^m + 1, 2^m + 1) uint8 medium kinds, 1-indexed

    @property
    def N(self) -> int:
        return 1 << (self.n + self.m + 4)

    @property
    def big_side(self) -> int:
        return 1 << (self.m + 4)


def build_tables(model: GridModel) -> ScanTables:
    n, m = model.gs.n, model.gs.m
    top = 1 << n
    btype = np.zeros((top, top), dtype=np.uint8)
    for v1 in range(1, top + 1):
        for v2 in range(1, top + 1):
            btype[v1 - 1, v2 - 1] = TYPE_CODE[model.type_of(v1, v2)]
    mt = 1 << m
    kind = np.full((mt + 1, mt + 1), 7, dtype=np.uint8)
    for a in range(1, mt + 1):
        for b in range(1, mt + 1):
            kind[a, b] = model.kind_of(a, b)
    return ScanTables(n, m, btype, kind)


def _point_fn(tables: ScanTables, model: GridModel):
    gs = model.gs
    S = tables.big_side
    top = 1 << tables.n
    code_to_name = {v: k for k, v in TYPE_CODE.items()}
    kind_tab = tables.kind

    def kind_of(a, b):
        return int(kind_tab[a, b])

    def point(x, y):
        v1 = min(x // S, top - 1)
        v2 = min(y // S, top - 1)
        name = code_to_name[int(tables.btype[v1, v2])]
        return layout_point_kinds(
            gs, tables.m, kind_of, name, x - v1 * S, y - v2 * S
        )

    return point


def classify_window(tables: ScanTables, model: GridModel, x0, y0, w, h):
    """(colors, arrows) uint8 arrays for grid points [x0, x0+w) x [y0, y0+h)."""
    point = _point_fn(tables, model)
    colors = np.empty((h, w), dtype=np.uint8)
    arrows = np.empty((h, w), dtype=np.uint8)
    for r in range(h):
        y = y0 + r
        crow = colors[r]
        arow = arrows[r]
        for qcol in range(w):
            c, a = point(x0 + qcol, y)
            crow[qcol] = c
            arow[qcol] = a
    return colors, arrows


def regime_values(colors: np.ndarray, xs: np.ndarray, ys: np.ndarray, N: int):
    """Exact regime values (int64) for a grid of classified points."""
    x = xs.astype(np.int64)
    y = ys.astype(np.int64)
    return np.select(
        [colors == RED, colors == ORANGE, colors == BLACK, colors == GREEN, colors == BLUE],
        [x - y + 4 * N + 20, -x - y + 4 * N + 10, x + y, -x - y - 10, x - y - 2 * N - 20],
    )


def _grad_basis(offsets):
    """Coefficient tensors mapping 2*A to scaled sampled gradients."""
    pts = [(p, q) for p in offsets for q in offsets]
    bx = np.zeros((len(pts), 4, 4), dtype=np.int64)
    by = np.zeros((len(pts), 4, 4), dtype=np.int64)
    for k, (p, q) in enumerate(pts):
        for i in range(4):
            for j in range(4):
                if i >= 1:
                    bx[k, i, j] = i * p ** (i - 1) * q**j * 4 ** (5 - (i - 1) - j)
                if j >= 1:
                    by[k, i, j] = j * p**i * q ** (j - 1) * 4 ** (5 - i - (j - 1))
    return bx, by


def _row_coeffs(vals, fx2, fy2):
    """2x the coefficient matrices for one row of cells.

    ``vals``/``fx2``/``fy2`` are (2, w) int64 arrays for two point rows;
    values are doubled so that derivative entries (+-1/2) become +-1.
    """
    w = vals.shape[1] - 1
    F = np.empty((w, 4, 4), dtype=np.int64)
    F[:, 0, 0] = 2 * vals[0, :-1]
    F[:, 0, 1] = 2 * vals[1, :-1]
    F[:, 0, 2] = fy2[0, :-1]
    F[:, 0, 3] = fy2[1, :-1]
    F[:, 1, 0] = 2 * vals[0, 1:]
    F[:, 1, 1] = 2 * vals[1, 1:]
    F[:, 1, 2] = fy2[0, 1:]
    F[:, 1, 3] = fy2[1, 1:]
    F[:, 2, 0] = fx2[0, :-1]
    F[:, 2, 1] = fx2[1, :-1]
    F[:, 2, 2] = 0
    F[:, 2, 3] = 0
    F[:, 3, 0] = fx2[0, 1:]
    F[:, 3, 1] = fx2[1, 1:]
    F[:, 3, 2] = 0
    F[:, 3, 3] = 0
    return np.einsum("rk,ckl,ls->crs", _ML, F, _MR)


def scan_cells(
    tables: ScanTables,
    model: GridModel,
    eps=(1, 100),
    offsets=(1, 2, 3),
    progress=None,
):
    """Cells with a sampled point where max(|f_x|, |f_y|) <= eps.

    Samples the 3x3 interior lattice (offsets/4) of every cell; the
    comparison |g| <= eps is done exactly on scaled integers.
    """
    N = tables.N
    a_num, a_den = int(eps[0]), int(eps[1])
    bx, by = _grad_basis(offsets)
    point = _point_fn(tables, model)
    hits = []

    def row_data(y):
        colors = np.empty(N + 1, dtype=np.uint8)
        arrows = np.empty(N + 1, dtype=np.uint8)
        for x in range(N + 1):
            c, a = point(x, y)
            colors[x] = c
            arrows[x] = a
        xs = np.arange(N + 1, dtype=np.int64)
        vals = regime_values(colors, xs, np.full(N + 1, y, dtype=np.int64), N)
        fx2 = np.where(arrows == LEFT, 1, np.where(arrows == RIGHT, -1, 0)).astype(
            np.int64
        )
        fy2 = np.where(arrows == DOWN, 1, np.where(arrows == UP, -1, 0)).astype(
            np.int64
        )
        return vals, fx2, fy2

    prev = row_data(0)
    for Y in range(N):
        cur = row_data(Y + 1)
        vals = np.stack([prev[0], cur[0]])
        fx2 = np.stack([prev[1], cur[1]])
        fy2 = np.stack([prev[2], cur[2]])
        A2 = _row_coeffs(vals, fx2, fy2)
        gx = np.einsum("crs,krs->ck", A2, bx)
        gy = np.einsum("crs,krs->ck", A2, by)
        ok = (np.abs(gx) * a_den <= GRAD_SCALE * a_num) & (
            np.abs(gy) * a_den <= GRAD_SCALE * a_num
        )
        for X in np.nonzero(ok.any(axis=1))[0]:
            hits.append((int(X), Y))
        prev = cur
        if progress and Y % 128 == 0:
            progress(Y, N)
    return hits


def newton_cells(
    tables: ScanTables,
    model: GridModel,
    eps=(1, 100),
    margin: float = 1.5,
    iters: int = 30,
    progress=None,
):
    """Float-Newton candidate search for stationary points in every cell.

    From a 3x3 lattice of seeds per cell, Newton iterations on
    (f_x, f_y) = 0 are run for all cells of a row band at once; cells
    whose refined point has max(|f_x|, |f_y|) below margin * eps are
    returned as (X, Y, x_local, y_local) candidates for exact
    verification.
    """
    N = tables.N
    tol = float(eps[0]) / float(eps[1]) * margin
    point = _point_fn(tables, model)
    out = []

    def row_data(y):
        colors = np.empty(N + 1, dtype=np.uint8)
        arrows = np.empty(N + 1, dtype=np.uint8)
        for x in range(N + 1):
            c, a = point(x, y)
            colors[x] = c
            arrows[x] = a
        xs = np.arange(N + 1, dtype=np.int64)
        vals = regime_values(colors, xs, np.full(N + 1, y, dtype=np.int64), N)
        fx2 = np.where(arrows == LEFT, 1, np.where(arrows == RIGHT, -1, 0)).astype(
            np.int64
        )
        fy2 = np.where(arrows == DOWN, 1, np.where(arrows == UP, -1, 0)).astype(
            np.int64
        )
        return vals, fx2, fy2

    prev = row_data(0)
    for Y in range(N):
        cur = row_data(Y + 1)
        A = _row_coeffs(
            np.stack([prev[0], cur[0]]),
            np.stack([prev[1], cur[1]]),
            np.stack([prev[2], cur[2]]),
        ).astype(np.float64) / 2.0
        for sx in (0.25, 0.5, 0.75):
            for sy in (0.25, 0.5, 0.75):
                px = np.full(A.shape[0], sx)
                py = np.full(A.shape[0], sy)
                for _ in range(iters):
                    xp = np.stack([np.ones_like(px), px, px**2, px**3])
                    dx = np.stack([np.zeros_like(px), np.ones_like(px), 2 * px, 3 * px**2])
                    d2x = np.stack([np.zeros_like(px), np.zeros_like(px), 2 + 0 * px, 6 * px])
                    yp = np.stack([np.ones_like(py), py, py**2, py**3])
                    dy = np.stack([np.zeros_like(py), np.ones_like(py), 2 * py, 3 * py**2])
                    d2y = np.stack([np.zeros_like(py), np.zeros_like(py), 2 + 0 * py, 6 * py])
                    fx = np.einsum("cij,ic,jc->c", A, dx, yp)
                    fy = np.einsum("cij,ic,jc->c", A, xp, dy)
                    fxx = np.einsum("cij,ic,jc->c", A, d2x, yp)
                    fxy = np.einsum("cij,ic,jc->c", A, dx, dy)
                    fyy = np.einsum("cij,ic,jc->c", A, xp, d2y)
                    det = fxx * fyy - fxy * fxy
                    safe = np.abs(det) > 1e-12
                    inv = np.where(safe, det, 1.0)
                    step_x = np.where(safe, (fyy * fx - fxy * fy) / inv, 0.05 * fx)
                    step_y = np.where(safe, (fxx * fy - fxy * fx) / inv, 0.05 * fy)
                    px = np.clip(px - step_x, 0.0, 1.0)
                    py = np.clip(py - step_y, 0.0, 1.0)
                xp = np.stack([np.ones_like(px), px, px**2, px**3])
                dx = np.stack([np.zeros_like(px), np.ones_like(px), 2 * px, 3 * px**2])
                yp = np.stack([np.ones_like(py), py, py**2, py**3])
                dy = np.stack([np.zeros_like(py), np.ones_like(py), 2 * py, 3 * py**2])
                fx = np.einsum("cij,ic,jc->c", A, dx, yp)
                fy = np.einsum("cij,ic,jc->c", A, xp, dy)
                good = (np.abs(fx) <= tol) & (np.abs(fy) <= tol)
                for X in np.nonzero(good)[0]:
                    out.append((int(X), Y, float(px[X]), float(py[X])))
        prev = cur
        if progress and Y % 64 == 0:
            progress(Y, N)
    return out


def eval_linear_program(prog: dict, pts_scaled, chunk: int = 16384):
    """Exact evaluation of a scaled-int linear program at many points.

    Gate-major numpy evaluation with liveness-based freeing; int64
    arithmetic is exact because the compiler asserted dyadic scales.
    """
    ops = prog["ops"]
    a = prog["a"]
    b = prog["b"]
    cnum = prog["cnum"]
    cshift = prog["cshift"]
    outs = prog["outs"]
    ng = len(ops)
    last_use = np.full(ng, -1, dtype=np.int64)
    for idx in range(ng):
        op = ops[idx]
        if op in (2, 3, 5, 6):  # ADD SUB MAX MIN
            last_use[a[idx]] = idx
            last_use[b[idx]] = idx
        elif op == 4:  # MULC
            last_use[a[idx]] = idx
    for o in outs:
        last_use[o] = ng
    results = []
    npts = pts_scaled.shape[0]
    for lo in range(0, npts, chunk):
        block = pts_scaled[lo : lo + chunk]
        vals: dict = {}
        for idx in range(ng):
            op = ops[idx]
            if op == 0:
                v = block[:, a[idx]].copy()
            elif op == 1:
                v = np.full(block.shape[0], cnum[idx], dtype=np.int64)
            elif op == 2:
                v = vals[a[idx]] + vals[b[idx]]
            elif op == 3:
                v = vals[a[idx]] - vals[b[idx]]
            elif op == 4:
                v = vals[a[idx]] * cnum[idx]
                sh = int(cshift[idx])
                if sh:
                    if np.any(v & ((1 << sh) - 1)):
                        raise ValueError("inexact dyadic shift in evaluation")
                    v >>= sh
            elif op == 5:
                v = np.maximum(vals[a[idx]], vals[b[idx]])
            else:
                v = np.minimum(vals[a[idx]], vals[b[idx]])
            vals[idx] = v
            if op in (2, 3, 4, 5, 6):
                for operand in (a[idx], b[idx]) if op != 4 else (a[idx],):
                    if last_use[operand] == idx:
                        del vals[operand]
        results.append(np.stack([vals[o] for o in outs], axis=1))
    return np.concatenate(results, axis=0)


def gap_check(N: int) -> bool:
    """Pairwise regime gaps are >= 10 at every grid point (exhaustive)."""
    xs = np.arange(N + 1, dtype=np.int64)
    for y in range(N + 1):
        x = xs
        vals = [
            x - y + 4 * N + 20,
            -x - y + 4 * N + 10,
            x + y,
            -x - y - 10,
            x - y - 2 * N - 20,
        ]
        for hi, lo in zip(vals, vals[1:]):
            if int(np.min(hi - lo)) < 10:
                return False
    return True
