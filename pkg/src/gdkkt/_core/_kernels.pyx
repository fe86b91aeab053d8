# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled scan kernels: grid classification and stationary-cell scans.

This is a transcription of gdkkt.grid's layout decision tree plus the
exact integer patch arithmetic of the fallback kernels; the test suite
checks it against the pure-Python implementation point for point.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef int RED = 0, ORANGE = 1, BLACK = 2, GREEN = 3, BLUE = 4
cdef int LEFT = 0, RIGHT = 1, UP = 2, DOWN = 3

# big-square type codes (order of gdkkt.grid.BIG_TYPES)
cdef int T_S = 0, T_E1 = 1, T_E2 = 2
cdef int T_G1 = 3, T_G2 = 4, T_G3 = 5, T_G4 = 6, T_G5 = 7, T_G6 = 8, T_G7 = 9
cdef int T_O1 = 10, T_O2 = 11, T_O3 = 12, T_O4 = 13, T_O5 = 14, T_O6 = 15, T_O7 = 16
cdef int T_LA = 17, T_LB = 18

IMPL = "cython"


cdef inline int _pack(int color, int arrow) nogil:
    return color * 4 + arrow


cdef inline int _swap_pack(int packed) nogil:
    cdef int color = packed >> 2
    cdef int arrow = packed & 3
    if color == RED:
        color = BLUE
    elif color == BLUE:
        color = RED
    elif color == GREEN:
        color = ORANGE
    elif color == ORANGE:
        color = GREEN
    return color * 4 + arrow


cdef inline int _lay_S(int i, int j, int c) nogil:
    if j == c - 1 or j == c:
        return _pack(GREEN, RIGHT)
    if i <= 1 and j <= c - 2:
        return _pack(GREEN, UP)
    if i == 0:
        return _pack(BLACK, DOWN)
    return _pack(BLACK, LEFT)


cdef inline int _lay_E2(int i, int j, int c) nogil:
    if i == 0:
        return _pack(BLACK, DOWN)
    return _pack(BLACK, LEFT)


cdef inline int _lay_G1(int i, int j, int c) nogil:
    if j == c - 1 or j == c:
        return _pack(GREEN, RIGHT)
    return _pack(BLACK, LEFT)


cdef inline int _lay_G2(int i, int j, int c) nogil:
    if i == c or i == c + 1:
        return _pack(GREEN, UP)
    if i == c - 1:
        return _pack(BLACK, DOWN)
    return _pack(BLACK, LEFT)


cdef inline int _lay_G3(int i, int j, int c) nogil:
    if i == c or i == c + 1:
        if j >= c + 1:
            return _pack(GREEN, UP)
        if j == c - 1 or j == c:
            return _pack(GREEN, RIGHT if i == c else UP)
    if (j == c - 1 or j == c) and i <= c - 1:
        return _pack(GREEN, RIGHT)
    if i == c - 1 and j >= c + 1:
        return _pack(BLACK, DOWN)
    return _pack(BLACK, LEFT)


cdef inline int _lay_G4(int i, int j, int c) nogil:
    if (i == c or i == c + 1) and j <= c - 2:
        return _pack(GREEN, UP)
    if (j == c - 1 or j == c) and i >= c:
        return _pack(GREEN, RIGHT)
    if i == c - 1 and j <= c:
        return _pack(BLACK, DOWN)
    return _pack(BLACK, LEFT)


cdef inline int _lay_G5(int i, int j, int c) nogil:
    if (j == c - 1 or j == c) and i >= c - 1:
        return _pack(GREEN, RIGHT)
    return _pack(BLACK, LEFT)


cdef inline int _lay_G6(int i, int j, int c) nogil:
    if (i == c or i == c + 1) and j <= c:
        return _pack(GREEN, UP)
    if i == c - 1 and j <= c:
        return _pack(BLACK, DOWN)
    return _pack(BLACK, LEFT)


cdef inline int _lay_G7(int i, int j, int c) nogil:
    if (i == c or i == c + 1) and j >= c + 4:
        return _pack(GREEN, UP)
    if i == c - 1 and j >= c + 4:
        return _pack(BLACK, DOWN)
    if j == c + 2 or j == c + 3:
        if i == c or i == c + 1:
            return _pack(GREEN, RIGHT if i == c else UP)
        if c - 4 <= i <= c - 1:
            return _pack(GREEN, RIGHT)
        if i == c - 5:
            return _pack(BLACK, DOWN)
        return _pack(BLACK, LEFT)
    if j == c + 1:
        if i == c - 4 or i == c - 3:
            return _pack(GREEN, UP)
        if i == c - 5:
            return _pack(BLACK, DOWN)
        return _pack(BLACK, LEFT)
    if j == c + 4 and i == c - 5:
        return _pack(BLACK, DOWN)
    if j == c - 1 or j == c:
        if i <= c - 5:
            return _pack(GREEN, RIGHT)
        if i == c - 4 or i == c - 3:
            return _pack(GREEN, RIGHT if i == c - 4 else UP)
        if i == c - 2:
            return _pack(BLACK, LEFT)
        if i == c - 1:
            return _pack(BLACK, DOWN)
        return _pack(GREEN, RIGHT)
    if (i == c or i == c + 1) and j <= c - 2:
        return _pack(GREEN, UP)
    if i == c - 1 and j <= c - 2:
        return _pack(BLACK, DOWN)
    return _pack(BLACK, LEFT)


cdef inline int _medium_layout(int kind, int lx, int ly) nogil:
    if kind == 1:
        if lx == 1:
            return _pack(ORANGE, UP)
        if lx == 2 or lx == 3:
            return _pack(BLUE, UP)
    elif kind == 2:
        if ly <= 2:
            if lx == 1:
                return _pack(ORANGE, UP)
            if lx == 2 or lx == 3:
                return _pack(BLUE, UP)
    elif kind == 3:
        if 1 <= ly <= 3:
            return _pack(BLUE, LEFT)
    elif kind == 4:
        if ly == 0:
            if lx == 1:
                return _pack(ORANGE, UP)
            if lx == 2 or lx == 3:
                return _pack(BLUE, UP)
        elif ly <= 3 and lx <= 3:
            return _pack(BLUE, LEFT)
    elif kind == 5:
        if lx == 1:
            return _pack(ORANGE, UP)
        if lx == 2 or lx == 3:
            return _pack(BLUE, UP)
        if lx == 4 and 1 <= ly <= 3:
            return _pack(BLUE, LEFT)
    elif kind == 6:
        if 1 <= ly <= 3 and lx <= 3:
            return _pack(BLUE, LEFT)
    return _pack(BLACK, LEFT)


cdef inline int _lay_LA(int i, int j, int c, int m,
                        const unsigned char[:, :] kind) nogil:
    cdef int lab = 4 * (1 << m)
    cdef int rel, a, lx, roff, b, ly
    if j >= c + 2 and c + 2 - lab <= i <= c + 2 and j <= c + 2 + lab:
        rel = c + 2 - i
        a = (rel + 3) >> 2
        if a < 1:
            a = 1
        lx = 4 * a - rel
        roff = j - (c + 2)
        b = (roff + 3) >> 2
        if b < 1:
            b = 1
        ly = roff + 4 - 4 * b
        return _medium_layout(kind[a, b], lx, ly)
    if j == c + 1:
        if i <= c - 2:
            return _pack(ORANGE, RIGHT)
        if i == c - 1:
            return _pack(ORANGE, UP)
        if i == c or i == c + 1:
            return _pack(BLUE, UP)
        return _pack(BLACK, LEFT)
    if j == c:
        if i <= c - 1:
            return _pack(ORANGE, RIGHT)
        if i == c:
            return _pack(GREEN, RIGHT)
        if i == c + 1:
            return _pack(GREEN, UP)
        return _pack(BLACK, LEFT)
    if j == c - 1:
        if i == c - 1:
            return _pack(BLACK, DOWN)
        if i == c:
            return _pack(GREEN, RIGHT)
        if i == c + 1:
            return _pack(GREEN, UP)
        return _pack(BLACK, LEFT)
    if (i == c or i == c + 1) and j <= c - 2:
        return _pack(GREEN, UP)
    if i == c - 1 and j <= c - 2:
        return _pack(BLACK, DOWN)
    return _pack(BLACK, LEFT)


cdef int _layout(int btype, int i, int j, int c, int S, int m,
                 const unsigned char[:, :] kind) nogil:
    if btype == T_E1:
        return _pack(BLACK, LEFT)
    if btype == T_E2:
        return _lay_E2(i, j, c)
    if btype == T_S:
        return _lay_S(i, j, c)
    if btype == T_G1:
        return _lay_G1(i, j, c)
    if btype == T_G2:
        return _lay_G2(i, j, c)
    if btype == T_G3:
        return _lay_G3(i, j, c)
    if btype == T_G4:
        return _lay_G4(i, j, c)
    if btype == T_G5:
        return _lay_G5(i, j, c)
    if btype == T_G6:
        return _lay_G6(i, j, c)
    if btype == T_G7:
        return _lay_G7(i, j, c)
    if btype == T_LA:
        return _lay_LA(i, j, c, m, kind)
    if btype == T_O1:
        return _swap_pack(_lay_G1(S - i, S - j, c))
    if btype == T_O2:
        return _swap_pack(_lay_G2(S - i, S - j, c))
    if btype == T_O3:
        return _swap_pack(_lay_G3(S - i, S - j, c))
    if btype == T_O4:
        return _swap_pack(_lay_G4(S - i, S - j, c))
    if btype == T_O5:
        return _swap_pack(_lay_G5(S - i, S - j, c))
    if btype == T_O6:
        return _swap_pack(_lay_G6(S - i, S - j, c))
    if btype == T_O7:
        return _swap_pack(_lay_G7(S - i, S - j, c))
    if btype == T_LB:
        return _swap_pack(_lay_LA(S - i, S - j, c, m, kind))
    return _pack(BLACK, LEFT)


cdef inline int _point(const unsigned char[:, :] btype,
                       const unsigned char[:, :] kind,
                       int n, int m, int x, int y) nogil:
    cdef int S = 1 << (m + 4)
    cdef int top = 1 << n
    cdef int v1 = x >> (m + 4)
    cdef int v2 = y >> (m + 4)
    if v1 > top - 1:
        v1 = top - 1
    if v2 > top - 1:
        v2 = top - 1
    return _layout(btype[v1, v2], x - v1 * S, y - v2 * S, S >> 1, S, m, kind)


def classify_window(tables, model, int x0, int y0, int w, int h):
    """Match the fallback signature; ``model`` is unused here."""
    cdef const unsigned char[:, :] btype = tables.btype
    cdef const unsigned char[:, :] kind = tables.kind
    cdef int n = tables.n, m = tables.m
    colors = np.empty((h, w), dtype=np.uint8)
    arrows = np.empty((h, w), dtype=np.uint8)
    cdef unsigned char[:, :] cv = colors
    cdef unsigned char[:, :] av = arrows
    cdef int r, q, packed
    for r in range(h):
        for q in range(w):
            packed = _point(btype, kind, n, m, x0 + q, y0 + r)
            cv[r, q] = packed >> 2
            av[r, q] = packed & 3
    return colors, arrows


cdef void _row_data(const unsigned char[:, :] btype,
                    const unsigned char[:, :] kind,
                    int n, int m, int N, int y,
                    long long[:] vals, long long[:] fx2, long long[:] fy2) nogil:
    cdef int x, packed, color, arrow
    for x in range(N + 1):
        packed = _point(btype, kind, n, m, x, y)
        color = packed >> 2
        arrow = packed & 3
        if color == RED:
            vals[x] = x - y + 4 * N + 20
        elif color == ORANGE:
            vals[x] = -x - y + 4 * N + 10
        elif color == BLACK:
            vals[x] = x + y
        elif color == GREEN:
            vals[x] = -x - y - 10
        else:
            vals[x] = x - y - 2 * N - 20
        if arrow == LEFT:
            fx2[x] = 1
            fy2[x] = 0
        elif arrow == RIGHT:
            fx2[x] = -1
            fy2[x] = 0
        elif arrow == UP:
            fx2[x] = 0
            fy2[x] = -1
        else:
            fx2[x] = 0
            fy2[x] = 1


def scan_cells(tables, model, eps=(1, 100), offsets=(1, 2, 3), progress=None):
    """Cells with a sampled interior point where max(|fx|, |fy|) <= eps."""
    cdef const unsigned char[:, :] btype = tables.btype
    cdef const unsigned char[:, :] kind = tables.kind
    cdef int n = tables.n, m = tables.m
    cdef int N = tables.N
    cdef long long a_num = int(eps[0]), a_den = int(eps[1])
    cdef long long scale = 2 * 4 ** 5

    offs = list(offsets)
    cdef int npts = len(offs) * len(offs)
    bx_np = np.zeros((npts, 4, 4), dtype=np.int64)
    by_np = np.zeros((npts, 4, 4), dtype=np.int64)
    cdef int k = 0, i, j
    for p in offs:
        for q in offs:
            for i in range(4):
                for j in range(4):
                    if i >= 1:
                        bx_np[k, i, j] = i * p ** (i - 1) * q**j * 4 ** (5 - (i - 1) - j)
                    if j >= 1:
                        by_np[k, i, j] = j * p**i * q ** (j - 1) * 4 ** (5 - i - (j - 1))
            k += 1
    cdef long long[:, :, :] bx = bx_np
    cdef long long[:, :, :] by = by_np

    ML_np = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [-3, 3, -2, -1], [2, -2, 1, 1]],
                     dtype=np.int64)
    MR_np = np.array([[1, 0, -3, 2], [0, 0, 3, -2], [0, 1, -2, 1], [0, 0, -1, 1]],
                     dtype=np.int64)
    cdef long long[:, :] ML = ML_np
    cdef long long[:, :] MR = MR_np

    buf = [np.empty(N + 1, dtype=np.int64) for _ in range(6)]
    cdef long long[:] vals0 = buf[0]
    cdef long long[:] fx20 = buf[1]
    cdef long long[:] fy20 = buf[2]
    cdef long long[:] vals1 = buf[3]
    cdef long long[:] fx21 = buf[4]
    cdef long long[:] fy21 = buf[5]

    cdef long long F[4][4]
    cdef long long T[4][4]
    cdef long long A[4][4]
    cdef long long gx, gy, acc
    cdef int X, Y, r, cc, kk, hit
    hits = []

    _row_data(btype, kind, n, m, N, 0, vals0, fx20, fy20)
    for Y in range(N):
        _row_data(btype, kind, n, m, N, Y + 1, vals1, fx21, fy21)
        for X in range(N):
            F[0][0] = 2 * vals0[X]
            F[0][1] = 2 * vals1[X]
            F[0][2] = fy20[X]
            F[0][3] = fy21[X]
            F[1][0] = 2 * vals0[X + 1]
            F[1][1] = 2 * vals1[X + 1]
            F[1][2] = fy20[X + 1]
            F[1][3] = fy21[X + 1]
            F[2][0] = fx20[X]
            F[2][1] = fx21[X]
            F[2][2] = 0
            F[2][3] = 0
            F[3][0] = fx20[X + 1]
            F[3][1] = fx21[X + 1]
            F[3][2] = 0
            F[3][3] = 0
            for r in range(4):
                for cc in range(4):
                    acc = 0
                    for kk in range(4):
                        acc += ML[r, kk] * F[kk][cc]
                    T[r][cc] = acc
            for r in range(4):
                for cc in range(4):
                    acc = 0
                    for kk in range(4):
                        acc += T[r][kk] * MR[kk, cc]
                    A[r][cc] = acc
            hit = 0
            for kk in range(npts):
                gx = 0
                gy = 0
                for r in range(4):
                    for cc in range(4):
                        gx += A[r][cc] * bx[kk, r, cc]
                        gy += A[r][cc] * by[kk, r, cc]
                if gx < 0:
                    gx = -gx
                if gy < 0:
                    gy = -gy
                if gx * a_den <= scale * a_num and gy * a_den <= scale * a_num:
                    hit = 1
                    break
            if hit:
                hits.append((X, Y))
        vals0[:] = vals1
        fx20[:] = fx21
        fy20[:] = fy21
        if progress is not None and Y % 128 == 0:
            progress(Y, N)
    return hits


def eval_linear_program(prog, pts_scaled, chunk=0):
    """Exact per-point evaluation of a scaled-int linear program."""
    cdef const unsigned char[:] ops = prog["ops"]
    cdef const int[:] a = prog["a"]
    cdef const int[:] b = prog["b"]
    cdef const long long[:] cnum = prog["cnum"]
    cdef const signed char[:] cshift = prog["cshift"]
    cdef const int[:] outs = prog["outs"]
    cdef const long long[:, :] pts = pts_scaled
    cdef int ng = ops.shape[0]
    cdef int npts = pts.shape[0]
    cdef int nouts = outs.shape[0]
    vals_np = np.empty(ng, dtype=np.int64)
    out_np = np.empty((npts, nouts), dtype=np.int64)
    cdef long long[:] vals = vals_np
    cdef long long[:, :] out = out_np
    cdef int p, idx, op, oi
    cdef long long v, va, vb, mask
    cdef int bad = 0
    with nogil:
        for p in range(npts):
            for idx in range(ng):
                op = ops[idx]
                if op == 0:
                    v = pts[p, a[idx]]
                elif op == 1:
                    v = cnum[idx]
                elif op == 2:
                    v = vals[a[idx]] + vals[b[idx]]
                elif op == 3:
                    v = vals[a[idx]] - vals[b[idx]]
                elif op == 4:
                    v = vals[a[idx]] * cnum[idx]
                    if cshift[idx]:
                        mask = (<long long>1 << cshift[idx]) - 1
                        if v & mask:
                            bad = 1
                        v >>= cshift[idx]
                else:
                    va = vals[a[idx]]
                    vb = vals[b[idx]]
                    if op == 5:
                        v = va if va >= vb else vb
                    else:
                        v = va if va <= vb else vb
                vals[idx] = v
            for oi in range(nouts):
                out[p, oi] = vals[outs[oi]]
    if bad:
        raise ValueError("inexact dyadic shift in evaluation")
    return out_np


cdef inline double _poly(double A[4][4], double* xp, double* yp) nogil:
    cdef double acc = 0
    cdef int i, j
    for i in range(4):
        for j in range(4):
            if A[i][j] != 0:
                acc += A[i][j] * xp[i] * yp[j]
    return acc


def newton_cells(tables, model, eps=(1, 100), double margin=1.5, int iters=30,
                 progress=None):
    """Float-Newton stationary-point candidates for every cell."""
    cdef const unsigned char[:, :] btype = tables.btype
    cdef const unsigned char[:, :] kind = tables.kind
    cdef int n = tables.n, m = tables.m
    cdef int N = tables.N
    cdef double tol = (<double>int(eps[0])) / (<double>int(eps[1])) * margin

    buf = [np.empty(N + 1, dtype=np.int64) for _ in range(6)]
    cdef long long[:] vals0 = buf[0]
    cdef long long[:] fx20 = buf[1]
    cdef long long[:] fy20 = buf[2]
    cdef long long[:] vals1 = buf[3]
    cdef long long[:] fx21 = buf[4]
    cdef long long[:] fy21 = buf[5]

    cdef long long ML[4][4]
    cdef long long MR[4][4]
    ML_np = [[1, 0, 0, 0], [0, 0, 1, 0], [-3, 3, -2, -1], [2, -2, 1, 1]]
    MR_np = [[1, 0, -3, 2], [0, 0, 3, -2], [0, 1, -2, 1], [0, 0, -1, 1]]
    cdef int r, cc, kk
    for r in range(4):
        for cc in range(4):
            ML[r][cc] = ML_np[r][cc]
            MR[r][cc] = MR_np[r][cc]

    cdef long long F[4][4]
    cdef long long T[4][4]
    cdef long long acc
    cdef double A[4][4]
    cdef double xp[4]
    cdef double dx[4]
    cdef double d2x[4]
    cdef double yp[4]
    cdef double dy[4]
    cdef double d2y[4]
    cdef double px, py, fx, fy, fxx, fxy, fyy, det, sx, sy
    cdef int X, Y, it, si, sj
    cdef double seeds[3]
    seeds[0] = 0.25
    seeds[1] = 0.5
    seeds[2] = 0.75
    out = []

    _row_data(btype, kind, n, m, N, 0, vals0, fx20, fy20)
    for Y in range(N):
        _row_data(btype, kind, n, m, N, Y + 1, vals1, fx21, fy21)
        for X in range(N):
            F[0][0] = 2 * vals0[X]
            F[0][1] = 2 * vals1[X]
            F[0][2] = fy20[X]
            F[0][3] = fy21[X]
            F[1][0] = 2 * vals0[X + 1]
            F[1][1] = 2 * vals1[X + 1]
            F[1][2] = fy20[X + 1]
            F[1][3] = fy21[X + 1]
            F[2][0] = fx20[X]
            F[2][1] = fx21[X]
            F[2][2] = 0
            F[2][3] = 0
            F[3][0] = fx20[X + 1]
            F[3][1] = fx21[X + 1]
            F[3][2] = 0
            F[3][3] = 0
            for r in range(4):
                for cc in range(4):
                    acc = 0
                    for kk in range(4):
                        acc += ML[r][kk] * F[kk][cc]
                    T[r][cc] = acc
            for r in range(4):
                for cc in range(4):
                    acc = 0
                    for kk in range(4):
                        acc += T[r][kk] * MR[kk][cc]
                    A[r][cc] = 0.5 * acc
            for si in range(3):
                for sj in range(3):
                    px = seeds[si]
                    py = seeds[sj]
                    for it in range(iters):
                        xp[0] = 1; xp[1] = px; xp[2] = px * px; xp[3] = xp[2] * px
                        dx[0] = 0; dx[1] = 1; dx[2] = 2 * px; dx[3] = 3 * xp[2]
                        d2x[0] = 0; d2x[1] = 0; d2x[2] = 2; d2x[3] = 6 * px
                        yp[0] = 1; yp[1] = py; yp[2] = py * py; yp[3] = yp[2] * py
                        dy[0] = 0; dy[1] = 1; dy[2] = 2 * py; dy[3] = 3 * yp[2]
                        d2y[0] = 0; d2y[1] = 0; d2y[2] = 2; d2y[3] = 6 * py
                        fx = _poly(A, dx, yp)
                        fy = _poly(A, xp, dy)
                        fxx = _poly(A, d2x, yp)
                        fxy = _poly(A, dx, dy)
                        fyy = _poly(A, xp, d2y)
                        det = fxx * fyy - fxy * fxy
                        if det > 1e-12 or det < -1e-12:
                            sx = (fyy * fx - fxy * fy) / det
                            sy = (fxx * fy - fxy * fx) / det
                        else:
                            sx = 0.05 * fx
                            sy = 0.05 * fy
                        px = px - sx
                        py = py - sy
                        if px < 0:
                            px = 0
                        elif px > 1:
                            px = 1
                        if py < 0:
                            py = 0
                        elif py > 1:
                            py = 1
                    xp[0] = 1; xp[1] = px; xp[2] = px * px; xp[3] = xp[2] * px
                    dx[0] = 0; dx[1] = 1; dx[2] = 2 * px; dx[3] = 3 * xp[2]
                    yp[0] = 1; yp[1] = py; yp[2] = py * py; yp[3] = yp[2] * py
                    dy[0] = 0; dy[1] = 1; dy[2] = 2 * py; dy[3] = 3 * yp[2]
                    fx = _poly(A, dx, yp)
                    fy = _poly(A, xp, dy)
                    if (fx if fx >= 0 else -fx) <= tol and (fy if fy >= 0 else -fy) <= tol:
                        out.append((X, Y, px, py))
        vals0[:] = vals1
        fx20[:] = fx21
        fy20[:] = fy21
        if progress is not None and Y % 64 == 0:
            progress(Y, N)
    return out
