"""Per-cell verification: archetypes, symbolic patches, SMT export, falsifier.

An archetype is a grid cell's corner information (colour and arrow at the
four corners, plus domain-boundary flags) with the absolute position
abstracted away.  Corner values become ``symbol + integer offset`` where
the symbol stands for the colour's value field at a reference corner and
the offset follows the regime's unit slopes.  Colour symbols of distinct
regimes are ordered with gaps of more than 4 (the true construction has
gaps of at least 10 minus in-cell variation).

For every archetype we can emit an SMT-LIB2 (QF_NRA) script asserting
that an epsilon-stationary point exists; `unsat` proves the cell clean
for every admissible placement.  The built-in falsifier searches the same
condition by dense sampling and is the fast in-repo check.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .bicubic import _ML, _MR, cell_corner_data, patch_coeffs
from .grid import (
    ARROW_NAMES,
    BLACK,
    BLUE,
    COLOR_NAMES,
    GREEN,
    GridModel,
    ORANGE,
    RED,
    arrow_to_grad,
    regime_value,
)
from .rational import format_rational

# colour rank order: red > orange > black > green > blue
_RANK = {RED: 0, ORANGE: 1, BLACK: 2, GREEN: 3, BLUE: 4}
_RANK_COLOR = {v: k for k, v in _RANK.items()}

# symbol reference corner per colour: (dx, dy) whose value the symbol denotes
_REF = {
    GREEN: (1, 1),
    ORANGE: (1, 1),
    BLACK: (0, 0),
    RED: (0, 1),
    BLUE: (0, 1),
}


def corner_offset(color: int, dx: int, dy: int) -> int:
    """Integer offset of the corner value relative to the colour symbol."""
    rx, ry = _REF[color]
    if color in (GREEN, ORANGE):
        sx, sy = -1, -1
    elif color == BLACK:
        sx, sy = 1, 1
    else:  # RED, BLUE: value field x - y + const
        sx, sy = 1, -1
    return sx * (dx - rx) + sy * (dy - ry)


class LinComb(dict):
    """Linear combination of colour symbols plus a rational constant."""

    def __missing__(self, key):
        return Fraction(0)

    def __add__(self, other):
        out = LinComb(self)
        if isinstance(other, LinComb):
            for k, v in other.items():
                out[k] = out[k] + v
        else:
            out[""] = out[""] + Fraction(other)
        return out

    __radd__ = __add__

    def __sub__(self, other):
        return self + (other * -1 if isinstance(other, LinComb) else -Fraction(other))

    def __mul__(self, scalar):
        scalar = Fraction(scalar)
        out = LinComb()
        for k, v in self.items():
            out[k] = v * scalar
        return out

    __rmul__ = __mul__

    def value(self, assignment: dict) -> Fraction:
        total = Fraction(0)
        for k, v in self.items():
            total += v * (Fraction(1) if k == "" else Fraction(assignment[k]))
        return total

    def compact(self) -> "LinComb":
        return LinComb({k: v for k, v in self.items() if v != 0})


def _sym(name: str) -> LinComb:
    return LinComb({name: Fraction(1)})


def _const(q) -> LinComb:
    return LinComb({"": Fraction(q)})


@dataclass(frozen=True)
class Archetype:
    """Cell corner data up to position: ((color, arrow) per corner, sides)."""

    corners: tuple  # ((c,a) at (0,0), (1,0), (0,1), (1,1))
    boundary: tuple = ()  # subset of ("left", "right", "bottom", "top")

    @property
    def canonical_key(self) -> str:
        tags = ("bl", "br", "tl", "tr")
        parts = [
            f"{t}-{COLOR_NAMES[c]}-{ARROW_NAMES[a]}"
            for t, (c, a) in zip(tags, self.corners)
        ]
        if self.boundary:
            parts.append("bnd-" + "-".join(sorted(self.boundary)))
        return "_".join(parts)

    def colors(self) -> list:
        return sorted({c for c, _ in self.corners}, key=_RANK.get)


_CORNER_POS = ((0, 0), (1, 0), (0, 1), (1, 1))


def symbolic_patch(arch: Archetype) -> tuple:
    """(fx, fy) polynomials with LinComb coefficients: {(i,j): LinComb}."""
    data = {}
    for (c, a), (dx, dy) in zip(arch.corners, _CORNER_POS):
        val = _sym(COLOR_NAMES[c]) + corner_offset(c, dx, dy)
        gx, gy = arrow_to_grad(a)
        data[(dx, dy)] = (val, _const(gx), _const(gy))
    coeffs = patch_coeffs(data)
    fx = {}
    fy = {}
    for i in range(4):
        for j in range(4):
            a_ij = coeffs[i][j]
            if not isinstance(a_ij, LinComb):
                a_ij = _const(a_ij)
            if i >= 1:
                fx[(i - 1, j)] = (fx.get((i - 1, j), LinComb()) + a_ij * i).compact()
            if j >= 1:
                fy[(i, j - 1)] = (fy.get((i, j - 1), LinComb()) + a_ij * j).compact()
    return fx, fy


def gap_chain(colors) -> list:
    """Symbols and gap constraints covering the colours present.

    Absent intermediate regimes get fresh symbols so that only the
    single-step ``higher > lower + 4`` constraints from the construction
    are ever asserted.
    """
    ranks = sorted(_RANK[c] for c in colors)
    if not ranks:
        return []
    return [COLOR_NAMES[_RANK_COLOR[r]] for r in range(ranks[0], ranks[-1] + 1)]


# ---------------------------------------------------------------------------
# sampling falsifier

def _poly_eval(poly: dict, assignment: dict, x: Fraction, y: Fraction) -> Fraction:
    xp = [Fraction(1), x, x * x, x**3]
    yp = [Fraction(1), y, y * y, y**3]
    total = Fraction(0)
    for (i, j), lc in poly.items():
        total += lc.value(assignment) * xp[i] * yp[j]
    return total


def _stationary_conditions(arch: Archetype, eps: Fraction):
    """Conditions under which a point of the cell is an eps-KKT point.

    Yields (label, xs, ys, fx_rel, fy_rel) where the rel values encode the
    admissible interval for each partial: 0 means |.| <= eps, -1 means
    >= -eps only (lower side relaxed), +1 means <= eps only.
    """
    yield "interior", None, None, 0, 0
    for side in arch.boundary:
        if side == "left":
            yield "left", Fraction(0), None, -1, 0
        elif side == "right":
            yield "right", Fraction(1), None, 1, 0
        elif side == "bottom":
            yield "bottom", None, Fraction(0), 0, -1
        elif side == "top":
            yield "top", None, Fraction(1), 0, 1


def _within(value: Fraction, rel: int, eps: Fraction) -> bool:
    if rel == 0:
        return abs(value) <= eps
    if rel < 0:
        return value >= -eps
    return value <= eps


def sample_assignment(colors, rng: random.Random) -> dict:
    """Random symbol values satisfying the gap constraints."""
    chain = gap_chain(colors)
    assignment = {}
    level = Fraction(rng.randint(-4096, 4096))
    for name in reversed(chain):  # lowest rank first
        assignment[name] = level
        gap = Fraction(rng.choice((401, 405, 450, 500, 800, 1600, 10000)), 100)
        level = level + gap
    return assignment


def _coeff_matrix(poly: dict, assignment: dict):
    import numpy as np

    mat = np.zeros((4, 4))
    for (i, j), lc in poly.items():
        mat[i, j] = float(lc.value(assignment))
    return mat


def _np_eval(mat, xs, ys):
    import numpy as np

    xp = np.stack([np.ones_like(xs), xs, xs**2, xs**3])
    yp = np.stack([np.ones_like(ys), ys, ys**2, ys**3])
    return np.einsum("ij,i...,j...->...", mat, xp, yp)


def _exact_check(arch, fx, fy, assignment, x, y, eps):
    """Exact verdict at a rational point for every stationarity condition."""
    for label, x_fix, y_fix, rel_x, rel_y in _stationary_conditions(arch, eps):
        px = x_fix if x_fix is not None else x
        py = y_fix if y_fix is not None else y
        vx = _poly_eval(fx, assignment, px, py)
        if not _within(vx, rel_x, eps):
            continue
        vy = _poly_eval(fy, assignment, px, py)
        if _within(vy, rel_y, eps):
            return {
                "condition": label,
                "x": px,
                "y": py,
                "fx": vx,
                "fy": vy,
                "assignment": assignment,
            }
    return None


def falsify_sample(
    arch: Archetype,
    eps,
    grid_density: int = 64,
    color_trials: int = 32,
    seed: int = 0,
) -> Optional[dict]:
    """Search for an eps-KKT point of the cell; None if nothing is found.

    Grid sampling alone would miss stationary regions, whose diameter
    scales like eps over the regime gap, so the most promising grid
    points are refined with a damped Newton iteration on (f_x, f_y)
    before the exact rational verdict.  Deterministic under ``seed``.
    """
    import numpy as np

    eps = Fraction(eps)
    rng = random.Random(seed)
    fx, fy = symbolic_patch(arch)
    gx = np.linspace(0.0, 1.0, grid_density + 1)
    X, Y = np.meshgrid(gx, gx, indexing="ij")
    for _ in range(color_trials):
        assignment = sample_assignment(arch.colors(), rng)
        mx = _coeff_matrix(fx, assignment)
        my = _coeff_matrix(fy, assignment)
        vx = _np_eval(mx, X, Y)
        vy = _np_eval(my, X, Y)
        score = np.maximum(np.abs(vx), np.abs(vy))
        flat = np.argsort(score, axis=None)[:6]
        seeds = [(X.flat[k], Y.flat[k]) for k in flat]
        # derivative coefficient matrices for the Newton steps
        dxx = np.zeros((4, 4))
        dxy = np.zeros((4, 4))
        dyy = np.zeros((4, 4))
        for i in range(4):
            for j in range(4):
                if i < 3:
                    dxx[i, j] += (i + 1) * mx[i + 1, j]
                if j < 3:
                    dxy[i, j] += (j + 1) * mx[i, j + 1]
                    dyy[i, j] += (j + 1) * my[i, j + 1]
        for x0, y0 in seeds:
            px, py = float(x0), float(y0)
            for _step in range(40):
                fxv = float(_np_eval(mx, np.float64(px), np.float64(py)))
                fyv = float(_np_eval(my, np.float64(px), np.float64(py)))
                a11 = float(_np_eval(dxx, np.float64(px), np.float64(py)))
                a12 = float(_np_eval(dxy, np.float64(px), np.float64(py)))
                a22 = float(_np_eval(dyy, np.float64(px), np.float64(py)))
                det = a11 * a22 - a12 * a12
                if abs(det) > 1e-12:
                    sx = (a22 * fxv - a12 * fyv) / det
                    sy = (a11 * fyv - a12 * fxv) / det
                else:  # fall back to a descent step on fx^2 + fy^2
                    sx = 0.05 * (fxv * a11 + fyv * a12)
                    sy = 0.05 * (fxv * a12 + fyv * a22)
                nx = min(1.0, max(0.0, px - sx))
                ny = min(1.0, max(0.0, py - sy))
                if abs(nx - px) < 1e-15 and abs(ny - py) < 1e-15:
                    break
                px, py = nx, ny
            hit = _exact_check(
                arch, fx, fy, assignment, Fraction(px), Fraction(py), eps
            )
            if hit is not None:
                return hit
        # also refine along flagged boundary edges: drive the constrained
        # partial (f_y on vertical edges, f_x on horizontal ones) to zero
        # in the free variable with 1-d Newton
        for label, x_fix, y_fix, _rel_x, _rel_y in _stationary_conditions(arch, eps):
            if label == "interior":
                continue
            vertical = x_fix is not None
            mat = my if vertical else mx
            dmat = dyy if vertical else dxx
            fixed = float(x_fix if vertical else y_fix)
            for t0 in np.linspace(0.0, 1.0, 9):
                t = float(t0)
                for _step in range(40):
                    p = (fixed, t) if vertical else (t, fixed)
                    val = float(_np_eval(mat, np.float64(p[0]), np.float64(p[1])))
                    der = float(_np_eval(dmat, np.float64(p[0]), np.float64(p[1])))
                    if abs(der) < 1e-12:
                        break
                    t2 = min(1.0, max(0.0, t - val / der))
                    if abs(t2 - t) < 1e-15:
                        t = t2
                        break
                    t = t2
                if vertical:
                    hit = _exact_check(
                        arch, fx, fy, assignment, Fraction(fixed), Fraction(t), eps
                    )
                else:
                    hit = _exact_check(
                        arch, fx, fy, assignment, Fraction(t), Fraction(fixed), eps
                    )
                if hit is not None:
                    return hit
    return None


# ---------------------------------------------------------------------------
# SMT-LIB2 export

def _smt_rat(q: Fraction) -> str:
    q = Fraction(q)
    if q < 0:
        return f"(- {_smt_rat(-q)})"
    if q.denominator == 1:
        return f"{q.numerator}.0"
    return f"(/ {q.numerator}.0 {q.denominator}.0)"


def _smt_poly(poly: dict) -> str:
    terms = []
    for (i, j), lc in sorted(poly.items()):
        for name, coef in sorted(lc.items()):
            if coef == 0:
                continue
            factors = [_smt_rat(coef)]
            if name:
                factors.append(name)
            factors.extend(["x"] * i)
            factors.extend(["y"] * j)
            terms.append(f"(* {' '.join(factors)})" if len(factors) > 1 else factors[0])
    if not terms:
        return "0.0"
    if len(terms) == 1:
        return terms[0]
    return f"(+ {' '.join(terms)})"


def smt_formula(arch: Archetype, eps, condition: str = "interior") -> str:
    """SMT-LIB2 script asserting an eps-KKT point exists; expect unsat."""
    eps = Fraction(eps)
    fx, fy = symbolic_patch(arch)
    chain = gap_chain(arch.colors())
    lines = [
        "(set-logic QF_NRA)",
        f"; archetype {arch.canonical_key}",
        f"; condition {condition}: expected unsat unless a solution region",
    ]
    for name in chain:
        lines.append(f"(declare-const {name} Real)")
    lines.append("(declare-const x Real)")
    lines.append("(declare-const y Real)")
    for hi, lo in zip(chain, chain[1:]):
        lines.append(f"(assert (> {hi} (+ {lo} 4.0)))")
    e = _smt_rat(eps)
    if condition == "interior":
        lines.append("(assert (and (<= 0.0 x) (<= x 1.0)))")
        lines.append("(assert (and (<= 0.0 y) (<= y 1.0)))")
        bounds = {"x": 0, "y": 0}
    elif condition in ("left", "right"):
        lines.append(f"(assert (= x {'0.0' if condition == 'left' else '1.0'}))")
        lines.append("(assert (and (<= 0.0 y) (<= y 1.0)))")
        bounds = {"x": -1 if condition == "left" else 1, "y": 0}
    elif condition in ("bottom", "top"):
        lines.append(f"(assert (= y {'0.0' if condition == 'bottom' else '1.0'}))")
        lines.append("(assert (and (<= 0.0 x) (<= x 1.0)))")
        bounds = {"x": 0, "y": -1 if condition == "bottom" else 1}
    else:
        raise ValueError(f"unknown condition {condition!r}")
    lines.append(f"(define-fun fx () Real {_smt_poly(fx)})")
    lines.append(f"(define-fun fy () Real {_smt_poly(fy)})")
    for var, rel in bounds.items():
        f = "fx" if var == "x" else "fy"
        if rel == 0:
            lines.append(f"(assert (and (<= (- {e}) {f}) (<= {f} {e})))")
        elif rel < 0:
            lines.append(f"(assert (<= (- {e}) {f}))")
        else:
            lines.append(f"(assert (<= {f} {e}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def emit_smtlib(arch: Archetype, eps, out_dir: str) -> list:
    """Write the interior script plus one per boundary side; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    conditions = ["interior"] + list(arch.boundary)
    for cond in conditions:
        name = arch.canonical_key + ("" if cond == "interior" else f"_{cond}")
        path = os.path.join(out_dir, f"{name}.smt2")
        with open(path, "w") as fh:
            fh.write(smt_formula(arch, eps, cond))
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# enumeration over a grid model

@dataclass
class ArchetypeRecord:
    archetype: Archetype
    count: int = 0
    example: tuple = ()
    solution_region_only: bool = True

    def to_json(self) -> dict:
        return {
            "key": self.archetype.canonical_key,
            "count": self.count,
            "example_cell": list(self.example),
            "boundary": list(self.archetype.boundary),
            "expected": "sat-allowed" if self.solution_region_only else "unsat",
        }


def cell_archetype(model: GridModel, X: int, Y: int) -> Archetype:
    N = model.gs.N
    corners = tuple(
        model.point_data(X + dx, Y + dy) for dx, dy in _CORNER_POS
    )
    sides = []
    if X == 0:
        sides.append("left")
    if X == N - 1:
        sides.append("right")
    if Y == 0:
        sides.append("bottom")
    if Y == N - 1:
        sides.append("top")
    return Archetype(corners, tuple(sides))


def in_solution_region(model: GridModel, X: int, Y: int) -> bool:
    """Cells allowed to contain eps-KKT points.

    Big squares B(v, v) where v is a nontrivial source or sink, and medium
    squares M(u, u) of a labyrinth where u solves the Iter instance.
    """
    from .grid import decode_cell

    kind, _ = decode_cell(model, X, Y)
    return kind != "none"


def enumerate_archetypes(model: GridModel, progress=None) -> dict:
    """Scan every cell; returns {canonical_key: ArchetypeRecord}."""
    N = model.gs.N
    records: dict = {}
    prev_row = [model.point_data(x, 0) for x in range(N + 1)]
    for Y in range(N):
        cur_row = [model.point_data(x, Y + 1) for x in range(N + 1)]
        for X in range(N):
            corners = (prev_row[X], prev_row[X + 1], cur_row[X], cur_row[X + 1])
            sides = []
            if X == 0:
                sides.append("left")
            if X == N - 1:
                sides.append("right")
            if Y == 0:
                sides.append("bottom")
            if Y == N - 1:
                sides.append("top")
            arch = Archetype(corners, tuple(sides))
            key = arch.canonical_key
            rec = records.get(key)
            if rec is None:
                rec = ArchetypeRecord(arch, 0, (X, Y))
                records[key] = rec
            rec.count += 1
            if rec.solution_region_only and not in_solution_region(model, X, Y):
                rec.solution_region_only = False
        prev_row = cur_row
        if progress and Y % 128 == 0:
            progress(Y, N)
    return records


def write_manifest(records: dict, out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "manifest.json")
    data = {
        "interior_archetypes": sum(1 for r in records.values() if not r.archetype.boundary),
        "boundary_archetypes": sum(1 for r in records.values() if r.archetype.boundary),
        "archetypes": [r.to_json() for r in sorted(records.values(), key=lambda r: r.archetype.canonical_key)],
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
    return path


def read_solver_results(results_dir: str) -> dict:
    """Parse sat/unsat verdicts from files named <key>.result."""
    verdicts = {}
    if not os.path.isdir(results_dir):
        return verdicts
    for name in os.listdir(results_dir):
        if name.endswith(".result"):
            with open(os.path.join(results_dir, name)) as fh:
                verdicts[name[: -len(".result")]] = fh.read().strip()
    return verdicts


def corner_check(model: GridModel, eps) -> bool:
    """The four domain corners are not eps-KKT points (arrow length 1/2 > eps)."""
    eps = Fraction(eps)
    N = model.gs.N
    for x, y in ((0, 0), (N, 0), (0, N), (N, N)):
        _, arrow = model.point_data(x, y)
        gx, gy = arrow_to_grad(arrow)
        ok_x = (x != 0 and gx > eps) or (x != N and -gx > eps)
        ok_y = (y != 0 and gy > eps) or (y != N and -gy > eps)
        if not (ok_x or ok_y):
            return False
    return True
