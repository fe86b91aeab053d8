"""The exponential grid model: colours and steepest-descent arrows.

The domain [0, N]^2 with N = 2^(n+m+4) is divided into 2^n x 2^n big
squares of side 2^(m+4) grid cells.  Every grid point carries a colour
(value regime) and an axis-aligned arrow (direction of -grad f).  The
layouts below realise the End-of-Line embedding (green/orange paths), the
special origin square, the crossing gadgets, and the PLS-Labyrinth that
embeds the Iter instance where a green and an orange path meet.

The published construction fixes these layouts only through small-scale
figures; the tables here are a re-derivation from the prose constraints,
and they are validated empirically by the archetype falsifier and the
dense per-square scans rather than taken on trust.

Orientation conventions that the whole file relies on:
  * paths are three grid points wide (two small squares);
  * horizontal legs of green paths occupy rows {c-1, c} (green, arrows
    Right) of the big square, vertical legs occupy columns {c, c+1}
    (green, arrows Up) plus a black guard column c-1 with arrows Down;
  * the orange gadgets are the 180-degree point reflection of the green
    ones with green<->orange (and blue<->red) colour swap and unchanged
    arrows, which is an exact symmetry of the interpolated function;
  * inside a labyrinth, channels are (orange | blue | blue) columns with
    arrows Up and blue paths are three blue rows with arrows Left.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .tfnp import EolInstance, IterInstance, OutOfRange

RED, ORANGE, BLACK, GREEN, BLUE = range(5)
LEFT, RIGHT, UP, DOWN = range(4)

COLOR_NAMES = ("red", "orange", "black", "green", "blue")
ARROW_NAMES = ("left", "right", "up", "down")

_SWAP = {RED: BLUE, BLUE: RED, GREEN: ORANGE, ORANGE: GREEN, BLACK: BLACK}

BIG_TYPES = (
    "S", "E1", "E2",
    "G1", "G2", "G3", "G4", "G5", "G6", "G7",
    "O1", "O2", "O3", "O4", "O5", "O6", "O7",
    "LA", "LB",
)

MEDIUM_TYPES = tuple(f"LA{k}" for k in range(1, 8)) + tuple(
    f"LB{k}" for k in range(1, 8)
)


@dataclass(frozen=True)
class GridSpec:
    n: int
    m: int

    @property
    def N(self) -> int:
        return 1 << (self.n + self.m + 4)

    @property
    def big_side(self) -> int:
        return 1 << (self.m + 4)

    @property
    def labyrinth_side(self) -> int:
        return 1 << (self.m + 2)


def regime_value(color: int, x: int, y: int, N: int) -> Fraction:
    """Value of f at a grid point in the given regime."""
    if color == RED:
        return Fraction(x - y + 4 * N + 20)
    if color == ORANGE:
        return Fraction(-x - y + 4 * N + 10)
    if color == BLACK:
        return Fraction(x + y)
    if color == GREEN:
        return Fraction(-x - y - 10)
    if color == BLUE:
        return Fraction(x - y - 2 * N - 20)
    raise ValueError(f"unknown colour {color}")


def arrow_to_grad(arrow: int) -> tuple:
    """Corner derivative data (f_x, f_y) = -delta * arrow, delta = 1/2."""
    h = Fraction(1, 2)
    if arrow == LEFT:
        return (h, Fraction(0))
    if arrow == RIGHT:
        return (-h, Fraction(0))
    if arrow == UP:
        return (Fraction(0), -h)
    if arrow == DOWN:
        return (Fraction(0), h)
    raise ValueError(f"unknown arrow {arrow}")


# ---------------------------------------------------------------------------
# big-square classification

def big_square_type(gs: GridSpec, eol: EolInstance, v1: int, v2: int) -> str:
    """Type of the big square B(v1, v2); assumes a preprocessed instance."""
    top = 1 << gs.n
    if not (1 <= v1 <= top and 1 <= v2 <= top):
        raise OutOfRange("big square index out of range")
    if v1 == 1 and v2 == 1:
        return "S"
    if v1 == 1:
        return "E2"
    if v1 == v2:
        v = v1
        s = eol.eval_s(v)
        p = eol.eval_p(v)
        out = s != v
        inc = p != v
        if not out and not inc:
            return "E1"
        if out and not inc:
            return "G5" if s > v else "O5"
        if inc and not out:
            return "G6" if p < v else "O6"
        if p < v and s > v:
            return "G4"
        if p > v and s < v:
            return "O4"
        return "LA" if (p < v and s < v) else "LB"
    s2 = eol.eval_s(v2)  # horizontal leg through row v2, if any
    p1 = eol.eval_p(v1)  # vertical leg through column v1, if any
    gh = s2 > v2 and v2 < v1 <= s2
    gv = p1 != v1 and p1 < v1 and p1 <= v2 < v1
    oh = s2 != v2 and s2 < v2 and s2 <= v1 < v2
    ov = p1 > v1 and v1 < v2 <= p1
    if gh and gv:
        return "G3" if (v2 == p1 and v1 == s2) else "G7"
    if oh and ov:
        return "O3" if (v2 == p1 and v1 == s2) else "O7"
    if gh:
        return "G1"
    if gv:
        return "G2"
    if oh:
        return "O1"
    if ov:
        return "O2"
    return "E1"


# ---------------------------------------------------------------------------
# medium-square classification inside a labyrinth

def medium_square_type(it: IterInstance, case: str, a: int, b: int) -> str:
    """Type of medium square M(a, b): a-th from the gadget's path corner,
    b-th from its base.  ``case`` selects the LA/LB name; the geometry of
    case B is the point reflection handled by the layout engine."""
    if case not in ("A", "B"):
        raise ValueError("case must be 'A' or 'B'")
    top = 1 << it.m
    if not (1 <= a <= top and 1 <= b <= top):
        raise OutOfRange("medium square index out of range")
    kind = _medium_kind(it, a, b)
    return ("LA" if case == "A" else "LB") + str(kind)


def _medium_kind(it: IterInstance, a: int, b: int) -> int:
    ca = it.eval_c(a)
    active_a = ca > a
    if b > a:
        return 7
    if a == b:
        if not active_a:
            return 7
        return 4 if it.eval_c(ca) > ca else 2
    # b < a: the channel of a and/or the blue path of row b may be here
    cb = it.eval_c(b)
    path = cb > b and it.eval_c(cb) > cb and a <= cb
    if active_a:
        if path and (a - 1 == b or it.eval_c(a - 1) <= a - 1):
            return 5  # first channel the blue path meets: merge
        return 1
    if path:
        if a - 1 > b and it.eval_c(a - 1) > a - 1:
            return 6  # just crossed a channel run: restart
        return 3
    return 7


def _medium_layout(kind: int, lx: int, ly: int) -> tuple:
    """Colour/arrow inside a medium square, local coords in [0,4]^2."""
    if kind == 1:  # channel traversal
        if lx == 1:
            return ORANGE, UP
        if lx in (2, 3):
            return BLUE, UP
    elif kind == 2:  # channel stops: Iter solution lives here
        if ly <= 2:
            if lx == 1:
                return ORANGE, UP
            if lx in (2, 3):
                return BLUE, UP
    elif kind == 3:  # blue path traversal
        if 1 <= ly <= 3:
            return BLUE, LEFT
    elif kind == 4:  # channel turns into a leftward blue path
        if ly == 0:
            if lx == 1:
                return ORANGE, UP
            if lx in (2, 3):
                return BLUE, UP
        elif ly <= 3 and lx <= 3:
            return BLUE, LEFT
    elif kind == 5:  # blue path merges into the channel
        if lx == 1:
            return ORANGE, UP
        if lx in (2, 3):
            return BLUE, UP
        if lx == 4 and 1 <= ly <= 3:
            return BLUE, LEFT
    elif kind == 6:  # blue path restarts left of a channel run
        if 1 <= ly <= 3 and lx <= 3:
            return BLUE, LEFT
    return BLACK, LEFT


# ---------------------------------------------------------------------------
# per-gadget layouts (local big-square coordinates (i, j) in [0, S]^2)

def _lay_E1(i, j, c, S):
    return BLACK, LEFT


def _lay_E2(i, j, c, S):
    if i == 0:
        return BLACK, DOWN
    return BLACK, LEFT


def _lay_S(i, j, c, S):
    # exit leg along the centre rows, fed by a green column rising from
    # the origin; the left boundary above the leg drains downward.
    if j in (c - 1, c):
        return GREEN, RIGHT
    if i in (0, 1) and j <= c - 2:
        return GREEN, UP
    if i == 0:
        return BLACK, DOWN
    return BLACK, LEFT


def _lay_G1(i, j, c, S):
    if j in (c - 1, c):
        return GREEN, RIGHT
    return BLACK, LEFT


def _lay_G2(i, j, c, S):
    if i in (c, c + 1):
        return GREEN, UP
    if i == c - 1:
        return BLACK, DOWN
    return BLACK, LEFT


def _lay_G3(i, j, c, S):
    # in from the left, turn, out at the top
    if i in (c, c + 1):
        if j >= c + 1:
            return GREEN, UP
        if j in (c - 1, c):
            return GREEN, (RIGHT if i == c else UP)
    if j in (c - 1, c) and i <= c - 1:
        return GREEN, RIGHT
    if i == c - 1 and j >= c + 1:
        return BLACK, DOWN
    return BLACK, LEFT


def _lay_G4(i, j, c, S):
    # in from the bottom, turn, out on the right
    if i in (c, c + 1) and j <= c - 2:
        return GREEN, UP
    if j in (c - 1, c) and i >= c:
        return GREEN, RIGHT
    if i == c - 1 and j <= c:
        return BLACK, DOWN
    return BLACK, LEFT


def _lay_G5(i, j, c, S):
    # source: path starts at the centre, KKT point expected at the cap
    if j in (c - 1, c) and i >= c - 1:
        return GREEN, RIGHT
    return BLACK, LEFT


def _lay_G6(i, j, c, S):
    # sink: path enters from below and stops; KKT point expected at the cap
    if i in (c, c + 1) and j <= c:
        return GREEN, UP
    if i == c - 1 and j <= c:
        return BLACK, DOWN
    return BLACK, LEFT


def _lay_G7(i, j, c, S):
    # two crossing green paths, locally re-routed so that bottom connects
    # to right and left connects to top.
    if i in (c, c + 1) and j >= c + 4:
        return GREEN, UP  # re-routed exit of the left path
    if i == c - 1 and j >= c + 4:
        return BLACK, DOWN
    if j in (c + 2, c + 3):
        if i in (c, c + 1):
            return GREEN, (RIGHT if i == c else UP)  # elbow up to the exit
        if c - 4 <= i <= c - 1:
            return GREEN, RIGHT  # detour leg passing over the other path
        if i == c - 5:
            return BLACK, DOWN
        return BLACK, LEFT
    if j == c + 1:
        if i in (c - 4, c - 3):
            return GREEN, UP  # detour riser
        if i == c - 5:
            return BLACK, DOWN
        return BLACK, LEFT
    if j == c + 4 and i == c - 5:
        return BLACK, DOWN
    if j in (c - 1, c):
        if i <= c - 5:
            return GREEN, RIGHT  # left path entering
        if i in (c - 4, c - 3):
            return GREEN, (RIGHT if i == c - 4 else UP)  # detour elbow
        if i == c - 2:
            return BLACK, LEFT  # gap between the re-routed paths
        if i == c - 1:
            return BLACK, DOWN
        return GREEN, RIGHT  # bottom path turning right and leaving
    if i in (c, c + 1) and j <= c - 2:
        return GREEN, UP  # bottom path entering
    if i == c - 1 and j <= c - 2:
        return BLACK, DOWN
    return BLACK, LEFT


def _lay_LA(i, j, c, S, m: int, kind_of):
    lab = 4 * (1 << m)  # labyrinth side in grid cells
    # labyrinth block (its bottom-right corner sits above the intersection)
    if j >= c + 2 and c + 2 - lab <= i <= c + 2 and j <= c + 2 + lab:
        rel = c + 2 - i
        a = max(1, (rel + 3) // 4)
        lx = 4 * a - rel
        roff = j - (c + 2)
        b = max(1, (roff + 3) // 4)
        ly = roff + 4 - 4 * b
        return _medium_layout(kind_of(a, b), lx, ly)
    if j == c + 1:
        if i <= c - 2:
            return ORANGE, RIGHT  # upper row of the outgoing orange path
        if i == c - 1:
            return ORANGE, UP  # the ridge turns up into the labyrinth
        if i in (c, c + 1):
            return BLUE, UP  # start of the first channel's blue valley
        return BLACK, LEFT
    if j == c:
        if i <= c - 1:
            return ORANGE, RIGHT  # lower row of the outgoing orange path
        if i == c:
            return GREEN, RIGHT
        if i == c + 1:
            return GREEN, UP
        return BLACK, LEFT
    if j == c - 1:
        if i == c - 1:
            return BLACK, DOWN
        if i == c:
            return GREEN, RIGHT
        if i == c + 1:
            return GREEN, UP
        return BLACK, LEFT
    if i in (c, c + 1) and j <= c - 2:
        return GREEN, UP  # incoming green path from below
    if i == c - 1 and j <= c - 2:
        return BLACK, DOWN
    return BLACK, LEFT


_G_LAYOUTS = {
    "S": _lay_S,
    "E1": _lay_E1,
    "E2": _lay_E2,
    "G1": _lay_G1,
    "G2": _lay_G2,
    "G3": _lay_G3,
    "G4": _lay_G4,
    "G5": _lay_G5,
    "G6": _lay_G6,
    "G7": _lay_G7,
}


def layout_point_kinds(gs: GridSpec, m: int, kind_of, btype: str, i: int, j: int):
    """Colour/arrow at local coordinates (i, j) of a big square of ``btype``.

    Orange gadgets and case-B labyrinths are the point reflection of their
    green/case-A counterparts with colours swapped and arrows kept.
    ``kind_of(a, b)`` supplies the medium-square kind inside labyrinths.
    """
    S = gs.big_side
    c = S // 2
    if btype in _G_LAYOUTS:
        return _G_LAYOUTS[btype](i, j, c, S)
    if btype == "LA":
        return _lay_LA(i, j, c, S, m, kind_of)
    if btype.startswith("O"):
        color, arrow = _G_LAYOUTS["G" + btype[1:]](S - i, S - j, c, S)
        return _SWAP[color], arrow
    if btype == "LB":
        color, arrow = _lay_LA(S - i, S - j, c, S, m, kind_of)
        return _SWAP[color], arrow
    raise ValueError(f"unknown big-square type {btype!r}")


def layout_point(gs: GridSpec, it: IterInstance, btype: str, i: int, j: int):
    return layout_point_kinds(
        gs, it.m, lambda a, b: _medium_kind(it, a, b), btype, i, j
    )


@dataclass
class GridModel:
    """Callable point-data model for one compiled pair of instances."""

    gs: GridSpec
    eol: EolInstance
    it: IterInstance

    def __post_init__(self):
        if self.eol.n != self.gs.n or self.it.m != self.gs.m:
            raise ValueError("grid spec does not match the instances")
        self._type_cache: dict = {}
        self._kind_cache: dict = {}

    def big_square_of(self, x: int, y: int) -> tuple:
        S = self.gs.big_side
        top = 1 << self.gs.n
        v1 = min(x // S, top - 1) + 1
        v2 = min(y // S, top - 1) + 1
        return v1, v2

    def type_of(self, v1: int, v2: int) -> str:
        key = (v1, v2)
        t = self._type_cache.get(key)
        if t is None:
            t = big_square_type(self.gs, self.eol, v1, v2)
            self._type_cache[key] = t
        return t

    def kind_of(self, a: int, b: int) -> int:
        key = (a, b)
        k = self._kind_cache.get(key)
        if k is None:
            k = _medium_kind(self.it, a, b)
            self._kind_cache[key] = k
        return k

    def point_data(self, x: int, y: int) -> tuple:
        """(colour, arrow) at grid point (x, y)."""
        N = self.gs.N
        if not (0 <= x <= N and 0 <= y <= N):
            raise OutOfRange(f"grid point ({x},{y}) outside [0,{N}]^2")
        S = self.gs.big_side
        v1, v2 = self.big_square_of(x, y)
        i = x - (v1 - 1) * S
        j = y - (v2 - 1) * S
        return layout_point_kinds(
            self.gs, self.gs.m, self.kind_of, self.type_of(v1, v2), i, j
        )

    def value(self, x: int, y: int) -> Fraction:
        color, _ = self.point_data(x, y)
        return regime_value(color, x, y, self.gs.N)


def point_data(gs: GridSpec, eol: EolInstance, it: IterInstance, x: int, y: int):
    return GridModel(gs, eol, it).point_data(x, y)


def _labyrinth_medium_of_cell(gs: GridSpec, i: int, j: int):
    """Medium square (a, b) of a cell in case-A local big-square coords."""
    lab = 4 * (1 << gs.m)
    c = gs.big_side // 2
    if not (c + 2 - lab <= i <= c + 1 and c + 2 <= j <= c + 1 + lab):
        return None
    rel = c + 2 - i
    a = (rel + 3) // 4
    b = (j - (c + 2)) // 4 + 1
    return a, b


def decode_cell(model: GridModel, X: int, Y: int) -> tuple:
    """Solution region containing the cell, if any.

    Returns ("eol", v) inside a big square B(v,v) whose vertex is a
    nontrivial source or sink, ("iter", u) inside a labyrinth medium
    square M(u,u) whose node solves the Iter instance, else ("none", 0).
    """
    from .tfnp import check_eol, check_iter

    S = model.gs.big_side
    v1 = X // S + 1
    v2 = Y // S + 1
    if v1 != v2:
        return ("none", 0)
    t = model.type_of(v1, v2)
    if t in ("G5", "G6", "O5", "O6"):
        if check_eol(model.eol, v1):
            return ("eol", v1)
        return ("none", 0)
    if t in ("LA", "LB"):
        i = X - (v1 - 1) * S
        j = Y - (v2 - 1) * S
        if t == "LB":
            i, j = S - 1 - i, S - 1 - j
        med = _labyrinth_medium_of_cell(model.gs, i, j)
        if med is not None:
            a, b = med
            if a == b and check_iter(model.it, a):
                return ("iter", a)
    return ("none", 0)
