from fractions import Fraction

import pytest

from gdkkt.grid import (
    BLACK,
    BLUE,
    DOWN,
    GREEN,
    GridModel,
    GridSpec,
    LEFT,
    ORANGE,
    RED,
    RIGHT,
    UP,
    arrow_to_grad,
    big_square_type,
    decode_cell,
    medium_square_type,
    regime_value,
)
from gdkkt.tfnp import (
    OutOfRange,
    eol_from_edges,
    iter_from_map,
    preprocess_eol,
    preprocess_iter,
)


def test_grid_spec():
    gs = GridSpec(3, 3)
    assert gs.N == 1024
    assert gs.big_side == 128
    assert gs.labyrinth_side == 32


def test_regime_values():
    assert regime_value(BLACK, 3, 5, 1024) == 8
    assert regime_value(GREEN, 0, 0, 1024) == -10
    assert regime_value(RED, 0, 0, 1024) == 4116
    assert regime_value(ORANGE, 1, 1, 8) == 40
    assert regime_value(BLUE, 2, 1, 8) == -35


def test_regime_order_and_gaps():
    N = 1024
    for x, y in [(0, 0), (N, 0), (0, N), (N, N), (517, 311)]:
        vals = [regime_value(c, x, y, N) for c in (RED, ORANGE, BLACK, GREEN, BLUE)]
        for hi, lo in zip(vals, vals[1:]):
            assert hi - lo >= 10


def test_arrow_to_grad():
    h = Fraction(1, 2)
    assert arrow_to_grad(LEFT) == (h, 0)
    assert arrow_to_grad(RIGHT) == (-h, 0)
    assert arrow_to_grad(UP) == (0, -h)
    assert arrow_to_grad(DOWN) == (0, h)


def test_big_square_types_desk(desk_model):
    diag = [desk_model.type_of(v, v) for v in range(1, 9)]
    assert diag == ["S", "LB", "O6", "G4", "E1", "LA", "O5", "G6"]
    assert desk_model.type_of(4, 2) == "G7"
    assert desk_model.type_of(3, 6) == "O7"
    assert desk_model.type_of(1, 5) == "E2"
    assert desk_model.type_of(3, 1) == "G1"
    assert desk_model.type_of(4, 1) == "G3"
    assert desk_model.type_of(4, 3) == "G2"
    assert desk_model.type_of(5, 6) == "O1"
    assert desk_model.type_of(2, 6) == "O3"
    assert desk_model.type_of(2, 4) == "O2"


def test_big_square_type_bounds(desk_model, desk_eol):
    with pytest.raises(OutOfRange):
        big_square_type(desk_model.gs, desk_eol, 0, 1)


def test_more_diagonal_types():
    eol = preprocess_eol(eol_from_edges(3, [(1, 2), (3, 4)]))
    gs = GridSpec(3, 3)
    assert big_square_type(gs, eol, 3, 3) == "G5"
    assert big_square_type(gs, eol, 4, 4) == "G6"
    eol2 = preprocess_eol(eol_from_edges(3, [(1, 8), (8, 6), (6, 2)]))
    assert big_square_type(gs, eol2, 8, 8) == "LA"
    assert big_square_type(gs, eol2, 6, 6) == "O4"


def test_medium_square_types(desk_iter):
    # C: 1->3, 3->6, 4->5, 5->7, 7->8 with 2, 6, 8 fixed
    assert medium_square_type(desk_iter, "A", 1, 1) == "LA4"
    assert medium_square_type(desk_iter, "A", 3, 3) == "LA2"
    assert medium_square_type(desk_iter, "A", 7, 7) == "LA2"
    assert medium_square_type(desk_iter, "A", 2, 2) == "LA7"
    assert medium_square_type(desk_iter, "A", 3, 1) == "LA5"  # path of 1 merges
    assert medium_square_type(desk_iter, "A", 2, 1) == "LA3"  # path of 1 crosses
    assert medium_square_type(desk_iter, "A", 5, 4) == "LA5"
    assert medium_square_type(desk_iter, "A", 5, 2) == "LA1"
    assert medium_square_type(desk_iter, "B", 1, 1) == "LB4"
    assert medium_square_type(desk_iter, "A", 1, 5) == "LA7"


def test_medium_restart():
    # C(1) = 7 with the active run {3, 4, 5} in between forces a restart
    it = preprocess_iter(iter_from_map(3, {1: 7, 3: 4, 4: 5, 5: 7, 7: 8}))
    assert medium_square_type(it, "A", 2, 1) == "LA3"
    assert medium_square_type(it, "A", 3, 1) == "LA5"
    assert medium_square_type(it, "A", 4, 1) == "LA1"  # absorbed inside the run
    assert medium_square_type(it, "A", 5, 1) == "LA1"
    assert medium_square_type(it, "A", 6, 1) == "LA6"  # restart past the run
    assert medium_square_type(it, "A", 7, 1) == "LA5"  # final merge


def test_environment_and_boundary_layout(desk_model):
    # plain environment: black with leftward descent
    assert desk_model.point_data(600, 100) == (BLACK, LEFT)
    # left domain boundary drains downward in E2 squares
    assert desk_model.point_data(0, 600) == (BLACK, DOWN)
    # origin square: the green leg starts at the origin
    assert desk_model.point_data(0, 0) == (GREEN, UP)
    assert desk_model.point_data(0, 63) == (GREEN, RIGHT)
    assert desk_model.point_data(0, 65) == (BLACK, DOWN)


def test_path_layouts(desk_model):
    S = 128
    c = 64
    # G1 squares on row 1 carry the (1,4) edge: rows c-1, c green
    x0 = (3 - 1) * S  # B(3,1)
    assert desk_model.point_data(x0 + 10, c - 1) == (GREEN, RIGHT)
    assert desk_model.point_data(x0 + 10, c) == (GREEN, RIGHT)
    assert desk_model.point_data(x0 + 10, c + 1) == (BLACK, LEFT)
    # G2 square B(4,3): columns c, c+1 green going up, guard column down
    bx, by = (4 - 1) * S, (3 - 1) * S
    assert desk_model.point_data(bx + c, by + 10) == (GREEN, UP)
    assert desk_model.point_data(bx + c + 1, by + 10) == (GREEN, UP)
    assert desk_model.point_data(bx + c - 1, by + 10) == (BLACK, DOWN)
    # O1 square B(5,6): orange rows at c, c+1 with rightward descent
    bx, by = (5 - 1) * S, (6 - 1) * S
    assert desk_model.point_data(bx + 10, by + c) == (ORANGE, RIGHT)
    assert desk_model.point_data(bx + 10, by + c + 1) == (ORANGE, RIGHT)
    # O2 square B(2,4): orange columns c-1, c descending upward
    bx, by = (2 - 1) * S, (4 - 1) * S
    assert desk_model.point_data(bx + c - 1, by + 10) == (ORANGE, UP)
    assert desk_model.point_data(bx + c, by + 10) == (ORANGE, UP)
    assert desk_model.point_data(bx + c + 1, by + 10) == (BLACK, DOWN)


def test_intersection_square_matches_published_example(desk_model):
    """The LA square's junction cell: black/orange left, green right."""
    S, c = 128, 64
    bx = by = (6 - 1) * S  # B(6,6) is the LA square
    assert desk_model.point_data(bx + c - 1, by + c - 1) == (BLACK, DOWN)
    assert desk_model.point_data(bx + c - 1, by + c) == (ORANGE, RIGHT)
    assert desk_model.point_data(bx + c, by + c - 1) == (GREEN, RIGHT)
    assert desk_model.point_data(bx + c, by + c) == (GREEN, RIGHT)
    # blue valley above the green head feeds the labyrinth
    assert desk_model.point_data(bx + c, by + c + 1) == (BLUE, UP)
    assert desk_model.point_data(bx + c + 1, by + c + 1) == (BLUE, UP)
    assert desk_model.point_data(bx + c - 1, by + c + 1) == (ORANGE, UP)


def test_labyrinth_channels(desk_model):
    S, c = 128, 64
    bx = by = (6 - 1) * S
    # channel of u=3 sits at columns c+2-4*3+{1,2,3} rows >= c+2
    base = bx + c + 2 - 12
    assert desk_model.point_data(base + 1, by + c + 4) == (ORANGE, UP)
    assert desk_model.point_data(base + 2, by + c + 4) == (BLUE, UP)
    assert desk_model.point_data(base + 3, by + c + 4) == (BLUE, UP)
    # LB labyrinth in B(2,2): reflected colours (red instead of blue)
    bx2 = by2 = (2 - 1) * S
    rbase_x = bx2 + S - (c + 2 - 12) - 1
    found_red = any(
        desk_model.point_data(rbase_x - d, by2 + S - (c + 4))[0] == RED
        for d in range(4)
    )
    assert found_red


def test_seam_consistency_between_big_squares(desk_model):
    """The layout at a shared big-square edge is identical from both sides."""
    from gdkkt.grid import layout_point_kinds

    gs = desk_model.gs
    S = gs.big_side
    kind_of = desk_model.kind_of
    top = 1 << gs.n
    for v1 in range(1, top):
        for v2 in range(1, top + 1):
            left = desk_model.type_of(v1, v2)
            right = desk_model.type_of(v1 + 1, v2)
            for j in range(0, S + 1, 3):
                a = layout_point_kinds(gs, gs.m, kind_of, left, S, j)
                b = layout_point_kinds(gs, gs.m, kind_of, right, 0, j)
                assert a == b, (left, right, j)
    for v1 in range(1, top + 1):
        for v2 in range(1, top):
            below = desk_model.type_of(v1, v2)
            above = desk_model.type_of(v1, v2 + 1)
            for i in range(0, S + 1, 3):
                a = layout_point_kinds(gs, gs.m, kind_of, below, i, S)
                b = layout_point_kinds(gs, gs.m, kind_of, above, i, 0)
                assert a == b, (below, above, i)


def test_decode_cell(desk_model):
    S = 128
    assert decode_cell(desk_model, (3 - 1) * S + 64, (3 - 1) * S + 64) == ("eol", 3)
    assert decode_cell(desk_model, (7 - 1) * S + 10, (7 - 1) * S + 90) == ("eol", 7)
    assert decode_cell(desk_model, (8 - 1) * S + 64, (8 - 1) * S + 64) == ("eol", 8)
    assert decode_cell(desk_model, (5 - 1) * S + 64, (5 - 1) * S + 64) == ("none", 0)
    assert decode_cell(desk_model, 10, 10) == ("none", 0)
    # LA labyrinth solution mediums M(3,3) and M(7,7)
    from gdkkt.grid import _labyrinth_medium_of_cell

    bx = by = (6 - 1) * S
    c = 64
    x = bx + (c + 2 - 10)  # rel = 10 -> medium column 3
    y = by + (c + 2 + 8)  # roff = 8 -> medium row 3
    assert _labyrinth_medium_of_cell(desk_model.gs, x - bx, y - by) == (3, 3)
    assert decode_cell(desk_model, x, y) == ("iter", 3)
    # and in the reflected case-B labyrinth of B(2, 2)
    bx2 = by2 = (2 - 1) * S
    rx = bx2 + (S - 1 - (c + 2 - 10))
    ry = by2 + (S - 1 - (c + 2 + 8))
    assert decode_cell(desk_model, rx, ry) == ("iter", 3)


def test_point_data_out_of_range(desk_model):
    with pytest.raises(OutOfRange):
        desk_model.point_data(-1, 0)
    with pytest.raises(OutOfRange):
        desk_model.point_data(0, 1025)
