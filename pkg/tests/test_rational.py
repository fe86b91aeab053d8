from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gdkkt.rational import (
    Box,
    DimensionMismatch,
    ZeroDenominator,
    format_rational,
    norm,
    normalize,
    parse_rational,
    project_box,
    unit_box,
    vec,
    vsub,
)


def test_normalize_examples():
    assert normalize(2, 4) == Fraction(1, 2)
    assert normalize(3, -6) == Fraction(-1, 2)
    assert normalize(0, 7) == Fraction(0, 1)


def test_normalize_zero_denominator():
    with pytest.raises(ZeroDenominator):
        normalize(1, 0)


@given(st.integers(-10**9, 10**9), st.integers(1, 10**9), st.integers(1, 10**4))
def test_normalize_scaling_invariance(a, b, k):
    assert normalize(a * k, b * k) == normalize(a, b)
    q = normalize(a, b)
    assert normalize(q.numerator, q.denominator) == q


def test_parse_and_format_roundtrip():
    for text in ["3/2", "-3/2", "7", "-7", "0"]:
        q = parse_rational(text)
        assert parse_rational(format_rational(q)) == q
    assert format_rational(Fraction(4, 8)) == "1/2"
    assert format_rational(Fraction(-10, 5)) == "-2"


def test_norms():
    assert norm(vec([3, 4]), "l2sq") == 25
    assert norm(vec([3, -4]), "linf") == 4
    assert norm(vec([0, 0]), "l1") == 0
    assert norm(vec([Fraction(1, 3), Fraction(1, 6)]), "l1") == Fraction(1, 2)


def test_project_box_examples():
    b = unit_box(2)
    assert project_box(vec([Fraction(3, 2), Fraction(-1, 5)]), b) == (1, 0)
    inner = vec([Fraction(3, 10), Fraction(7, 10)])
    assert project_box(inner, b) == inner
    assert project_box(vec([2, 2]), b) == (1, 1)


def test_project_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        project_box(vec([1, 2, 3]), unit_box(2))


rationals = st.fractions(
    min_value=-100, max_value=100, max_denominator=1000
)


@given(st.lists(rationals, min_size=2, max_size=2), st.lists(rationals, min_size=2, max_size=2))
def test_projection_idempotent_and_nonexpansive(xs, ys):
    b = unit_box(2)
    px = project_box(vec(xs), b)
    py = project_box(vec(ys), b)
    assert project_box(px, b) == px
    assert norm(vsub(px, py), "linf") <= norm(vsub(vec(xs), vec(ys)), "linf")


@given(rationals, rationals, rationals)
def test_exact_arithmetic(a, b, c):
    assert (a + b) - b == a
    assert (a * c + b * c) == (a + b) * c


def test_box_invariants():
    with pytest.raises(ValueError):
        Box([1], [0])
    b = Box([0, 0], [2, 3])
    assert vec([1, 1]) in b
    assert vec([3, 1]) not in b
