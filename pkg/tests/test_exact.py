from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.exact import (
    as_fraction,
    collinear_overlap,
    direction_of,
    format_fraction,
    orient,
    segment_hit,
    segment_meets_closed_disk,
    segment_meets_open_disk,
    turns_of,
)

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=64)
turns = st.fractions(min_value=0, max_value=1, max_denominator=256).filter(lambda t: t < 1)


def test_eighths_match_true_angles():
    assert turns_of((Fraction(1), Fraction(0))) == 0
    assert turns_of((Fraction(1), Fraction(1))) == Fraction(1, 8)
    assert turns_of((Fraction(0), Fraction(3))) == Fraction(1, 4)
    assert turns_of((Fraction(-2), Fraction(0))) == Fraction(1, 2)
    assert turns_of((Fraction(0), Fraction(-1))) == Fraction(3, 4)


def test_zero_vector_has_no_direction():
    with pytest.raises(ValueError):
        turns_of((Fraction(0), Fraction(0)))


@given(turns)
def test_direction_inverts_turns(t: Fraction):
    assert turns_of(direction_of(t)) == t


@given(turns, turns)
def test_pseudo_angle_is_monotone(a: Fraction, b: Fraction):
    # cross product sign agrees with the order of angles less than half a turn apart
    if a == b or abs(a - b) >= Fraction(1, 2):
        return
    lo, hi = min(a, b), max(a, b)
    zero = (Fraction(0), Fraction(0))
    assert orient(zero, direction_of(lo), direction_of(hi)) == 1


def test_format_fraction_is_always_p_over_q():
    assert format_fraction(Fraction(3)) == "3/1"
    assert format_fraction(Fraction(-6, 4)) == "-3/2"
    assert as_fraction(" 5/10 ") == Fraction(1, 2)


def test_as_fraction_rejects_floats_and_bools():
    with pytest.raises(TypeError):
        as_fraction(0.5)
    with pytest.raises(TypeError):
        as_fraction(True)


def test_segment_hit_and_overlap():
    o, x, y, xy = (Fraction(0), Fraction(0)), (Fraction(2), Fraction(0)), (Fraction(0), Fraction(2)), \
        (Fraction(2), Fraction(2))
    assert segment_hit(o, xy, x, y) == (Fraction(1, 2), Fraction(1, 2))
    assert segment_hit(o, x, y, xy) is None
    assert collinear_overlap(o, x, (Fraction(1), Fraction(0)), (Fraction(3), Fraction(0))) == (Fraction(1, 2), 1)


def test_tangent_segment_meets_closed_but_not_open_disk():
    a, b = (Fraction(-1), Fraction(1)), (Fraction(1), Fraction(1))
    center = (Fraction(0), Fraction(0))
    assert segment_meets_closed_disk(a, b, center, Fraction(1))
    assert not segment_meets_open_disk(a, b, center, Fraction(1))


@given(rationals, rationals, rationals, rationals)
def test_orientation_is_antisymmetric(ax, ay, bx, by):
    zero = (Fraction(0), Fraction(0))
    assert orient(zero, (ax, ay), (bx, by)) == -orient(zero, (bx, by), (ax, ay))
