"""
Exact Geometry Module
=====================
Rational-coordinate predicates used by every other module.

Angles are measured in "turns" of the diamond pseudo-angle: a direction
(x, y) maps to a rational in [0, 1) that increases monotonically with the
true counterclockwise angle and agrees with it at every eighth of a turn.
Everything here is exact; floats never enter.
"""

from fractions import Fraction
from typing import Optional, Tuple, Union

Number = Union[int, Fraction, str]
Point = Tuple[Fraction, Fraction]

QUARTER = Fraction(1, 4)
HALF = Fraction(1, 2)


def as_fraction(value: Number) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coordinates")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as an exact rational")


def point(x: Number, y: Number) -> Point:
    return (as_fraction(x), as_fraction(y))


def format_fraction(value: Fraction) -> str:
    """Canonical text form, always p/q (integers as n/1)."""
    return f"{value.numerator}/{value.denominator}"


def add(a: Point, b: Point) -> Point:
    return (a[0] + b[0], a[1] + b[1])


def sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def scale(a: Point, k: Fraction) -> Point:
    return (a[0] * k, a[1] * k)


def cross(u: Point, v: Point) -> Fraction:
    return u[0] * v[1] - u[1] * v[0]


def dot(u: Point, v: Point) -> Fraction:
    return u[0] * v[0] + u[1] * v[1]


def norm2(u: Point) -> Fraction:
    return dot(u, u)


def rot90(u: Point) -> Point:
    return (-u[1], u[0])


def sign(value: Fraction) -> int:
    return (value > 0) - (value < 0)


def orient(a: Point, b: Point, c: Point) -> int:
    """+1 if a, b, c turn counterclockwise, -1 clockwise, 0 collinear."""
    return sign(cross(sub(b, a), sub(c, a)))


def taxicab(a: Point, b: Point) -> Fraction:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def lerp(a: Point, b: Point, s: Fraction) -> Point:
    return (a[0] + (b[0] - a[0]) * s, a[1] + (b[1] - a[1]) * s)


# ---------------------------------------------------------------------------
# Pseudo-angles
# ---------------------------------------------------------------------------

def turns_of(vec: Point) -> Fraction:
    """Diamond pseudo-angle of a non-zero vector, in [0, 1)."""
    x, y = vec
    if x == 0 and y == 0:
        raise ValueError("zero vector has no direction")
    if x > 0 and y >= 0:
        quad = y / (x + y)
    elif x <= 0 and y > 0:
        quad = 1 + (-x) / (-x + y)
    elif x < 0 and y <= 0:
        quad = 2 + (-y) / (-x - y)
    else:
        quad = 3 + x / (x - y)
    return quad / 4


def direction_of(turns: Fraction) -> Point:
    """Rational direction vector for a pseudo-angle; inverse of turns_of."""
    turns = Fraction(turns) % 1
    k = int(turns * 4)
    f = turns * 4 - k
    x, y = 1 - f, f
    for _ in range(k):
        x, y = -y, x
    return (x, y)


def wrap(turns: Fraction) -> Fraction:
    return Fraction(turns) % 1


def ccw_gap(start: Fraction, end: Fraction) -> Fraction:
    """Counterclockwise sweep from start to end, in [0, 1)."""
    return (end - start) % 1


# ---------------------------------------------------------------------------
# Segments
# ---------------------------------------------------------------------------

def bbox_overlap(a: Point, b: Point, c: Point, d: Point) -> bool:
    return (
        min(a[0], b[0]) <= max(c[0], d[0])
        and min(c[0], d[0]) <= max(a[0], b[0])
        and min(a[1], b[1]) <= max(c[1], d[1])
        and min(c[1], d[1]) <= max(a[1], b[1])
    )


def segment_hit(p1: Point, p2: Point, q1: Point, q2: Point) -> Optional[Tuple[Fraction, Fraction]]:
    """Parameters (s, u) with p1 + s(p2-p1) = q1 + u(q2-q1), both in [0, 1].

    Returns None for disjoint or parallel segments; collinear overlap is
    reported separately by collinear_overlap.
    """
    r = sub(p2, p1)
    v = sub(q2, q1)
    den = cross(r, v)
    if den == 0:
        return None
    w = sub(q1, p1)
    s = cross(w, v) / den
    u = cross(w, r) / den
    if 0 <= s <= 1 and 0 <= u <= 1:
        return (s, u)
    return None


def collinear_overlap(p1: Point, p2: Point, q1: Point, q2: Point) -> Optional[Tuple[Fraction, Fraction]]:
    """Shared parameter range on p1p2 of two collinear segments, or None."""
    r = sub(p2, p1)
    if cross(r, sub(q2, q1)) != 0 or cross(r, sub(q1, p1)) != 0:
        return None
    rr = norm2(r)
    t0 = dot(sub(q1, p1), r) / rr
    t1 = dot(sub(q2, p1), r) / rr
    lo = max(min(t0, t1), Fraction(0))
    hi = min(max(t0, t1), Fraction(1))
    if lo > hi:
        return None
    return (lo, hi)


def point_on_segment(p: Point, a: Point, b: Point) -> bool:
    if cross(sub(b, a), sub(p, a)) != 0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def segment_disk_distance2(a: Point, b: Point, center: Point) -> Fraction:
    """Squared distance from center to the closed segment ab."""
    ab = sub(b, a)
    denom = norm2(ab)
    if denom == 0:
        return norm2(sub(center, a))
    t = dot(sub(center, a), ab) / denom
    t = min(max(t, Fraction(0)), Fraction(1))
    closest = lerp(a, b, t)
    return norm2(sub(center, closest))


def segment_meets_closed_disk(a: Point, b: Point, center: Point, radius: Fraction) -> bool:
    return segment_disk_distance2(a, b, center) <= radius * radius


def segment_meets_open_disk(a: Point, b: Point, center: Point, radius: Fraction) -> bool:
    return segment_disk_distance2(a, b, center) < radius * radius


