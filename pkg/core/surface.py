"""
Planar Surface Module
=====================
The genus-g surface as the plane minus 2g disks whose boundary circles are
glued in pairs. Pair i owns disks 2i (first) and 2i+1 (second), the circle
curve mu_i and the connector arc lambda_i from the first disk to the second.

Gluing reverses boundary orientation and pins the lambda attachments
together: a boundary angle tau on one circle is the same surface point as
(tau0 + tau0' - tau) mod 1 on its partner, tau0 and tau0' being the two
attachment angles. Angles are pseudo-angle turns (see core.exact).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from core.config import SimSettings, default_settings
from core.errors import (
    CurveCollision,
    DetachedLambda,
    InstanceError,
    MismatchedRadii,
    OverlappingDisks,
)
from core.exact import (
    Point,
    add,
    bbox_overlap,
    collinear_overlap,
    direction_of,
    dot,
    lerp,
    norm2,
    point_on_segment,
    rot90,
    scale,
    segment_hit,
    segment_meets_closed_disk,
    segment_meets_open_disk,
    sub,
    taxicab,
    turns_of,
    wrap,
)
from core.models import BoundaryLocus, CurveKind, Disk, Orientation, SurfacePoint

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairSpec:
    first_center: Point
    second_center: Point
    radius: Fraction
    lambda_arc: Tuple[Point, ...]
    second_radius: Optional[Fraction] = None


@dataclass(frozen=True)
class HandlePair:
    index: int
    first: Disk
    second: Disk
    lambda_arc: Tuple[Point, ...]
    first_attachment: Fraction
    second_attachment: Fraction


class Surface:
    def __init__(self, pairs: Sequence[HandlePair]):
        self.pairs: Tuple[HandlePair, ...] = tuple(pairs)
        self.genus = len(self.pairs)
        self.disks: Tuple[Disk, ...] = tuple(d for p in self.pairs for d in (p.first, p.second))

    def __repr__(self) -> str:
        return f"Surface(genus={self.genus})"

    def disk(self, disk_id: int) -> Disk:
        if not 0 <= disk_id < len(self.disks):
            raise InstanceError(f"unknown disk id {disk_id}")
        return self.disks[disk_id]

    def pair_of(self, disk_id: int) -> HandlePair:
        self.disk(disk_id)
        return self.pairs[disk_id // 2]

    def partner(self, disk_id: int) -> int:
        self.disk(disk_id)
        return disk_id ^ 1

    def is_first(self, disk_id: int) -> bool:
        return disk_id % 2 == 0

    def attachment(self, disk_id: int) -> Fraction:
        pair = self.pair_of(disk_id)
        return pair.first_attachment if self.is_first(disk_id) else pair.second_attachment

    def identify(self, disk_id: int, turns: Fraction) -> BoundaryLocus:
        other = self.partner(disk_id)
        mapped = wrap(self.attachment(disk_id) + self.attachment(other) - turns)
        return BoundaryLocus(other, mapped)

    def circle_point(self, disk_id: int, turns: Fraction) -> Tuple[float, float]:
        """Float position of a boundary locus, for drawing only."""
        disk = self.disk(disk_id)
        dx, dy = direction_of(turns)
        length = (float(dx) ** 2 + float(dy) ** 2) ** 0.5
        r = float(disk.radius)
        return (float(disk.center[0]) + r * float(dx) / length, float(disk.center[1]) + r * float(dy) / length)

    def in_closed_disk(self, p: Point) -> Optional[int]:
        for disk in self.disks:
            if norm2(sub(p, disk.center)) <= disk.radius * disk.radius:
                return disk.disk_id
        return None

    def segment_blocked(self, a: Point, b: Point) -> Optional[int]:
        for disk in self.disks:
            if segment_meets_closed_disk(a, b, disk.center, disk.radius):
                return disk.disk_id
        return None


def build_surface(spec: Iterable[PairSpec]) -> Surface:
    specs = list(spec)
    pairs: List[HandlePair] = []
    for i, ps in enumerate(specs):
        r1 = ps.radius
        r2 = ps.second_radius if ps.second_radius is not None else ps.radius
        if r1 <= 0 or r2 <= 0:
            raise MismatchedRadii(f"pair {i}: radii must be positive")
        if r1 != r2:
            raise MismatchedRadii(f"pair {i}: radii {r1} and {r2} differ")
        first = Disk(2 * i, ps.first_center, r1)
        second = Disk(2 * i + 1, ps.second_center, r2)
        arc = tuple(ps.lambda_arc)
        if len(arc) < 2:
            raise DetachedLambda(f"lambda {i} needs at least two points")
        if norm2(sub(arc[0], first.center)) != r1 * r1:
            raise DetachedLambda(f"lambda {i} does not start on disk {first.disk_id}")
        if norm2(sub(arc[-1], second.center)) != r2 * r2:
            raise DetachedLambda(f"lambda {i} does not end on disk {second.disk_id}")
        pairs.append(HandlePair(
            index=i,
            first=first,
            second=second,
            lambda_arc=arc,
            first_attachment=turns_of(sub(arc[0], first.center)),
            second_attachment=turns_of(sub(arc[-1], second.center)),
        ))

    disks = [d for p in pairs for d in (p.first, p.second)]
    for i, a in enumerate(disks):
        for b in disks[i + 1:]:
            reach = a.radius + b.radius
            if norm2(sub(a.center, b.center)) <= reach * reach:
                raise OverlappingDisks(
                    f"disks {a.disk_id} and {b.disk_id} overlap",
                    witness=f"disk {a.disk_id} at {a.center}, disk {b.disk_id} at {b.center}",
                )

    for pair in pairs:
        _check_lambda(pair, disks)
    for i, p in enumerate(pairs):
        for q in pairs[i + 1:]:
            if _polylines_meet(p.lambda_arc, q.lambda_arc):
                raise CurveCollision(f"lambda {p.index} meets lambda {q.index}")

    surface = Surface(pairs)
    logger.debug("built %r", surface)
    return surface


def _check_lambda(pair: HandlePair, disks: Sequence[Disk]) -> None:
    arc = pair.lambda_arc
    last = len(arc) - 2
    for k in range(len(arc) - 1):
        a, b = arc[k], arc[k + 1]
        if a == b:
            raise CurveCollision(f"lambda {pair.index} has a zero-length segment")
        for disk in disks:
            own_start = disk is pair.first and k == 0
            own_end = disk is pair.second and k == last
            if own_start or own_end:
                if segment_meets_open_disk(a, b, disk.center, disk.radius):
                    raise CurveCollision(f"lambda {pair.index} enters disk {disk.disk_id}")
                anchor, away = (a, b) if own_start else (b, a)
                if dot(sub(away, anchor), sub(anchor, disk.center)) <= 0:
                    raise CurveCollision(f"lambda {pair.index} is tangent to disk {disk.disk_id}")
            elif segment_meets_closed_disk(a, b, disk.center, disk.radius):
                raise CurveCollision(f"lambda {pair.index} meets disk {disk.disk_id}")
    if not polyline_is_simple(arc):
        raise CurveCollision(f"lambda {pair.index} intersects itself")


def polyline_is_simple(poly: Sequence[Point]) -> bool:
    n = len(poly) - 1
    for i in range(n):
        for j in range(i + 1, n):
            a, b, c, d = poly[i], poly[i + 1], poly[j], poly[j + 1]
            if not bbox_overlap(a, b, c, d):
                continue
            overlap = collinear_overlap(a, b, c, d)
            if j == i + 1:
                if overlap is not None and overlap[1] - overlap[0] > 0:
                    return False
                continue
            if overlap is not None or segment_hit(a, b, c, d) is not None:
                return False
    return True


def _polylines_meet(p: Sequence[Point], q: Sequence[Point]) -> bool:
    for i in range(len(p) - 1):
        for j in range(len(q) - 1):
            a, b, c, d = p[i], p[i + 1], q[j], q[j + 1]
            if not bbox_overlap(a, b, c, d):
                continue
            if segment_hit(a, b, c, d) is not None or collinear_overlap(a, b, c, d) is not None:
                return True
    return False


def identify_boundary_point(surface: Surface, disk_id: int, turns: Fraction) -> Tuple[int, Fraction]:
    """Partner of a boundary point; angles are in turns, 0 <= turns < 1."""
    turns = Fraction(turns)
    if not 0 <= turns < 1:
        raise ValueError(f"angle {turns} outside [0, 1) turns")
    locus = surface.identify(disk_id, turns)
    return locus.disk_id, locus.turns


# ---------------------------------------------------------------------------
# Reference curves
# ---------------------------------------------------------------------------

def curve_count(genus: int) -> int:
    return 4 * genus + 1


def gamma_reversed_index(genus: int) -> int:
    """Index of the reversed connecting curve; outside the ordered list."""
    return 4 * genus + 1


def reversed_index(index: int, genus: int) -> int:
    if index == 0:
        return gamma_reversed_index(genus)
    if index == gamma_reversed_index(genus):
        return 0
    if 1 <= index <= 2 * genus:
        return index + 2 * genus
    if 2 * genus < index <= 4 * genus:
        return index - 2 * genus
    raise ValueError(f"curve index {index} out of range for genus {genus}")


def forward_of(index: int, genus: int) -> Tuple[int, bool]:
    """(forward index, reversed?) for any curve index."""
    if index == 0 or 1 <= index <= 2 * genus:
        return index, False
    return reversed_index(index, genus), True


def mu_index(pair: int) -> int:
    return 1 + pair


def lambda_index(pair: int, genus: int) -> int:
    return 1 + genus + pair


@dataclass(frozen=True)
class RefCurve:
    index: int
    kind: CurveKind
    orientation: Orientation
    forward_index: int
    handle: Optional[int]
    polyline: Tuple[Point, ...]
    disk_id: Optional[int]
    start_turns: Fraction
    total_length: Fraction
    closed: bool

    @property
    def is_reversed(self) -> bool:
        return self.orientation is Orientation.REVERSED

    def to_own_t(self, t_forward: Fraction) -> Fraction:
        if not self.is_reversed:
            return t_forward
        return (1 - t_forward) % 1 if self.closed else 1 - t_forward

    def to_forward_t(self, t_own: Fraction) -> Fraction:
        # the reversal map is an involution
        return self.to_own_t(t_own)

    def point_at(self, t: Fraction) -> SurfacePoint:
        t_fwd = self.to_forward_t(Fraction(t))
        if self.kind is CurveKind.MU:
            return BoundaryLocus(self.disk_id, wrap(self.start_turns + t_fwd))
        target = t_fwd * self.total_length
        walked = Fraction(0)
        for a, b in zip(self.polyline, self.polyline[1:]):
            seg = taxicab(a, b)
            if walked + seg >= target:
                return lerp(a, b, (target - walked) / seg)
            walked += seg
        return self.polyline[-1]

    def t_of(self, where: SurfacePoint, surface: Optional[Surface] = None) -> Fraction:
        if self.kind is CurveKind.MU:
            if not isinstance(where, BoundaryLocus):
                raise ValueError("mu curves only carry boundary points")
            locus = where
            if locus.disk_id != self.disk_id:
                if surface is None:
                    raise ValueError("surface needed to map a partner locus")
                locus = surface.identify(locus.disk_id, locus.turns)
            return self.to_own_t(wrap(locus.turns - self.start_turns))
        walked = Fraction(0)
        for a, b in zip(self.polyline, self.polyline[1:]):
            if point_on_segment(where, a, b):
                t_fwd = (walked + taxicab(a, where)) / self.total_length
                if self.closed:
                    t_fwd %= 1
                return self.to_own_t(t_fwd)
            walked += taxicab(a, b)
        raise ValueError(f"{where} is not on curve {self.index}")


def _polyline_length(poly: Sequence[Point]) -> Fraction:
    return sum((taxicab(a, b) for a, b in zip(poly, poly[1:])), Fraction(0))


def reference_curves(surface: Surface, gamma: Sequence[Point]) -> List[RefCurve]:
    g = surface.genus
    gamma = tuple(gamma)
    forward: List[RefCurve] = [RefCurve(
        index=0,
        kind=CurveKind.CONNECTING,
        orientation=Orientation.FORWARD,
        forward_index=0,
        handle=None,
        polyline=gamma,
        disk_id=None,
        start_turns=Fraction(0),
        total_length=_polyline_length(gamma),
        closed=False,
    )]
    for pair in surface.pairs:
        forward.append(RefCurve(
            index=mu_index(pair.index),
            kind=CurveKind.MU,
            orientation=Orientation.FORWARD,
            forward_index=mu_index(pair.index),
            handle=pair.index,
            polyline=(),
            disk_id=pair.first.disk_id,
            start_turns=pair.first_attachment,
            total_length=8 * pair.first.radius,
            closed=True,
        ))
    for pair in surface.pairs:
        forward.append(RefCurve(
            index=lambda_index(pair.index, g),
            kind=CurveKind.LAMBDA,
            orientation=Orientation.FORWARD,
            forward_index=lambda_index(pair.index, g),
            handle=pair.index,
            polyline=pair.lambda_arc,
            disk_id=None,
            start_turns=Fraction(0),
            total_length=_polyline_length(pair.lambda_arc),
            closed=True,
        ))
    reversed_basis = [
        RefCurve(
            index=c.index + 2 * g,
            kind=c.kind,
            orientation=Orientation.REVERSED,
            forward_index=c.index,
            handle=c.handle,
            polyline=c.polyline,
            disk_id=c.disk_id,
            start_turns=c.start_turns,
            total_length=c.total_length,
            closed=True,
        )
        for c in forward[1:]
    ]
    return forward + reversed_basis


def reversed_gamma(gamma_curve: RefCurve, genus: int) -> RefCurve:
    return RefCurve(
        index=gamma_reversed_index(genus),
        kind=CurveKind.CONNECTING,
        orientation=Orientation.REVERSED,
        forward_index=0,
        handle=None,
        polyline=gamma_curve.polyline,
        disk_id=None,
        start_turns=Fraction(0),
        total_length=gamma_curve.total_length,
        closed=False,
    )


# ---------------------------------------------------------------------------
# Connecting curve
# ---------------------------------------------------------------------------

def connecting_curves(surface: Surface, source: Point, target: Point,
                      settings: Optional[SimSettings] = None) -> Iterator[Tuple[Point, ...]]:
    """Distinct disk-free curves from source to target, straightest first.

    Only curves in general position with every lambda are yielded.
    """
    settings = settings or default_settings()
    for s, name in ((source, "source"), (target, "target")):
        if surface.in_closed_disk(s) is not None:
            raise CurveCollision(f"{name} {s} lies in a disk")

    span = sub(target, source)
    candidates: List[List[Point]] = [[source, target]]
    for k in (1, -1, 2, -2, 3, -3, 4, -4):
        bend = add(lerp(source, target, Fraction(1, 2)), scale(rot90(span), Fraction(k, 8)))
        candidates.append([source, bend, target])

    seen = set()
    for waypoints in candidates:
        path = _detour_path(surface, waypoints, settings.detour_clearance)
        if path is None or path in seen:
            continue
        seen.add(path)
        if _clean_against_basis(surface, path):
            yield path


def connecting_curve(surface: Surface, source: Point, target: Point,
                     settings: Optional[SimSettings] = None) -> Tuple[Point, ...]:
    """PL curve from source to target that never enters a closed disk."""
    for path in connecting_curves(surface, source, target, settings):
        return path
    raise CurveCollision(f"no disk-free connecting curve from {source} to {target}")


def _detour_path(surface: Surface, waypoints: List[Point], clearance: Fraction) -> Optional[Tuple[Point, ...]]:
    path = list(waypoints)
    for w in path[1:-1]:
        if surface.in_closed_disk(w) is not None:
            return None
    for _ in range(16 * (surface.genus + 1)):
        hit = _first_obstruction(surface, path)
        if hit is None:
            deduped = [path[0]]
            for p in path[1:]:
                if p != deduped[-1]:
                    deduped.append(p)
            return tuple(deduped)
        k, disk = hit
        path[k:k + 2] = _detour(path[k], path[k + 1], disk, clearance)
    return None


def _first_obstruction(surface: Surface, path: List[Point]) -> Optional[Tuple[int, Disk]]:
    for k in range(len(path) - 1):
        a, b = path[k], path[k + 1]
        if a == b:
            continue
        best: Optional[Tuple[Fraction, Disk]] = None
        for disk in surface.disks:
            if segment_meets_closed_disk(a, b, disk.center, disk.radius):
                ab = sub(b, a)
                along = dot(sub(disk.center, a), ab) / norm2(ab)
                if best is None or along < best[0]:
                    best = (along, disk)
        if best is not None:
            return k, best[1]
    return None


def _linf(v: Point) -> Fraction:
    return max(abs(v[0]), abs(v[1]))


def _push_to_square(p: Point, center: Point, half: Fraction) -> Point:
    v = sub(p, center)
    return add(center, scale(v, half / _linf(v)))


def _clip_square(a: Point, b: Point, center: Point, half: Fraction) -> Optional[Tuple[Fraction, Fraction]]:
    lo, hi = Fraction(0), Fraction(1)
    d = sub(b, a)
    for axis in (0, 1):
        low = center[axis] - half - a[axis]
        high = center[axis] + half - a[axis]
        if d[axis] == 0:
            if low > 0 or high < 0:
                return None
            continue
        t1, t2 = low / d[axis], high / d[axis]
        if t1 > t2:
            t1, t2 = t2, t1
        lo, hi = max(lo, t1), min(hi, t2)
        if lo > hi:
            return None
    return lo, hi


def _perimeter_position(p: Point, center: Point, half: Fraction) -> Fraction:
    cx, cy = center
    x, y = p
    if x == cx + half and y < cy + half:
        return y - (cy - half)
    if y == cy + half and x > cx - half:
        return 2 * half + (cx + half - x)
    if x == cx - half and y > cy - half:
        return 4 * half + (cy + half - y)
    return 6 * half + (x - (cx - half))


def _detour(a: Point, b: Point, disk: Disk, clearance: Fraction) -> List[Point]:
    half = clearance * disk.radius
    c = disk.center
    clip = _clip_square(a, b, c, half)
    s_in, s_out = clip if clip is not None else (Fraction(0), Fraction(1))
    entry = _push_to_square(a, c, half) if s_in == 0 else lerp(a, b, s_in)
    leave = _push_to_square(b, c, half) if s_out == 1 else lerp(a, b, s_out)

    perimeter = 8 * half
    corners = [
        (Fraction(0), (c[0] + half, c[1] - half)),
        (2 * half, (c[0] + half, c[1] + half)),
        (4 * half, (c[0] - half, c[1] + half)),
        (6 * half, (c[0] - half, c[1] - half)),
    ]
    p_in = _perimeter_position(entry, c, half)
    p_out = _perimeter_position(leave, c, half)
    ccw = (p_out - p_in) % perimeter
    if ccw <= perimeter - ccw:
        passed = sorted(((pos - p_in) % perimeter, q) for pos, q in corners
                        if 0 < (pos - p_in) % perimeter < ccw)
    else:
        cw = perimeter - ccw
        passed = sorted(((p_in - pos) % perimeter, q) for pos, q in corners
                        if 0 < (p_in - pos) % perimeter < cw)
    return [a, entry] + [q for _, q in passed] + [leave, b]


def _clean_against_basis(surface: Surface, path: Tuple[Point, ...]) -> bool:
    if not polyline_is_simple(path):
        return False
    for pair in surface.pairs:
        arc = pair.lambda_arc
        for i in range(len(path) - 1):
            a, b = path[i], path[i + 1]
            for j in range(len(arc) - 1):
                c, d = arc[j], arc[j + 1]
                if not bbox_overlap(a, b, c, d):
                    continue
                if collinear_overlap(a, b, c, d) is not None:
                    return False
                hit = segment_hit(a, b, c, d)
                if hit is not None and (hit[0] in (0, 1) or hit[1] in (0, 1)):
                    return False
    return True
