"""
Embedded Graph Module
=====================
A connected graph drawn on the planar representation: nodes at rational
points, edges as chains of polyline pieces that may pass through handle
portals. Construction validates embeddedness and general position, then
annotates every edge with its crossings against the reference curves.

Derived structure (rotation system, border walks, regions) is computed on
first use and cached; the graph never changes after construction.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx

from core.config import SimSettings, default_settings
from core.errors import (
    CurveCollision,
    Disconnected,
    EdgeCrossing,
    EdgeNotOnWalk,
    MalformedChain,
    NotGeneralPosition,
    TooManyCrossings,
)
from core.exact import (
    Point,
    bbox_overlap,
    collinear_overlap,
    cross,
    direction_of,
    dot,
    lerp,
    norm2,
    point_on_segment,
    segment_hit,
    segment_meets_closed_disk,
    sign,
    sub,
    taxicab,
    turns_of,
    wrap,
)
from core.models import (
    BoundaryLocus,
    Crossing,
    EdgeSpec,
    NodeSpec,
    Portal,
    RouteSpec,
    dart_of,
    edge_of,
    is_forward,
    reverse,
)
from core.surface import (
    RefCurve,
    Surface,
    forward_of,
    lambda_index,
    mu_index,
    reference_curves,
    reversed_gamma,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Stroke:
    """One straight piece of an edge, oriented along u->v.

    Portal legs are stored as the segment between the leg point and the disk
    centre (``hub``); only the part at distance >= radius from the hub is
    drawn on the surface.
    """
    start: Point
    end: Point
    order: int
    piece: int
    hub: Optional[Point] = None
    clip2: Fraction = Fraction(0)
    leg_disk: Optional[int] = None

    @property
    def is_leg(self) -> bool:
        return self.hub is not None

    def visible(self, p: Point) -> bool:
        return self.hub is None or norm2(sub(p, self.hub)) >= self.clip2

    def on_circle(self, p: Point) -> bool:
        return self.hub is not None and norm2(sub(p, self.hub)) == self.clip2


@dataclass(frozen=True)
class Edge:
    edge_id: int
    u: int
    v: int
    pieces: Tuple[Tuple[Point, ...], ...]
    portals: Tuple[Portal, ...]
    strokes: Tuple[Stroke, ...]
    crossings: Tuple[Crossing, ...]


@dataclass(frozen=True)
class DartCrossing:
    """A crossing as seen while walking one dart; rank counts along the dart."""
    curve_index: int
    t: Fraction
    sign: int
    rank: int


@dataclass(frozen=True)
class IncidentEnd:
    dart: int
    neighbor: int
    neighbor_position: Point
    departure: Fraction
    crossings: Tuple[DartCrossing, ...]


@dataclass(frozen=True)
class LocalView:
    node: int
    position: Point
    ends: Tuple[IncidentEnd, ...]

    def end(self, dart: int) -> IncidentEnd:
        for e in self.ends:
            if e.dart == dart:
                return e
        raise KeyError(f"dart {dart} does not leave node {self.node}")

    def next_clockwise(self, dart: int) -> int:
        """The end clockwise after ``dart`` (a dart leaving this node)."""
        darts = [e.dart for e in self.ends]
        return darts[(darts.index(dart) + 1) % len(darts)]


@dataclass(frozen=True)
class BorderWalk:
    index: int
    darts: Tuple[int, ...]

    @property
    def key(self) -> Tuple[int, ...]:
        return self.darts

    def __len__(self) -> int:
        return len(self.darts)


@dataclass(frozen=True)
class Region:
    region_id: int
    walks: Tuple[int, ...]
    trivial: bool


class EmbeddedGraph:
    def __init__(self, surface: Surface, nodes: Dict[int, Point], edges: Sequence[Edge],
                 route: Optional[RouteSpec], curves: List[RefCurve],
                 rotation: Dict[int, Tuple[int, ...]], departures: Dict[int, Fraction],
                 settings: SimSettings):
        self.surface = surface
        self.genus = surface.genus
        self.nodes = nodes
        self.edges: Tuple[Edge, ...] = tuple(edges)
        self.route = route
        self.curves = curves
        self.rotation = rotation
        self.departures = departures
        self.settings = settings
        self._rot_pos: Dict[int, int] = {}
        for darts in rotation.values():
            for i, d in enumerate(darts):
                self._rot_pos[d] = i
        self._dart_crossings: Dict[int, Tuple[DartCrossing, ...]] = {}
        for edge in self.edges:
            fwd = tuple(DartCrossing(c.curve_index, c.t, c.sign, k) for k, c in enumerate(edge.crossings))
            bwd = tuple(DartCrossing(c.curve_index, c.t, -c.sign, k)
                        for k, c in enumerate(reversed(edge.crossings)))
            self._dart_crossings[dart_of(edge.edge_id, True)] = fwd
            self._dart_crossings[dart_of(edge.edge_id, False)] = bwd

    def __repr__(self) -> str:
        return f"EmbeddedGraph(genus={self.genus}, nodes={len(self.nodes)}, edges={len(self.edges)})"

    # -- darts -------------------------------------------------------------

    @property
    def dart_count(self) -> int:
        return 2 * len(self.edges)

    def tail(self, dart: int) -> int:
        e = self.edges[edge_of(dart)]
        return e.u if is_forward(dart) else e.v

    def head(self, dart: int) -> int:
        e = self.edges[edge_of(dart)]
        return e.v if is_forward(dart) else e.u

    def dart_crossings(self, dart: int) -> Tuple[DartCrossing, ...]:
        return self._dart_crossings[dart]

    def crossings_on(self, dart: int, curve_index: int) -> List[DartCrossing]:
        """Crossings of any curve of the list (reversals included) on a dart."""
        fwd, rev = forward_of(curve_index, self.genus)
        out = []
        for c in self._dart_crossings[dart]:
            if c.curve_index != fwd:
                continue
            if rev:
                out.append(DartCrossing(curve_index, self.curve(curve_index).to_own_t(c.t), -c.sign, c.rank))
            else:
                out.append(c)
        return out

    def curve(self, index: int) -> RefCurve:
        if index < len(self.curves):
            return self.curves[index]
        if index == 4 * self.genus + 1 and self.curves and self.curves[0].polyline:
            return reversed_gamma(self.curves[0], self.genus)
        raise IndexError(f"no curve {index}")

    @property
    def source(self) -> Optional[int]:
        return self.route.source if self.route else None

    @property
    def target(self) -> Optional[int]:
        return self.route.target if self.route else None

    @property
    def gamma(self) -> Tuple[Point, ...]:
        return self.curves[0].polyline if self.curves else ()

    def right_hand_next(self, dart: int) -> int:
        back = reverse(dart)
        ring = self.rotation[self.head(dart)]
        return ring[(self._rot_pos[back] + 1) % len(ring)]

    def first_dart_clockwise_from(self, node: int, turns: Fraction) -> Optional[int]:
        """First dart leaving node strictly clockwise from the given direction."""
        ring = self.rotation.get(node, ())
        if not ring:
            return None
        for d in ring:
            if self.departures[d] < turns:
                return d
        return ring[0]

    def local_view(self, node: int) -> LocalView:
        ends = tuple(
            IncidentEnd(
                dart=d,
                neighbor=self.head(d),
                neighbor_position=self.nodes[self.head(d)],
                departure=self.departures[d],
                crossings=self._dart_crossings[d],
            )
            for d in self.rotation.get(node, ())
        )
        return LocalView(node, self.nodes[node], ends)

    # -- walks -------------------------------------------------------------

    @cached_property
    def walks(self) -> Tuple[BorderWalk, ...]:
        seen: Set[int] = set()
        orbits: List[Tuple[int, ...]] = []
        for start in range(self.dart_count):
            if start in seen:
                continue
            orbit = [start]
            seen.add(start)
            d = self.right_hand_next(start)
            while d != start:
                orbit.append(d)
                seen.add(d)
                d = self.right_hand_next(d)
            low = orbit.index(min(orbit))
            orbits.append(tuple(orbit[low:] + orbit[:low]))
        orbits.sort()
        return tuple(BorderWalk(i, darts) for i, darts in enumerate(orbits))

    @cached_property
    def _walk_index(self) -> Dict[int, int]:
        return {d: w.index for w in self.walks for d in w.darts}

    def walk_of(self, dart: int) -> BorderWalk:
        return self.walks[self._walk_index[dart]]

    def walk_nodes(self, walk: BorderWalk) -> List[int]:
        return [self.tail(d) for d in walk.darts]

    # -- regions -----------------------------------------------------------

    @cached_property
    def _regions(self):
        from core.regions import compute_regions
        return compute_regions(self)

    @property
    def regions(self) -> Tuple[Region, ...]:
        return self._regions[0]

    def region_of_walk(self, walk: Union[BorderWalk, int]) -> Region:
        index = walk.index if isinstance(walk, BorderWalk) else walk
        return self.regions[self._regions[1][index]]

    def is_ntbw(self, walk: Union[BorderWalk, int]) -> bool:
        return not self.region_of_walk(walk).trivial

    @cached_property
    def max_curve_crossings(self) -> int:
        """Largest number of crossings of any single curve with G."""
        counts: Dict[int, int] = {}
        for edge in self.edges:
            for c in edge.crossings:
                counts[c.curve_index] = counts.get(c.curve_index, 0) + 1
        return max(counts.values(), default=0)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def _on_ray(q: Point, center: Point, turns: Fraction, radius: Fraction) -> bool:
    w = direction_of(turns)
    v = sub(q, center)
    return cross(w, v) == 0 and dot(w, v) > 0 and norm2(v) > radius * radius


def _build_strokes(surface: Surface, edge_id: int, spec: EdgeSpec, nodes: Dict[int, Point]) -> Tuple[Stroke, ...]:
    pieces, portals = spec.pieces, spec.portals
    if len(pieces) != len(portals) + 1:
        raise MalformedChain(f"edge {edge_id}: {len(pieces)} pieces for {len(portals)} portals")
    if any(len(p) == 0 for p in pieces):
        raise MalformedChain(f"edge {edge_id}: empty piece")
    if pieces[0][0] != nodes[spec.u] or pieces[-1][-1] != nodes[spec.v]:
        raise MalformedChain(f"edge {edge_id}: chain does not start at node {spec.u} and end at node {spec.v}")

    strokes: List[Stroke] = []
    for k, piece in enumerate(pieces):
        if k > 0:
            prev = portals[k - 1]
            exit_locus = surface.identify(prev.disk_id, prev.turns)
            disk = surface.disk(exit_locus.disk_id)
            if not _on_ray(piece[0], disk.center, exit_locus.turns, disk.radius):
                raise MalformedChain(f"edge {edge_id}: piece {k} does not leave disk {disk.disk_id} radially")
            strokes.append(Stroke(disk.center, piece[0], len(strokes), k, disk.center,
                                  disk.radius * disk.radius, disk.disk_id))
        for a, b in zip(piece, piece[1:]):
            if a == b:
                raise MalformedChain(f"edge {edge_id}: repeated point {a}")
            strokes.append(Stroke(a, b, len(strokes), k))
        if k < len(portals):
            portal = portals[k]
            disk = surface.disk(portal.disk_id)
            if not 0 <= portal.turns < 1:
                raise MalformedChain(f"edge {edge_id}: portal angle {portal.turns} outside [0, 1)")
            if not _on_ray(piece[-1], disk.center, portal.turns, disk.radius):
                raise MalformedChain(f"edge {edge_id}: piece {k} does not enter disk {disk.disk_id} radially")
            strokes.append(Stroke(piece[-1], disk.center, len(strokes), k, disk.center,
                                  disk.radius * disk.radius, disk.disk_id))
    return tuple(strokes)


def _stroke_direction(stroke: Stroke) -> Point:
    return sub(stroke.end, stroke.start)


def _departures(edge: Edge) -> Tuple[Fraction, Fraction]:
    first, last = edge.strokes[0], edge.strokes[-1]
    return turns_of(_stroke_direction(first)), turns_of(sub(last.start, last.end))


def _check_nodes(surface: Surface, nodes: Dict[int, Point], route: Optional[RouteSpec]) -> None:
    seen: Dict[Point, int] = {}
    for nid, p in nodes.items():
        if p in seen:
            raise NotGeneralPosition(f"nodes {seen[p]} and {nid} share position {p}")
        seen[p] = nid
        disk = surface.in_closed_disk(p)
        if disk is not None:
            raise CurveCollision(f"node {nid} lies in disk {disk}", witness=f"node {nid} at {p}")
        for pair in surface.pairs:
            for a, b in zip(pair.lambda_arc, pair.lambda_arc[1:]):
                if point_on_segment(p, a, b):
                    raise NotGeneralPosition(f"node {nid} lies on lambda {pair.index}")
        if route and route.gamma:
            if nid in (route.source, route.target):
                continue
            for a, b in zip(route.gamma, route.gamma[1:]):
                if point_on_segment(p, a, b):
                    raise NotGeneralPosition(f"node {nid} lies on the connecting curve")


def _check_disks(surface: Surface, edge: Edge) -> None:
    for s in edge.strokes:
        for disk in surface.disks:
            if s.is_leg and disk.disk_id == s.leg_disk:
                continue
            if segment_meets_closed_disk(s.start, s.end, disk.center, disk.radius):
                raise CurveCollision(f"edge {edge.edge_id} meets disk {disk.disk_id}",
                                     witness=f"edge {edge.u}-{edge.v} piece {s.piece}")


def _shared_node(p: Point, a: Edge, b: Edge, nodes: Dict[int, Point]) -> bool:
    common = {a.u, a.v} & {b.u, b.v}
    return any(nodes[n] == p for n in common)


def _check_stroke_pair(s: Stroke, t: Stroke, ea: Edge, eb: Edge, nodes: Dict[int, Point]) -> None:
    if not bbox_overlap(s.start, s.end, t.start, t.end):
        return
    same = ea.edge_id == eb.edge_id
    adjacent = same and abs(s.order - t.order) == 1 and s.piece == t.piece
    overlap = collinear_overlap(s.start, s.end, t.start, t.end)
    if overlap is not None:
        lo, hi = overlap
        pts = [lerp(s.start, s.end, lo), lerp(s.start, s.end, hi)]
        if not any(s.visible(p) and t.visible(p) for p in pts):
            return
        if lo == hi:
            p = pts[0]
            if adjacent or _shared_node(p, ea, eb, nodes):
                return
        raise EdgeCrossing(
            f"edges {ea.edge_id} and {eb.edge_id} overlap",
            witness=f"edge {ea.u}-{ea.v} and edge {eb.u}-{eb.v} overlap near {pts[0]}",
        )
    hit = segment_hit(s.start, s.end, t.start, t.end)
    if hit is None:
        return
    p = lerp(s.start, s.end, hit[0])
    if not (s.visible(p) and t.visible(p)):
        return
    if adjacent and p in (s.start, s.end) and p in (t.start, t.end):
        return
    if not same and p in (s.start, s.end) and p in (t.start, t.end) and _shared_node(p, ea, eb, nodes):
        return
    raise EdgeCrossing(
        f"edges {ea.edge_id} and {eb.edge_id} intersect at {p}",
        witness=f"edge {ea.u}-{ea.v} meets edge {eb.u}-{eb.v} at ({p[0]}, {p[1]})",
    )


def check_embedding(edges: Sequence[Edge], nodes: Dict[int, Point],
                    fixed: Sequence[Edge] = ()) -> None:
    """Raise EdgeCrossing unless the edges meet only at shared endpoints.

    ``fixed`` edges are already known to be pairwise fine; only pairs that
    involve at least one of ``edges`` are tested.
    """
    pool = list(fixed) + list(edges)
    start = len(fixed)
    for i in range(start, len(pool)):
        ea = pool[i]
        for j in range(0, i + 1):
            eb = pool[j]
            for s in ea.strokes:
                for t in eb.strokes:
                    if j == i and t.order <= s.order:
                        continue
                    _check_stroke_pair(s, t, ea, eb, nodes)
        for nid, p in nodes.items():
            if nid in (ea.u, ea.v):
                continue
            for s in ea.strokes:
                if point_on_segment(p, s.start, s.end) and s.visible(p):
                    raise EdgeCrossing(f"node {nid} lies on edge {ea.edge_id}",
                                       witness=f"node {nid} on edge {ea.u}-{ea.v}")


def _curve_segments(curve: RefCurve) -> List[Tuple[Point, Point, Fraction]]:
    """(a, b, arclength before a) for each polyline segment."""
    out = []
    walked = Fraction(0)
    for a, b in zip(curve.polyline, curve.polyline[1:]):
        out.append((a, b, walked))
        walked += taxicab(a, b)
    return out


def _gamma_lambda_points(curves: List[RefCurve], genus: int) -> Set[Point]:
    gamma = curves[0]
    points: Set[Point] = set()
    if not gamma.polyline:
        return points
    for i in range(genus):
        lam = curves[lambda_index(i, genus)]
        for a, b, _ in _curve_segments(gamma):
            for c, d, _ in _curve_segments(lam):
                if not bbox_overlap(a, b, c, d):
                    continue
                if collinear_overlap(a, b, c, d) is not None:
                    raise NotGeneralPosition(f"connecting curve runs along lambda {i}")
                hit = segment_hit(a, b, c, d)
                if hit is not None:
                    if hit[0] in (0, 1) or hit[1] in (0, 1):
                        raise NotGeneralPosition(f"connecting curve touches lambda {i} at a vertex")
                    points.add(lerp(a, b, hit[0]))
    return points


def _edge_crossings(surface: Surface, edge: Edge, curves: List[RefCurve], route: Optional[RouteSpec],
                    nodes: Dict[int, Point], forbidden: Set[Point]) -> List[Crossing]:
    g = surface.genus
    found: List[Tuple[Tuple[int, Fraction], Crossing]] = []
    polyline_curves = [c for c in curves[: 2 * g + 1] if c.polyline]
    endpoints = {nodes[edge.u], nodes[edge.v]}
    for curve in polyline_curves:
        segments = _curve_segments(curve)
        for stroke in edge.strokes:
            for a, b, before in segments:
                if not bbox_overlap(stroke.start, stroke.end, a, b):
                    continue
                overlap = collinear_overlap(stroke.start, stroke.end, a, b)
                if overlap is not None:
                    lo, hi = overlap
                    p = lerp(stroke.start, stroke.end, lo)
                    q = lerp(stroke.start, stroke.end, hi)
                    if not (stroke.visible(p) or stroke.visible(q)):
                        continue
                    if lo == hi and curve.index == 0 and p in endpoints and p in (a, b) and p in (
                            curve.polyline[0], curve.polyline[-1]):
                        continue
                    raise NotGeneralPosition(
                        f"edge {edge.edge_id} runs along curve {curve.index}",
                        witness=f"edge {edge.u}-{edge.v} tangent to curve {curve.index} near {p}",
                    )
                hit = segment_hit(stroke.start, stroke.end, a, b)
                if hit is None:
                    continue
                s, u = hit
                p = lerp(stroke.start, stroke.end, s)
                if not stroke.visible(p):
                    continue
                if curve.index == 0 and p in (curve.polyline[0], curve.polyline[-1]):
                    if p in endpoints and p in (stroke.start, stroke.end):
                        continue
                    raise NotGeneralPosition(f"edge {edge.edge_id} passes through an endpoint of the connecting curve")
                if stroke.on_circle(p) or s in (0, 1) or u in (0, 1):
                    raise NotGeneralPosition(
                        f"edge {edge.edge_id} meets curve {curve.index} at a vertex",
                        witness=f"edge {edge.u}-{edge.v} and curve {curve.index} at {p}",
                    )
                if p in forbidden:
                    raise NotGeneralPosition(f"edge {edge.edge_id} crosses curve {curve.index} where curves meet")
                t = (before + taxicab(a, p)) / curve.total_length
                if curve.closed:
                    t %= 1
                crossing = Crossing(curve.index, t, sign(cross(sub(b, a), _stroke_direction(stroke))), p)
                found.append(((stroke.order, s), crossing))

    for stroke in edge.strokes:
        if not stroke.is_leg or stroke.end != stroke.hub:
            continue
        portal = edge.portals[stroke.piece]
        pair = surface.pair_of(portal.disk_id)
        if portal.turns == surface.attachment(portal.disk_id):
            raise NotGeneralPosition(f"edge {edge.edge_id} passes through the lambda {pair.index} attachment")
        first_turns = portal.turns if surface.is_first(portal.disk_id) else surface.identify(
            portal.disk_id, portal.turns).turns
        t = wrap(first_turns - pair.first_attachment)
        crossing = Crossing(mu_index(pair.index), t, 1 if surface.is_first(portal.disk_id) else -1,
                            BoundaryLocus(portal.disk_id, portal.turns))
        found.append(((stroke.order, Fraction(1)), crossing))

    found.sort(key=lambda item: item[0])
    return [c for _, c in found]


def prepare_edge(surface: Surface, edge_id: int, spec: EdgeSpec, nodes: Dict[int, Point],
                 placed: Sequence[Edge], settings: Optional[SimSettings] = None) -> Edge:
    """Build one edge and check it against the surface and ``placed`` edges.

    Used by generators that grow an instance one edge at a time; the basis
    curves are checked here, the connecting curve only by embed_graph.
    """
    settings = settings or default_settings()
    strokes = _build_strokes(surface, edge_id, spec, nodes)
    edge = Edge(edge_id, spec.u, spec.v, tuple(tuple(p) for p in spec.pieces), tuple(spec.portals), strokes, ())
    _check_disks(surface, edge)
    check_embedding([edge], nodes, fixed=placed)
    crossings = _edge_crossings(surface, edge, reference_curves(surface, ()), None, nodes, set())
    counts: Dict[int, int] = {}
    for c in crossings:
        counts[c.curve_index] = counts.get(c.curve_index, 0) + 1
        if counts[c.curve_index] > settings.crossing_bound:
            raise TooManyCrossings(f"edge {edge_id} crosses curve {c.curve_index} too often")
    return edge


def embed_graph(surface: Surface, nodes: Union[Sequence[NodeSpec], Dict[int, Point]],
                edges: Sequence[EdgeSpec], route: Optional[RouteSpec] = None,
                settings: Optional[SimSettings] = None) -> EmbeddedGraph:
    settings = settings or default_settings()
    if isinstance(nodes, dict):
        positions = dict(nodes)
    else:
        positions = {}
        for spec in nodes:
            if spec.node_id in positions:
                raise MalformedChain(f"duplicate node id {spec.node_id}")
            positions[spec.node_id] = spec.position

    for i, spec in enumerate(edges):
        for end in (spec.u, spec.v):
            if end not in positions:
                raise MalformedChain(f"edge {i} refers to unknown node {end}")
        if spec.u == spec.v:
            raise MalformedChain(f"edge {i} is a self-loop at node {spec.u}")
        for portal in spec.portals:
            surface.disk(portal.disk_id)

    if route is not None:
        for end in (route.source, route.target):
            if end not in positions:
                raise MalformedChain(f"route refers to unknown node {end}")
        if route.source == route.target:
            raise MalformedChain("source and target must differ")
        if route.gamma is None:
            raise MalformedChain("route has no connecting curve")
        gamma = tuple(route.gamma)
        if len(gamma) < 2 or gamma[0] != positions[route.source] or gamma[-1] != positions[route.target]:
            raise MalformedChain("connecting curve must run from the source to the target position")
        for a, b in zip(gamma, gamma[1:]):
            disk = surface.segment_blocked(a, b)
            if disk is not None:
                raise CurveCollision(f"connecting curve meets disk {disk}")
        curves = reference_curves(surface, gamma)
    else:
        curves = reference_curves(surface, ())

    _check_nodes(surface, positions, route)

    built: List[Edge] = []
    for i, spec in enumerate(edges):
        strokes = _build_strokes(surface, i, spec, positions)
        edge = Edge(i, spec.u, spec.v, tuple(tuple(p) for p in spec.pieces), tuple(spec.portals), strokes, ())
        _check_disks(surface, edge)
        built.append(edge)
    check_embedding(built, positions)

    forbidden = _gamma_lambda_points(curves, surface.genus) if route is not None else set()
    annotated: List[Edge] = []
    bound = settings.crossing_bound
    for edge in built:
        crossings = _edge_crossings(surface, edge, curves, route, positions, forbidden)
        counts: Dict[int, int] = {}
        for c in crossings:
            counts[c.curve_index] = counts.get(c.curve_index, 0) + 1
            if counts[c.curve_index] > bound:
                raise TooManyCrossings(
                    f"edge {edge.edge_id} crosses curve {c.curve_index} more than {bound} times")
        annotated.append(Edge(edge.edge_id, edge.u, edge.v, edge.pieces, edge.portals, edge.strokes,
                              tuple(crossings)))

    departures: Dict[int, Fraction] = {}
    ends: Dict[int, List[int]] = {nid: [] for nid in positions}
    for edge in annotated:
        out_turns, in_turns = _departures(edge)
        departures[dart_of(edge.edge_id, True)] = out_turns
        departures[dart_of(edge.edge_id, False)] = in_turns
        ends[edge.u].append(dart_of(edge.edge_id, True))
        ends[edge.v].append(dart_of(edge.edge_id, False))
    rotation: Dict[int, Tuple[int, ...]] = {}
    for nid, darts in ends.items():
        keys = [departures[d] for d in darts]
        if len(set(keys)) != len(keys):
            raise NotGeneralPosition(f"two edges leave node {nid} in the same direction")
        rotation[nid] = tuple(sorted(darts, key=lambda d: departures[d], reverse=True))

    if route is not None:
        gamma = curves[0].polyline
        for nid, direction in ((route.source, sub(gamma[1], gamma[0])), (route.target, sub(gamma[-2], gamma[-1]))):
            turns = turns_of(direction)
            if any(departures[d] == turns for d in rotation[nid]):
                raise NotGeneralPosition(f"connecting curve leaves node {nid} along an edge")

    g = nx.MultiGraph()
    g.add_nodes_from(positions)
    g.add_edges_from((e.u, e.v) for e in annotated)
    if positions and not nx.is_connected(g):
        parts = nx.number_connected_components(g)
        raise Disconnected(f"graph has {parts} connected components")

    graph = EmbeddedGraph(surface, positions, annotated, route, curves, rotation, departures, settings)
    logger.debug("embedded %r", graph)
    return graph


# ---------------------------------------------------------------------------
# Walk operations
# ---------------------------------------------------------------------------

def right_hand_next(graph: EmbeddedGraph, incoming: int) -> int:
    return graph.right_hand_next(incoming)


def trace_border_walk(graph: EmbeddedGraph, start: int) -> BorderWalk:
    return graph.walk_of(start)


def regions(graph: EmbeddedGraph) -> List[Region]:
    return list(graph.regions)


def tiled_region(graph: EmbeddedGraph) -> Set[int]:
    return {r.region_id for r in graph.regions if r.trivial}


def walk_homology(graph: EmbeddedGraph, walk: Union[BorderWalk, Iterable[int]]) -> Tuple[int, ...]:
    darts = walk.darts if isinstance(walk, BorderWalk) else tuple(walk)
    g = graph.genus
    sums = [0] * (2 * g)
    for d in darts:
        for c in graph.dart_crossings(d):
            if 1 <= c.curve_index <= 2 * g:
                sums[c.curve_index - 1] += c.sign
    return tuple(sums)


def adjacent_border_walk(graph: EmbeddedGraph, walk: BorderWalk, edge_id: int) -> BorderWalk:
    for d in walk.darts:
        if edge_of(d) == edge_id:
            return graph.walk_of(reverse(d))
    raise EdgeNotOnWalk(f"edge {edge_id} is not on walk {walk.index}")
