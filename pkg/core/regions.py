"""
Regions Module
==============
Groups border walks into the regions of the surface cut along G.

The planar picture of G is overlaid with one closed polygon per disk: the
inscribed taxicab diamond, whose point at pseudo-angle tau is
centre + r * direction_of(tau). Portal legs are extended radially to it, so
the whole arrangement has rational vertices. Its faces are found as orbits
of the left-turn rule; faces are then merged

  * across glued boundary arcs of the two disks of a handle, and
  * across planar nesting, by shooting a vertical ray up from the top-right
    vertex of every connected piece of the arrangement.

The sliver between a diamond and its circle is absorbed into the outside
faces, which does not change connectivity because only radial legs enter
a disk.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

from networkx.utils import UnionFind

from core.exact import QUARTER, Point, add, direction_of, scale, sub, turns_of
from core.models import dart_of

logger = logging.getLogger(__name__)

CORNERS = (Fraction(0), QUARTER, Fraction(1, 2), Fraction(3, 4))
UNBOUNDED = -1


@dataclass
class Arrangement:
    points: List[Point]
    tails: List[int]
    heads: List[int]
    face: List[int]
    faces: List[List[int]]
    interior: Set[int]
    root_of_face: Dict[int, int]

    def outline(self, face_id: int) -> List[Point]:
        return [self.points[self.tails[h]] for h in self.faces[face_id]]


def signed_area2(outline: List[Point]) -> Fraction:
    total = Fraction(0)
    for (x1, y1), (x2, y2) in zip(outline, outline[1:] + outline[:1]):
        total += x1 * y2 - x2 * y1
    return total


def diamond_point(center: Point, radius: Fraction, turns: Fraction) -> Point:
    return add(center, scale(direction_of(turns), radius))


class _Builder:
    def __init__(self):
        self.index: Dict[Point, int] = {}
        self.points: List[Point] = []
        self.tails: List[int] = []
        self.heads: List[int] = []
        self.diamond_ccw: Set[int] = set()

    def vertex(self, p: Point) -> int:
        vid = self.index.get(p)
        if vid is None:
            vid = len(self.points)
            self.index[p] = vid
            self.points.append(p)
        return vid

    def segment(self, a: Point, b: Point) -> int:
        h = len(self.tails)
        va, vb = self.vertex(a), self.vertex(b)
        self.tails += [va, vb]
        self.heads += [vb, va]
        return h


def _split_angles(graph) -> Dict[int, Set[Fraction]]:
    surface = graph.surface
    splits: Dict[int, Set[Fraction]] = {d.disk_id: set() for d in surface.disks}
    for pair in surface.pairs:
        splits[pair.first.disk_id].add(pair.first_attachment)
    for edge in graph.edges:
        for portal in edge.portals:
            disk_id = portal.disk_id
            if surface.is_first(disk_id):
                splits[disk_id].add(portal.turns)
            else:
                splits[surface.partner(disk_id)].add(surface.identify(disk_id, portal.turns).turns)
    for pair in surface.pairs:
        first = pair.first.disk_id
        splits[pair.second.disk_id] = {surface.identify(first, t).turns for t in splits[first]}
    return splits


def compute_regions(graph):
    from core.embedded_graph import Region

    surface = graph.surface
    b = _Builder()

    dart_edge: Dict[int, int] = {}
    for edge in graph.edges:
        first_h: Optional[int] = None
        last_h: Optional[int] = None
        for stroke in edge.strokes:
            start, end = stroke.start, stroke.end
            if stroke.is_leg:
                disk = surface.disk(stroke.leg_disk)
                _, turns = leg_locus(surface, edge, stroke)
                rim = diamond_point(disk.center, disk.radius, turns)
                if stroke.end == stroke.hub:
                    end = rim
                else:
                    start = rim
            h = b.segment(start, end)
            if first_h is None:
                first_h = h
            last_h = h
        dart_edge[dart_of(edge.edge_id, True)] = first_h
        dart_edge[dart_of(edge.edge_id, False)] = last_h ^ 1

    splits = _split_angles(graph)
    arc_start: Dict[Tuple[int, Fraction], int] = {}
    for disk in surface.disks:
        angles = sorted(set(CORNERS) | splits[disk.disk_id])
        for i, a in enumerate(angles):
            nxt = angles[(i + 1) % len(angles)]
            h = b.segment(diamond_point(disk.center, disk.radius, a),
                          diamond_point(disk.center, disk.radius, nxt))
            b.diamond_ccw.add(h)
            arc_start[(disk.disk_id, a)] = h

    # rotation: outgoing half-edges clockwise (descending pseudo-angle)
    out: Dict[int, List[int]] = {}
    key: List[Fraction] = []
    for h in range(len(b.tails)):
        key.append(turns_of(sub(b.points[b.heads[h]], b.points[b.tails[h]])))
        out.setdefault(b.tails[h], []).append(h)
    pos: Dict[int, int] = {}
    for v, hs in out.items():
        hs.sort(key=lambda h: key[h], reverse=True)
        for i, h in enumerate(hs):
            pos[h] = i

    def succ(h: int) -> int:
        ring = out[b.heads[h]]
        return ring[(pos[h ^ 1] + 1) % len(ring)]

    face = [-1] * len(b.tails)
    faces: List[List[int]] = []
    for h0 in range(len(b.tails)):
        if face[h0] != -1:
            continue
        fid = len(faces)
        orbit = []
        h = h0
        while face[h] == -1:
            face[h] = fid
            orbit.append(h)
            h = succ(h)
        faces.append(orbit)
    interior = {fid for fid, orbit in enumerate(faces) if all(h in b.diamond_ccw for h in orbit)}

    uf = UnionFind()
    for fid in range(len(faces)):
        uf[fid]
    uf[UNBOUNDED]

    # glued boundary arcs
    for pair in surface.pairs:
        first, second = pair.first.disk_id, pair.second.disk_id
        cuts = sorted(splits[first])
        for j, a in enumerate(cuts):
            nxt = cuts[(j + 1) % len(cuts)]
            h_first = arc_start[(first, a)]
            h_second = arc_start[(second, surface.identify(first, nxt).turns)]
            uf.union(face[h_first ^ 1], face[h_second ^ 1])

    # planar nesting
    parts = UnionFind()
    for h in range(0, len(b.tails), 2):
        parts.union(b.tails[h], b.heads[h])
    for group in parts.to_sets():
        top = max(group, key=lambda v: (b.points[v][1], b.points[v][0]))
        px, py = b.points[top]
        ring = out[top]
        above = next((h for h in ring if key[h] < QUARTER), ring[0])
        best = None
        for h in range(0, len(b.tails), 2):
            (ax, ay), (bx, by) = b.points[b.tails[h]], b.points[b.heads[h]]
            if ax == bx or not (min(ax, bx) <= px < max(ax, bx)):
                continue
            slope = (by - ay) / (bx - ax)
            y = ay + (px - ax) * slope
            if y <= py:
                continue
            if best is None or (y, slope) < best[0]:
                below = face[h ^ 1] if bx > ax else face[h]
                best = ((y, slope), below)
        uf.union(face[above], best[1] if best else UNBOUNDED)

    roots: Dict[object, List[int]] = {}
    walk_root: List[object] = []
    for walk in graph.walks:
        root = uf[face[dart_edge[walk.darts[0]]]]
        walk_root.append(root)
        roots.setdefault(root, []).append(walk.index)

    ordered = sorted(roots.items(), key=lambda item: min(item[1]))
    region_of_root = {root: rid for rid, (root, _) in enumerate(ordered)}
    regions = tuple(
        Region(rid, tuple(sorted(walks)), len(walks) == 1) for rid, (_, walks) in enumerate(ordered)
    )
    walk_region = [region_of_root[r] for r in walk_root]
    root_of_face = {fid: region_of_root.get(uf[fid], -1) for fid in range(len(faces))}
    arrangement = Arrangement(b.points, b.tails, b.heads, face, faces, interior, root_of_face)
    logger.debug("%d regions from %d faces (%d trivial)", len(regions), len(faces),
                 sum(r.trivial for r in regions))
    return regions, walk_region, arrangement


def leg_locus(surface, edge, stroke) -> Tuple[int, Fraction]:
    if stroke.end == stroke.hub:
        portal = edge.portals[stroke.piece]
        return portal.disk_id, portal.turns
    portal = edge.portals[stroke.piece - 1]
    locus = surface.identify(portal.disk_id, portal.turns)
    return locus.disk_id, locus.turns


def face_outlines(graph) -> List[Tuple[int, List[Point]]]:
    """Counterclockwise face boundaries with their region id (-1 if none)."""
    arrangement: Arrangement = graph._regions[2]
    out = []
    for fid in range(len(arrangement.faces)):
        if fid in arrangement.interior:
            continue
        outline = arrangement.outline(fid)
        if signed_area2(outline) > 0:
            out.append((arrangement.root_of_face[fid], outline))
    return out
