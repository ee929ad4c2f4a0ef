# services/instance_kit.py
"""
Instance Kit Module
===================
Ready-made routing instances:

  * standard_surface(g)  - g handles in a row along the x-axis
  * random_instance      - seeded random connected graph with portal edges
  * fr_trap(g)           - a genus-g instance on which classic face routing loops
  * fig2_instance()      - genus 4, three non-trivial border walks in one region

Everything returned is an InstanceFile, so it can be saved, reloaded and
built the same way as a file written by hand.
"""

import logging
import random
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from core.config import SimSettings, default_settings
from core.embedded_graph import Edge, prepare_edge
from core.errors import GenerationExhausted, InstanceError
from core.exact import Point, add, direction_of, point, point_on_segment, scale, taxicab
from core.models import EdgeSpec, NodeSpec, Portal, RouteSpec
from core.surface import PairSpec, Surface, build_surface, connecting_curves
from storage.instance_file import InstanceFile, load, save  # noqa: F401

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
PORTAL_ANGLE_STEPS = 64


def standard_pairs(genus: int) -> List[PairSpec]:
    if genus < 0:
        raise ValueError("genus must be >= 0")
    pairs = []
    for i in range(1, genus + 1):
        a = point(4 * i - 3, 0)
        b = point(4 * i - 1, 0)
        pairs.append(PairSpec(a, b, HALF, ((a[0] + HALF, a[1]), (b[0] - HALF, b[1]))))
    return pairs


def standard_surface(genus: int) -> Surface:
    """Pair i has disks at (4i-3, 0) and (4i-1, 0), radius 1/2, joined by a straight lambda."""
    return build_surface(standard_pairs(genus))


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------

class _Grower:
    """Adds nodes and edges one at a time, keeping the drawing valid."""

    def __init__(self, surface: Surface, rng: random.Random, settings: SimSettings):
        self.surface = surface
        self.rng = rng
        self.settings = settings
        self.positions: Dict[int, Point] = {}
        self.specs: List[EdgeSpec] = []
        self.placed: List[Edge] = []
        g = surface.genus
        self.x_range = (-1, max(4 * g, 2) + 1)
        self.y_range = (-2, 2)

    def _coordinate(self, lo: int, hi: int) -> Fraction:
        den = self.settings.grid_denominator
        return Fraction(self.rng.randrange(lo * den, hi * den + 1), den)

    def _clear(self, p: Point) -> bool:
        if p in self.positions.values() or self.surface.in_closed_disk(p) is not None:
            return False
        for pair in self.surface.pairs:
            for a, b in zip(pair.lambda_arc, pair.lambda_arc[1:]):
                if point_on_segment(p, a, b):
                    return False
        for edge in self.placed:
            for s in edge.strokes:
                if point_on_segment(p, s.start, s.end) and s.visible(p):
                    return False
        return True

    def random_point(self) -> Optional[Point]:
        for _ in range(self.settings.generation_retries):
            p = (self._coordinate(*self.x_range), self._coordinate(*self.y_range))
            if self._clear(p):
                return p
        return None

    def nearest(self, p: Point, exclude: Sequence[int] = ()) -> List[int]:
        ids = [nid for nid in self.positions if nid not in exclude]
        return sorted(ids, key=lambda nid: (taxicab(self.positions[nid], p), nid))

    def try_edge(self, spec: EdgeSpec) -> bool:
        try:
            edge = prepare_edge(self.surface, len(self.placed), spec, self.positions, self.placed, self.settings)
        except InstanceError as exc:
            logger.debug("rejected edge %d-%d: %s", spec.u, spec.v, exc)
            return False
        self.placed.append(edge)
        self.specs.append(spec)
        return True

    def straight(self, u: int, v: int) -> bool:
        return self.try_edge(EdgeSpec(u, v, ((self.positions[u], self.positions[v]),), ()))

    def portal_edge(self, pair_index: int) -> bool:
        pair = self.surface.pairs[pair_index]
        disk = self.rng.choice((pair.first, pair.second))
        turns = Fraction(self.rng.randrange(PORTAL_ANGLE_STEPS), PORTAL_ANGLE_STEPS)
        if turns == self.surface.attachment(disk.disk_id):
            return False
        exit_locus = self.surface.identify(disk.disk_id, turns)
        exit_disk = self.surface.disk(exit_locus.disk_id)
        reach = disk.radius * self.settings.portal_leg_factor
        leg_in = add(disk.center, scale(direction_of(turns), reach))
        leg_out = add(exit_disk.center, scale(direction_of(exit_locus.turns), exit_disk.radius * self.settings.portal_leg_factor))
        near_in = self.nearest(leg_in)[:3]
        if not near_in:
            return False
        u = self.rng.choice(near_in)
        near_out = self.nearest(leg_out, exclude=(u,))[:3]
        if not near_out:
            return False
        v = self.rng.choice(near_out)
        spec = EdgeSpec(u, v, ((self.positions[u], leg_in), (leg_out, self.positions[v])),
                        (Portal(disk.disk_id, turns),))
        return self.try_edge(spec)

    def grow_tree(self, count: int) -> None:
        retries = self.settings.generation_retries
        for nid in range(count):
            for _ in range(retries):
                p = self.random_point()
                if p is None:
                    raise GenerationExhausted(f"no free position for node {nid}")
                if not self.positions:
                    self.positions[nid] = p
                    break
                self.positions[nid] = p
                if any(self.straight(nid, other) for other in self.nearest(p, exclude=(nid,))[:6]):
                    break
                del self.positions[nid]
            else:
                raise GenerationExhausted(f"could not attach node {nid} after {retries} positions")

    def add_extras(self, count: int) -> None:
        ids = list(self.positions)
        for _ in range(count):
            u = self.rng.choice(ids)
            near = self.nearest(self.positions[u], exclude=(u,))[:4]
            if near:
                self.straight(u, self.rng.choice(near))


def random_instance(genus: int, nodes: int, seed: int,
                    settings: Optional[SimSettings] = None) -> InstanceFile:
    """Seeded random instance; the same (genus, nodes, seed) gives the same bytes."""
    settings = settings or default_settings()
    if nodes < 2:
        raise ValueError("a routing instance needs at least two nodes")
    rng = random.Random(seed)
    surface = standard_surface(genus)
    grower = _Grower(surface, rng, settings)
    grower.grow_tree(nodes)

    for i in range(genus):
        for _ in range(settings.generation_retries):
            if grower.portal_edge(i):
                break
        else:
            logger.warning("seed %d: no portal edge through handle %d", seed, i)
    for _ in range(genus):
        grower.portal_edge(rng.randrange(genus))
    grower.add_extras(nodes // 2)

    node_specs = [NodeSpec(nid, p) for nid, p in sorted(grower.positions.items())]
    ids = sorted(grower.positions)
    for attempt in range(settings.generation_retries):
        source, target = rng.sample(ids, 2)
        instance = _routed(surface, grower, node_specs, source, target, seed, settings)
        if instance is None:
            continue
        logger.info("random instance: genus %d, %d nodes, %d edges, seed %d (route after %d tries)",
                    genus, nodes, len(grower.specs), seed, attempt + 1)
        return instance
    raise GenerationExhausted(f"seed {seed}: no valid source/target pair")


def _routed(surface: Surface, grower: _Grower, node_specs: List[NodeSpec], source: int, target: int,
            seed: int, settings: SimSettings) -> Optional[InstanceFile]:
    """The instance with the first connecting curve that validates, if any."""
    try:
        for gamma in connecting_curves(surface, grower.positions[source], grower.positions[target], settings):
            instance = InstanceFile(
                pairs=standard_pairs(surface.genus),
                nodes=node_specs,
                edges=list(grower.specs),
                route=RouteSpec(source, target, gamma),
                seed=seed,
                generator="random",
            )
            try:
                instance.build(settings)
            except InstanceError as exc:
                logger.debug("seed %d: route %d -> %d rejected: %s", seed, source, target, exc)
                continue
            return instance
    except InstanceError as exc:
        logger.debug("seed %d: no connecting curve %d -> %d: %s", seed, source, target, exc)
    return None


# ---------------------------------------------------------------------------
# Hand-built instances
# ---------------------------------------------------------------------------

def _p(x, y) -> Point:
    return point(Fraction(x), Fraction(y))


def _straight(u: int, v: int, nodes: Dict[int, Point]) -> EdgeSpec:
    return EdgeSpec(u, v, ((nodes[u], nodes[v]),), ())


def _through_handle(u: int, v: int, nodes: Dict[int, Point], first_disk: int, left_x, right_x) -> EdgeSpec:
    """Edge that drops from u into the top of a first disk and rises from its partner to v."""
    return EdgeSpec(
        u, v,
        ((nodes[u], _p(left_x, 1)), (_p(right_x, 1), nodes[v])),
        (Portal(first_disk, Fraction(1, 4)),),
    )


def fr_trap(genus: int = 1) -> InstanceFile:
    """A cycle through handle 0 separates nothing, yet face routing never leaves the source face.

    The connecting curve dips between the two disks of handle 0, crossing its
    lambda but no edge, so classic face routing finds no exit and loops.
    """
    if genus < 1:
        raise ValueError("the trap needs at least one handle")
    a, m, b, s, t = 0, 1, 2, 3, 4
    nodes = {a: _p(1, 2), m: _p(2, 2), b: _p(3, 2), s: _p(2, Fraction(3, 2)), t: _p(2, 3)}
    edges = [
        _through_handle(a, b, nodes, 0, 1, 3),
        _straight(b, m, nodes),
        _straight(m, a, nodes),
        _straight(m, s, nodes),
        _straight(m, t, nodes),
    ]
    gamma = (nodes[s], _p(Fraction(5, 2), -1), _p(0, -1), _p(0, 3), nodes[t])
    return InstanceFile(
        pairs=standard_pairs(genus),
        nodes=[NodeSpec(nid, p) for nid, p in sorted(nodes.items())],
        edges=edges,
        route=RouteSpec(s, t, gamma),
        generator="fr_trap",
    )


def fig2_instance() -> InstanceFile:
    """Genus 4: two cycles through handles 0 and 1, joined by a path.

    Their border walks share one region, so the agent must pass through more
    than one non-trivial border walk before it reaches the target, which sits
    inside a triangle hanging off the second cycle.
    """
    a1, m1, b1, a2, m2, b2, s, u, v, t = range(10)
    nodes = {
        a1: _p(1, 2), m1: _p(2, 2), b1: _p(3, 2),
        a2: _p(5, 2), m2: _p(6, 2), b2: _p(7, 2),
        s: _p(2, Fraction(3, 2)),
        u: _p(Fraction(11, 2), Fraction(6, 5)), v: _p(Fraction(13, 2), Fraction(6, 5)),
        t: _p(6, Fraction(3, 2)),
    }
    edges = [
        _through_handle(a1, b1, nodes, 0, 1, 3),
        _straight(b1, m1, nodes),
        _straight(m1, a1, nodes),
        _through_handle(a2, b2, nodes, 2, 5, 7),
        _straight(b2, m2, nodes),
        _straight(m2, a2, nodes),
        _straight(b1, a2, nodes),
        _straight(m1, s, nodes),
        _straight(m2, u, nodes),
        _straight(u, v, nodes),
        _straight(v, m2, nodes),
        _straight(m2, t, nodes),
    ]
    return InstanceFile(
        pairs=standard_pairs(4),
        nodes=[NodeSpec(nid, p) for nid, p in sorted(nodes.items())],
        edges=edges,
        route=RouteSpec(s, t, (nodes[s], nodes[t])),
        generator="fig2",
    )
