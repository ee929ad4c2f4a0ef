# storage/instance_file.py
"""
Instance File Module
====================
Canonical YAML text for routing instances. Every number is an exact rational
written as "p/q" (integers as "n/1"); emitter options are fixed so that a
saved instance loads and saves back to the same bytes.

Grammar: docs/INSTANCE_FORMAT.md
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import yaml

from core.config import SimSettings, default_settings
from core.embedded_graph import EmbeddedGraph, embed_graph
from core.errors import ParseError, VersionMismatch
from core.exact import Point, format_fraction
from core.models import EdgeSpec, NodeSpec, Portal, RouteSpec
from core.surface import PairSpec, Surface, build_surface, connecting_curve

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass
class InstanceFile:
    pairs: List[PairSpec] = field(default_factory=list)
    nodes: List[NodeSpec] = field(default_factory=list)
    edges: List[EdgeSpec] = field(default_factory=list)
    route: Optional[RouteSpec] = None
    seed: Optional[int] = None
    generator: str = "manual"
    format_version: int = FORMAT_VERSION

    @property
    def genus(self) -> int:
        return len(self.pairs)

    def build(self, settings: Optional[SimSettings] = None) -> Tuple[Surface, EmbeddedGraph]:
        settings = settings or default_settings()
        surface = build_surface(self.pairs)
        route = self.route
        if route is not None and route.gamma is None:
            positions = {n.node_id: n.position for n in self.nodes}
            if route.source in positions and route.target in positions:
                gamma = connecting_curve(surface, positions[route.source], positions[route.target], settings)
                route = RouteSpec(route.source, route.target, gamma)
        graph = embed_graph(surface, self.nodes, self.edges, route, settings)
        return surface, graph

    def to_dict(self) -> Dict:
        data: Dict = {"format_version": self.format_version}
        if self.seed is not None:
            data["seed"] = self.seed
        data["generator"] = self.generator
        data["surface"] = {"pairs": [
            {
                "disks": [
                    {"center": _point(p.first_center), "radius": format_fraction(p.radius)},
                    {"center": _point(p.second_center),
                     "radius": format_fraction(p.second_radius if p.second_radius is not None else p.radius)},
                ],
                "lambda": [_point(q) for q in p.lambda_arc],
            }
            for p in self.pairs
        ]}
        data["graph"] = {
            "nodes": [{"id": n.node_id, "position": _point(n.position)} for n in self.nodes],
            "edges": [
                {
                    "u": e.u,
                    "v": e.v,
                    "pieces": [[_point(q) for q in piece] for piece in e.pieces],
                    "portals": [{"disk": p.disk_id, "angle": format_fraction(p.turns)} for p in e.portals],
                }
                for e in self.edges
            ],
        }
        if self.route is not None:
            route: Dict = {"source": self.route.source, "target": self.route.target}
            if self.route.gamma is not None:
                route["gamma"] = [_point(q) for q in self.route.gamma]
            data["route"] = route
        return data


def _point(p: Point) -> List[str]:
    return [format_fraction(p[0]), format_fraction(p[1])]


def instance_text(instance: InstanceFile) -> str:
    return yaml.safe_dump(instance.to_dict(), sort_keys=False, default_flow_style=None, width=100)


def save(instance: InstanceFile, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(instance_text(instance))
    logger.info("saved %s instance (genus %d, %d nodes) to %s", instance.generator, instance.genus,
                len(instance.nodes), path)


def load(path: str) -> InstanceFile:
    with open(path, "r", encoding="utf-8") as f:
        return loads(f.read())


# ---------------------------------------------------------------------------
# Reading: walk the composed node tree so that errors carry their position
# ---------------------------------------------------------------------------

def _fail(node: Optional[yaml.Node], message: str) -> ParseError:
    if node is None:
        return ParseError(message)
    mark = node.start_mark
    return ParseError(message, mark.line + 1, mark.column + 1)


def _mapping(node: yaml.Node, what: str) -> Dict[str, yaml.Node]:
    if not isinstance(node, yaml.MappingNode):
        raise _fail(node, f"{what} must be a mapping")
    out = {}
    for key, value in node.value:
        if not isinstance(key, yaml.ScalarNode):
            raise _fail(key, f"{what} keys must be plain names")
        out[key.value] = value
    return out


def _field(mapping: Dict[str, yaml.Node], key: str, parent: yaml.Node, what: str) -> yaml.Node:
    if key not in mapping:
        raise _fail(parent, f"{what} is missing '{key}'")
    return mapping[key]


def _sequence(node: yaml.Node, what: str) -> List[yaml.Node]:
    if not isinstance(node, yaml.SequenceNode):
        raise _fail(node, f"{what} must be a list")
    return list(node.value)


def _integer(node: yaml.Node, what: str) -> int:
    if not isinstance(node, yaml.ScalarNode):
        raise _fail(node, f"{what} must be an integer")
    try:
        return int(node.value)
    except ValueError:
        raise _fail(node, f"{what} must be an integer, got {node.value!r}") from None


def _rational(node: yaml.Node, what: str) -> Fraction:
    if not isinstance(node, yaml.ScalarNode):
        raise _fail(node, f"{what} must be a rational 'p/q'")
    try:
        return Fraction(node.value)
    except (ValueError, ZeroDivisionError):
        raise _fail(node, f"{what} must be a rational 'p/q', got {node.value!r}") from None


def _read_point(node: yaml.Node, what: str) -> Point:
    items = _sequence(node, what)
    if len(items) != 2:
        raise _fail(node, f"{what} must have two coordinates")
    return (_rational(items[0], what), _rational(items[1], what))


def _read_pair(node: yaml.Node, i: int) -> PairSpec:
    what = f"pair {i}"
    m = _mapping(node, what)
    disks = _sequence(_field(m, "disks", node, what), f"{what} disks")
    if len(disks) != 2:
        raise _fail(node, f"{what} must list exactly two disks")
    read = []
    for k, disk_node in enumerate(disks):
        dm = _mapping(disk_node, f"{what} disk {k}")
        read.append((
            _read_point(_field(dm, "center", disk_node, f"{what} disk {k}"), f"{what} disk {k} center"),
            _rational(_field(dm, "radius", disk_node, f"{what} disk {k}"), f"{what} disk {k} radius"),
        ))
    arc = tuple(_read_point(p, f"{what} lambda") for p in _sequence(_field(m, "lambda", node, what), f"{what} lambda"))
    (c1, r1), (c2, r2) = read
    return PairSpec(c1, c2, r1, arc, r2 if r2 != r1 else None)


def _read_edge(node: yaml.Node, i: int) -> EdgeSpec:
    what = f"edge {i}"
    m = _mapping(node, what)
    pieces = tuple(
        tuple(_read_point(p, f"{what} piece") for p in _sequence(piece, f"{what} piece"))
        for piece in _sequence(_field(m, "pieces", node, what), f"{what} pieces")
    )
    portals = []
    for p in _sequence(m["portals"], f"{what} portals") if "portals" in m else []:
        pm = _mapping(p, f"{what} portal")
        portals.append(Portal(_integer(_field(pm, "disk", p, f"{what} portal"), f"{what} portal disk"),
                              _rational(_field(pm, "angle", p, f"{what} portal"), f"{what} portal angle")))
    return EdgeSpec(
        _integer(_field(m, "u", node, what), f"{what} u"),
        _integer(_field(m, "v", node, what), f"{what} v"),
        pieces,
        tuple(portals),
    )


def loads(text: str) -> InstanceFile:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line, column = (mark.line + 1, mark.column + 1) if mark else (0, 0)
        raise ParseError(f"malformed instance file: {exc.problem}", line, column) from None
    except yaml.YAMLError as exc:
        raise ParseError(f"malformed instance file: {exc}") from None
    if root is None:
        raise ParseError("empty instance file", 1, 1)

    top = _mapping(root, "instance")
    version = _integer(_field(top, "format_version", root, "instance"), "format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"format_version {version} is not supported (expected {FORMAT_VERSION})")

    instance = InstanceFile(format_version=version)
    if "seed" in top:
        instance.seed = _integer(top["seed"], "seed")
    if "generator" in top:
        instance.generator = str(top["generator"].value)

    surface = _mapping(_field(top, "surface", root, "instance"), "surface")
    pair_nodes = _sequence(surface["pairs"], "surface pairs") if "pairs" in surface else []
    instance.pairs = [_read_pair(p, i) for i, p in enumerate(pair_nodes)]

    graph_node = _field(top, "graph", root, "instance")
    graph = _mapping(graph_node, "graph")
    for n in _sequence(_field(graph, "nodes", graph_node, "graph"), "graph nodes"):
        nm = _mapping(n, "node")
        instance.nodes.append(NodeSpec(_integer(_field(nm, "id", n, "node"), "node id"),
                                       _read_point(_field(nm, "position", n, "node"), "node position")))
    edge_nodes = _sequence(graph["edges"], "graph edges") if "edges" in graph else []
    instance.edges = [_read_edge(e, i) for i, e in enumerate(edge_nodes)]

    if "route" in top:
        rnode = top["route"]
        rm = _mapping(rnode, "route")
        gamma = None
        if "gamma" in rm:
            gamma = tuple(_read_point(p, "route gamma") for p in _sequence(rm["gamma"], "route gamma"))
        instance.route = RouteSpec(_integer(_field(rm, "source", rnode, "route"), "route source"),
                                   _integer(_field(rm, "target", rnode, "route"), "route target"),
                                   gamma)
    return instance
