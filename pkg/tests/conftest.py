import os
import sys
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.config import SimSettings  # noqa: E402
from core.embedded_graph import EmbeddedGraph, embed_graph  # noqa: E402
from core.exact import Point, point  # noqa: E402
from core.models import EdgeSpec, RouteSpec  # noqa: E402
from core.surface import build_surface  # noqa: E402
from services.instance_kit import fig2_instance, fr_trap, standard_surface  # noqa: E402


@pytest.fixture
def settings() -> SimSettings:
    return SimSettings()


@pytest.fixture(scope="session")
def trap_graph() -> EmbeddedGraph:
    _, graph = fr_trap(1).build(SimSettings())
    return graph


@pytest.fixture(scope="session")
def fig2_graph() -> EmbeddedGraph:
    _, graph = fig2_instance().build(SimSettings())
    return graph


def straight_edges(pairs: Sequence[Tuple[int, int]], nodes: Dict[int, Point]):
    return [EdgeSpec(u, v, ((nodes[u], nodes[v]),)) for u, v in pairs]


def build_graph(nodes: Dict[int, Tuple], pairs: Sequence[Tuple[int, int]], genus: int = 0,
                route: Optional[Tuple[int, int]] = None, gamma: Optional[Sequence[Tuple]] = None) -> EmbeddedGraph:
    """Straight-edge graph on the standard surface; coordinates may be ints or Fractions."""
    positions = {nid: point(Fraction(x), Fraction(y)) for nid, (x, y) in nodes.items()}
    spec = None
    if route is not None:
        curve = tuple(point(Fraction(x), Fraction(y)) for x, y in gamma) if gamma else (
            positions[route[0]], positions[route[1]])
        spec = RouteSpec(route[0], route[1], curve)
    surface = standard_surface(genus) if genus else build_surface([])
    return embed_graph(surface, positions, straight_edges(pairs, positions), spec, SimSettings())


@pytest.fixture
def planar_triangle() -> EmbeddedGraph:
    return build_graph({0: (0, 0), 1: (4, 0), 2: (2, 3)}, [(0, 1), (1, 2), (2, 0)])


@pytest.fixture
def planar_routed() -> EmbeddedGraph:
    """Triangle with a spur to an inner source; the target is a corner."""
    return build_graph({0: (0, 0), 1: (4, 0), 2: (2, 3), 3: (2, 1)},
                       [(0, 1), (1, 2), (2, 0), (3, 2)], route=(3, 0))


@pytest.fixture
def graph_builder():
    return build_graph
