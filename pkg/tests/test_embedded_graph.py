from fractions import Fraction

import pytest

from core.embedded_graph import (
    adjacent_border_walk,
    embed_graph,
    regions,
    right_hand_next,
    tiled_region,
    trace_border_walk,
    walk_homology,
)
from core.errors import CurveCollision, Disconnected, EdgeCrossing, EdgeNotOnWalk, MalformedChain
from core.exact import point
from core.models import EdgeSpec, Portal, reverse
from services.instance_kit import standard_surface


def handle_cycle():
    """a -> b through handle 0, then b - m - a: a non-contractible triangle, no route."""
    nodes = {0: point(1, 2), 1: point(2, 2), 2: point(3, 2)}
    edges = [
        EdgeSpec(0, 2, ((nodes[0], point(1, 1)), (point(3, 1), nodes[2])), (Portal(0, Fraction(1, 4)),)),
        EdgeSpec(2, 1, ((nodes[2], nodes[1]),)),
        EdgeSpec(1, 0, ((nodes[1], nodes[0]),)),
    ]
    return embed_graph(standard_surface(1), nodes, edges)


def test_planar_triangle_has_two_walks(planar_triangle):
    assert {w.darts for w in planar_triangle.walks} == {(0, 2, 4), (1, 5, 3)}
    assert trace_border_walk(planar_triangle, 2).darts == (0, 2, 4)


def test_walks_partition_the_darts(fig2_graph):
    darts = [d for w in fig2_graph.walks for d in w.darts]
    assert sorted(darts) == list(range(fig2_graph.dart_count))


def test_single_edge_is_one_walk(graph_builder):
    graph = graph_builder({0: (0, 0), 1: (1, 0)}, [(0, 1)])
    assert [w.darts for w in graph.walks] == [(0, 1)]
    walk = graph.walks[0]
    assert adjacent_border_walk(graph, walk, 0) == walk


def test_degree_one_node_turns_back(graph_builder):
    graph = graph_builder({0: (0, 0), 1: (1, 0)}, [(0, 1)])
    assert right_hand_next(graph, 0) == 1
    assert right_hand_next(graph, 1) == 0


def test_next_clockwise_departure(graph_builder):
    graph = graph_builder({0: (0, 0), 1: (1, 0), 2: (0, 1), 3: (-1, 0)}, [(0, 1), (0, 2), (0, 3)])
    # arriving along the 90 degree end leaves along the 0 degree end
    assert right_hand_next(graph, 3) == 0
    assert right_hand_next(graph, 1) == 4


def test_right_hand_orbits_close(fig2_graph):
    for start in range(fig2_graph.dart_count):
        d, steps = right_hand_next(fig2_graph, start), 1
        while d != start:
            d = right_hand_next(fig2_graph, d)
            steps += 1
            assert steps <= fig2_graph.dart_count
        assert steps == len(fig2_graph.walk_of(start))


def test_planar_triangle_regions(planar_triangle):
    found = regions(planar_triangle)
    assert len(found) == 2
    assert all(r.trivial for r in found)
    assert tiled_region(planar_triangle) == {0, 1}


def test_contractible_triangle_on_torus(graph_builder):
    graph = graph_builder({0: (0, 2), 1: (2, 2), 2: (1, 3)}, [(0, 1), (1, 2), (2, 0)], genus=1)
    assert len(graph.regions) == 2
    assert all(r.trivial for r in graph.regions)
    assert all(not any(walk_homology(graph, w)) for w in graph.walks)


def test_handle_cycle_bounds_an_annulus():
    graph = handle_cycle()
    assert sorted(len(w) for w in graph.walks) == [3, 3]
    assert len(graph.regions) == 1
    assert not graph.regions[0].trivial
    assert tiled_region(graph) == set()
    first, second = graph.walks
    assert adjacent_border_walk(graph, first, 1) == second


def test_portal_edge_crosses_mu_once(trap_graph):
    (crossing,) = trap_graph.edges[0].crossings
    assert crossing.curve_index == 1
    assert crossing.sign == 1
    assert crossing.t == Fraction(1, 4)


def test_trap_gamma_crosses_no_edge(trap_graph):
    assert not any(c.curve_index == 0 for e in trap_graph.edges for c in e.crossings)


def test_trap_walks_and_homology(trap_graph):
    assert [w.darts for w in trap_graph.walks] == [(0, 2, 6, 7, 4), (1, 5, 8, 9, 3)]
    assert walk_homology(trap_graph, trap_graph.walks[0]) == (1, 0)
    assert walk_homology(trap_graph, trap_graph.walks[1]) == (-1, 0)
    assert len(trap_graph.regions) == 1 and not trap_graph.regions[0].trivial


def test_reversed_walk_negates_homology(fig2_graph):
    for walk in fig2_graph.walks:
        backwards = [reverse(d) for d in reversed(walk.darts)]
        assert walk_homology(fig2_graph, backwards) == tuple(-x for x in walk_homology(fig2_graph, walk))


def test_edge_not_on_walk(trap_graph):
    with pytest.raises(EdgeNotOnWalk):
        adjacent_border_walk(trap_graph, trap_graph.walks[0], 4)


def test_crossing_edges_are_rejected(graph_builder):
    with pytest.raises(EdgeCrossing):
        graph_builder({0: (0, 0), 1: (2, 2), 2: (0, 2), 3: (2, 0)}, [(0, 1), (2, 3), (0, 2)])


def test_disconnected_graph_is_rejected(graph_builder):
    with pytest.raises(Disconnected):
        graph_builder({0: (0, 0), 1: (1, 0), 2: (5, 5)}, [(0, 1)])


def test_edge_into_disk_is_rejected(graph_builder):
    with pytest.raises(CurveCollision):
        graph_builder({0: (0, 1), 1: (2, -1)}, [(0, 1)], genus=1)


def test_self_loop_is_rejected():
    nodes = {0: point(0, 0), 1: point(1, 0)}
    with pytest.raises(MalformedChain):
        embed_graph(standard_surface(0), nodes, [EdgeSpec(0, 0, ((nodes[0], point(0, 1), nodes[0]),))])


def test_local_view_lists_ends_clockwise(fig2_graph):
    view = fig2_graph.local_view(4)
    departures = [e.departure for e in view.ends]
    assert departures == sorted(departures, reverse=True)
    assert {e.neighbor for e in view.ends} == {3, 5, 7, 8, 9}
