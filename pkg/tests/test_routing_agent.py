import math
from fractions import Fraction

import pytest

from core.config import SimSettings
from core.errors import StepBudgetExceeded
from core.models import FailureReason, MsfrStop, Outcome, Phase, Triple
from core.surface import reversed_index
from services.oracle import gamma_graph
from services.routing_agent import (
    WalkPosition,
    classic_fr,
    clog2,
    gfr,
    memory_bits,
    memory_ceiling,
    meter_report,
    msfr,
    msfr_from_source,
    reverse_msfr,
)


def test_clog2():
    assert [clog2(x) for x in (1, 2, 3, 4, 5, 1024, 1025)] == [0, 1, 2, 2, 3, 10, 11]


def test_memory_grows_with_triples():
    base = memory_bits(2, 0, 3, 16, 20)
    assert memory_bits(2, 1, 3, 16, 20) > base
    assert memory_bits(0, 0, 0, 16, 1) >= 0


def test_memory_ceiling_formula():
    assert memory_ceiling(SimSettings(), 1, 6) == pytest.approx(16 * 2 * math.log2(98))


def test_planar_msfr_reaches_target(planar_routed):
    outcome = msfr_from_source(planar_routed)
    assert outcome.stop is MsfrStop.REACHED_T
    assert outcome.triple is None
    assert outcome.traversal_count >= 1


def test_planar_gfr_matches_msfr_trace(planar_routed):
    result = gfr(planar_routed)
    plain = msfr_from_source(planar_routed)
    assert result.delivered
    assert [(s.dart, s.node) for s in result.trace] == [(s.dart, s.node) for s in plain.trace]
    assert result.triples == []
    assert result.ntbw_count == 0


def test_planar_classic_fr_delivers(planar_routed):
    result = classic_fr(planar_routed)
    assert result.outcome is Outcome.DELIVERED
    assert result.algorithm == "fr"
    assert all(s.phase is Phase.FR for s in result.trace)


def test_trap_defeats_classic_fr(trap_graph):
    result = classic_fr(trap_graph)
    assert result.outcome is Outcome.FAILED
    assert result.reason is FailureReason.LOOP_DETECTED
    assert result.traversal_count == 5


def test_trap_gfr_delivers(trap_graph):
    result = gfr(trap_graph)
    assert result.delivered
    assert result.traversal_count == 11
    assert result.triples == [Triple(0, Fraction(0), Fraction(0))]
    assert result.ntbw_count == 1
    assert result.peak_memory_bits <= result.memory_ceiling_bits


def test_trap_msfr_stops_at_the_first_annulus_walk(trap_graph):
    outcome = msfr_from_source(trap_graph)
    assert outcome.stop is MsfrStop.STOPPED_AT_NTBW
    assert outcome.walk_key == (0, 2, 6, 7, 4)
    assert outcome.traversal_count == 5


def test_trace_lines_are_well_formed(trap_graph):
    line = gfr(trap_graph).trace[0].line()
    assert line.startswith("step=1 node=3 edge=3->1 phase=MSFR counters=")


def test_agent_queries_only_visited_nodes(fig2_graph):
    result = gfr(fig2_graph)
    visited = {fig2_graph.source} | {s.head for s in result.trace}
    assert set(result.query_log) <= visited


def test_fig2_gfr_hops_walks(fig2_graph):
    result = gfr(fig2_graph)
    assert result.delivered
    assert result.ntbw_count == 3
    assert len(result.triples) == 3
    assert len(result.stops) >= 2
    assert result.ntbw_count <= 2 * fig2_graph.genus
    assert result.traversal_count <= SimSettings().step_budget(4, len(fig2_graph.nodes))


def test_fig2_classic_fr_delivers(fig2_graph):
    assert classic_fr(fig2_graph).delivered


def test_msfr_is_reversible(fig2_graph):
    gamma = gamma_graph(fig2_graph)
    for edge in gamma.edges:
        forward = msfr(fig2_graph, edge.curve_index, edge.entry, edge.t_start)
        assert forward.stop is MsfrStop.STOPPED_AT_NTBW
        assert forward.walk_key == edge.end
        back = reverse_msfr(fig2_graph, forward.triple, forward.position)
        assert back.stop is MsfrStop.STOPPED_AT_NTBW
        assert back.walk_key == edge.start
        assert back.triple.curve_index == reversed_index(edge.curve_index, fig2_graph.genus)


def test_budget_exhaustion_fails(trap_graph):
    result = classic_fr(trap_graph, step_budget=2)
    assert result.outcome is Outcome.FAILED
    assert result.reason is FailureReason.BUDGET_EXCEEDED
    assert result.traversal_count == 2


def test_meter_report_fields(trap_graph):
    report = meter_report(gfr(trap_graph))
    assert report["traversal_count"] == 11
    assert report["ntbw_count"] == 1
    assert report["triples_recorded"] == 1
    assert report["peak_memory_bits"] <= report["memory_ceiling_bits"]


def test_walk_position_defaults_before_all_crossings():
    assert WalkPosition(4).rank == -1


def test_gfr_raises_when_the_budget_runs_out(trap_graph):
    with pytest.raises(StepBudgetExceeded):
        gfr(trap_graph, SimSettings(step_budget_factor=0))


def test_msfr_can_run_through_the_target(trap_graph):
    first, second = (0, 2, 6, 7, 4), (1, 5, 8, 9, 3)
    edge = next(e for e in gamma_graph(trap_graph).edges if e.curve_index == 1 and e.start == first)
    assert msfr(trap_graph, 1, edge.entry, edge.t_start).stop is MsfrStop.REACHED_T

    forward = msfr(trap_graph, 1, edge.entry, edge.t_start, stop_at_target=False)
    assert forward.stop is MsfrStop.STOPPED_AT_NTBW
    assert forward.walk_key == second
    assert forward.position == edge.arrival

    back = reverse_msfr(trap_graph, forward.triple, forward.position, stop_at_target=False)
    assert back.stop is MsfrStop.STOPPED_AT_NTBW
    assert back.walk_key == first
    assert back.triple.curve_index == reversed_index(1, trap_graph.genus)
    assert back.triple.t_end == 1 - edge.t_start
