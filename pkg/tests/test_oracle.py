from fractions import Fraction
from functools import lru_cache

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from core.embedded_graph import embed_graph
from core.errors import GenerationExhausted, NoDualCurve, SharedArc
from core.exact import point
from core.models import EdgeSpec, Portal
from services.instance_kit import fr_trap, random_instance, standard_surface
from services.oracle import (
    BasisCycle,
    FormalSum,
    WalkCycle,
    all_passed,
    basis_gram,
    check_capping_identity,
    check_components,
    check_form_properties,
    check_gamma_star,
    check_proposition,
    gamma_graph,
    instance_hash,
    intersection_number,
    ntbw_equivalence_report,
    run_checks,
)
from services.routing_agent import gfr

TRAP_WALKS = [(0, 2, 6, 7, 4), (1, 5, 8, 9, 3)]
FIG2_A = (0, 2, 14, 15, 4)
FIG2_B = (1, 5, 3, 12, 11, 9, 7, 13)
FIG2_C = (6, 8, 21, 19, 17, 10)
FIG2_D = (16, 18, 20, 22, 23)


def test_planar_gamma_graph_is_empty(planar_routed):
    gamma = gamma_graph(planar_routed)
    assert len(gamma) == 0
    assert gamma.first is None and gamma.last is None
    report = check_proposition(planar_routed)
    assert report.passed and report.ntbw_count == 0


def test_contractible_triangle_has_no_ntbw(graph_builder):
    graph = graph_builder({0: (0, 2), 1: (2, 2), 2: (1, 3)}, [(0, 1), (1, 2), (2, 0)], genus=1)
    assert len(gamma_graph(graph)) == 0


def test_trap_gamma_graph(trap_graph):
    gamma = gamma_graph(trap_graph)
    assert gamma.vertices == TRAP_WALKS
    assert gamma.first == TRAP_WALKS[0]
    assert gamma.last == TRAP_WALKS[1]
    assert any(e.curve_index == 1 for e in gamma.edges)
    assert gamma.as_networkx().number_of_nodes() == 2


def test_trap_proposition(trap_graph):
    report = check_proposition(trap_graph)
    assert report.passed
    assert (report.ntbw_count, report.nontrivial_regions) == (2, 1)
    assert report.path == TRAP_WALKS


def test_fig2_walks_and_regions(fig2_graph):
    keys = {w.darts for w in fig2_graph.walks}
    assert keys == {FIG2_A, FIG2_B, FIG2_C, FIG2_D}
    trivial = [fig2_graph.walks[w].darts for r in fig2_graph.regions if r.trivial for w in r.walks]
    assert trivial == [FIG2_D]


def test_fig2_gamma_graph(fig2_graph):
    gamma = gamma_graph(fig2_graph)
    assert sorted(gamma.vertices) == sorted([FIG2_A, FIG2_B, FIG2_C])
    assert gamma.first == FIG2_A
    assert gamma.last == FIG2_C
    assert len(gamma) <= 2 * fig2_graph.genus
    gamma_edges = {(e.start, e.end) for e in gamma.edges if e.curve_index == 0}
    assert gamma_edges == {(FIG2_A, FIG2_B), (FIG2_B, FIG2_C)}


def test_fig2_proposition(fig2_graph):
    report = check_proposition(fig2_graph)
    assert report.passed
    assert report.ntbw_count - report.nontrivial_regions == 2
    assert report.path[0] == FIG2_A and report.path[-1] == FIG2_C


def test_gamma_star_joins_region_walks(trap_graph, fig2_graph):
    assert check_gamma_star(trap_graph).passed
    fig2 = check_gamma_star(fig2_graph)
    assert fig2.passed and fig2.pairs_checked == 3


def test_basis_pairings(trap_graph):
    assert intersection_number(BasisCycle(1), BasisCycle(1), trap_graph) == 0
    assert intersection_number(BasisCycle(1), BasisCycle(2), trap_graph) == 1
    assert intersection_number(BasisCycle(2), BasisCycle(1), trap_graph) == -1
    assert basis_gram(1) == sympy.Matrix([[0, 1], [-1, 0]])
    assert basis_gram(3).rank() == 6


def test_mu_and_other_lambda_are_disjoint(fig2_graph):
    assert intersection_number(BasisCycle(1), BasisCycle(6), fig2_graph) == 0


def test_reversal_negates_pairing(fig2_graph):
    # index 9 is mu_1 reversed for genus 4
    assert intersection_number(BasisCycle(9), BasisCycle(5), fig2_graph) == -1


def test_walk_pairings(trap_graph):
    first, second = (WalkCycle(d) for d in TRAP_WALKS)
    assert intersection_number(first, BasisCycle(1), trap_graph) == 1
    assert intersection_number(BasisCycle(1), first, trap_graph) == -1
    assert intersection_number(first, first, trap_graph) == 0
    with pytest.raises(SharedArc):
        intersection_number(first, second, trap_graph)


def test_formal_sums_are_linear(trap_graph):
    walk = WalkCycle(TRAP_WALKS[0])
    total = FormalSum(((2, walk), (-1, BasisCycle(2))))
    expected = 2 * intersection_number(walk, BasisCycle(1), trap_graph) - intersection_number(
        BasisCycle(2), BasisCycle(1), trap_graph)
    assert intersection_number(total, BasisCycle(1), trap_graph) == expected


def test_form_properties(trap_graph, fig2_graph):
    torus = check_form_properties(trap_graph, samples=20, seed=1)
    assert torus.passed and torus.rank == 2
    genus4 = check_form_properties(fig2_graph, samples=20, seed=2)
    assert genus4.passed and genus4.rank == 8
    assert genus4.bilinear_checks == 20


def test_capping_identity_on_mu(trap_graph):
    report = check_capping_identity(trap_graph, BasisCycle(1))
    assert report.passed
    assert report.dual_index == 2
    assert report.m == -1
    assert set(report.identities.values()) == {0}


def test_capping_identity_on_a_walk(trap_graph):
    report = check_capping_identity(trap_graph, WalkCycle(TRAP_WALKS[0]))
    assert report.passed
    assert report.sides_ok


def test_null_homologous_cycle_has_no_dual(graph_builder):
    graph = graph_builder({0: (0, 2), 1: (2, 2), 2: (1, 3)}, [(0, 1), (1, 2), (2, 0)], genus=1)
    with pytest.raises(NoDualCurve):
        check_capping_identity(graph, WalkCycle(graph.walks[0].darts))


def test_ntbw_classifiers_agree(trap_graph, planar_triangle):
    report = ntbw_equivalence_report(trap_graph)
    assert (report.agree, report.disagree) == (2, 0)
    planar = ntbw_equivalence_report(planar_triangle)
    assert planar.disagree == 0


def test_run_checks_on_the_trap(trap_graph):
    records = run_checks(trap_graph, instance_hash("trap"), samples=10)
    assert all_passed(records)
    ids = [r.check_id for r in records]
    assert ids[:3] == ["proposition", "gamma_star", "form_properties"]
    assert "gfr_delivers" in ids and "locality" in ids
    assert records[0].to_dict()["instance_hash"] == instance_hash("trap")


def test_run_checks_on_a_plane(planar_routed):
    records = run_checks(planar_routed, samples=5)
    assert all_passed(records)
    assert {"genus0_trace", "genus0_fr"} <= {r.check_id for r in records}


def test_instance_hash_is_sha256():
    assert instance_hash("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


def test_components_are_followed_through_the_target(trap_graph):
    ok, checked, witness = check_components(trap_graph)
    assert ok, witness
    assert checked > 0
    assert check_components(trap_graph, through_target=False)[0]


def two_annuli():
    """Cycles through handles 0 and 1, joined by a rectangle around handle 0."""
    a, b, m, c1, m2, c3, c2, a2, b2 = range(9)
    nodes = {a: point(1, 2), b: point(3, 2), m: point(2, 3), c1: point(0, 3), m2: point(4, 3),
             c3: point(4, -1), c2: point(0, -1), a2: point(5, 2), b2: point(7, 2)}
    edges = [
        EdgeSpec(a, b, ((nodes[a], point(1, 1)), (point(3, 1), nodes[b])), (Portal(0, Fraction(1, 4)),)),
        EdgeSpec(a2, b2, ((nodes[a2], point(5, 1)), (point(7, 1), nodes[b2])), (Portal(2, Fraction(1, 4)),)),
    ]
    edges += [EdgeSpec(u, v, ((nodes[u], nodes[v]),)) for u, v in [
        (b, m), (m, a), (c1, m), (m, m2), (m2, c3), (c3, c2), (c2, c1), (b2, m2), (m2, a2)]]
    return embed_graph(standard_surface(2), nodes, edges)


def test_gamma_star_on_two_annular_regions():
    graph = two_annuli()
    assert len(graph.walks) == 4
    assert all(graph.is_ntbw(w) for w in graph.walks)
    assert [len(r.walks) for r in graph.regions if not r.trivial] == [2, 2]
    report = check_gamma_star(graph)
    assert report.passed, report.witness
    assert report.pairs_checked == 2


@lru_cache(maxsize=None)
def genus3_trap():
    _, graph = fr_trap(3).build()
    return graph


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(min_value=-3, max_value=3), min_size=6, max_size=6).filter(any))
def test_capping_identity_on_random_genus3_sums(coefficients):
    graph = genus3_trap()
    beta = FormalSum(tuple((k, BasisCycle(i)) for i, k in enumerate(coefficients, start=1) if k))
    report = check_capping_identity(graph, beta)
    assert report.passed, report.witness
    assert len(report.identities) == 6
    assert set(report.identities.values()) == {0}


@pytest.mark.parametrize("genus", [0, 1, 2, 3, 4])
@pytest.mark.parametrize("seed", [1, 2])
def test_small_random_corpus(genus: int, seed: int):
    try:
        instance = random_instance(genus, 10, seed=seed)
    except GenerationExhausted:
        pytest.skip(f"seed {seed} yields no genus {genus} instance")
    _, graph = instance.build()
    gamma = gamma_graph(graph)

    assert gfr(graph).delivered
    assert len(gamma) <= 2 * genus
    report = check_proposition(graph, gamma)
    assert report.ntbw_count - report.nontrivial_regions <= genus
    assert report.nontrivial_regions <= genus
    ok, _, witness = check_components(graph, gamma)
    assert ok, witness
    records = run_checks(graph, samples=5)
    assert all_passed(records), [r.witness for r in records if not r.passed]
