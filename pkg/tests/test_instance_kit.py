from fractions import Fraction

import pytest

from core.errors import ParseError, VersionMismatch
from core.models import RouteSpec
from services.instance_kit import (
    fig2_instance,
    fr_trap,
    load,
    random_instance,
    save,
    standard_surface,
)
from services.oracle import all_passed, check_proposition, run_checks
from storage.instance_file import FORMAT_VERSION, instance_text, loads


@pytest.mark.parametrize("genus", [0, 1, 3])
def test_standard_surface(genus: int):
    surface = standard_surface(genus)
    assert surface.genus == genus
    assert len(surface.disks) == 2 * genus
    assert all(d.radius == Fraction(1, 2) for d in surface.disks)


def test_smallest_random_instance():
    instance = random_instance(0, 2, seed=5)
    assert len(instance.nodes) == 2
    assert len(instance.edges) == 1
    _, graph = instance.build()
    assert graph.source != graph.target


def test_random_instance_needs_two_nodes():
    with pytest.raises(ValueError):
        random_instance(1, 1, seed=0)


def test_random_instance_is_deterministic():
    first = instance_text(random_instance(1, 12, seed=7))
    second = instance_text(random_instance(1, 12, seed=7))
    assert first == second
    assert first != instance_text(random_instance(1, 12, seed=8))


@pytest.mark.parametrize("genus,seed", [(1, 3), (2, 11)])
def test_random_instances_validate_and_pass_the_oracle(genus: int, seed: int):
    instance = random_instance(genus, 16, seed=seed)
    _, graph = instance.build()
    assert len(graph.nodes) == 16
    assert check_proposition(graph).passed
    records = run_checks(graph, samples=5)
    assert all_passed(records), [(r.check_id, r.witness) for r in records if not r.passed]


def test_random_instance_has_portal_edges():
    instance = random_instance(2, 14, seed=1)
    assert any(e.portals for e in instance.edges)


def test_trap_needs_a_handle():
    with pytest.raises(ValueError):
        fr_trap(0)


def test_trap_on_higher_genus_builds():
    _, graph = fr_trap(2).build()
    assert graph.genus == 2
    assert len(graph.walks) == 2


def test_fig2_shape():
    instance = fig2_instance()
    assert instance.genus == 4
    assert instance.generator == "fig2"
    _, graph = instance.build()
    assert sum(1 for w in graph.walks if graph.is_ntbw(w)) == 3


@pytest.mark.parametrize("make", [fr_trap, fig2_instance, lambda: random_instance(1, 10, seed=2)])
def test_save_load_is_byte_identical(tmp_path, make):
    instance = make()
    path = tmp_path / "instance.yaml"
    save(instance, str(path))
    again = load(str(path))
    assert instance_text(again) == path.read_text(encoding="utf-8")
    assert again.nodes == instance.nodes
    assert again.edges == instance.edges
    assert again.route == instance.route


def test_rationals_are_written_as_p_over_q():
    text = instance_text(fr_trap())
    assert "format_version: 1" in text
    assert "3/2" in text
    assert "angle: 1/4" in text
    assert "0.5" not in text


def test_route_without_gamma_gets_a_connecting_curve():
    instance = fig2_instance()
    instance.route = RouteSpec(instance.route.source, instance.route.target)
    _, graph = instance.build()
    assert graph.gamma == (graph.nodes[6], graph.nodes[9])
    assert graph.gamma[0] == graph.nodes[graph.source]
    assert graph.gamma[-1] == graph.nodes[graph.target]


def test_unknown_version_is_rejected():
    text = instance_text(fr_trap()).replace(f"format_version: {FORMAT_VERSION}", "format_version: 9")
    with pytest.raises(VersionMismatch):
        loads(text)


def test_parse_error_carries_position():
    text = instance_text(fr_trap())
    lines = text.splitlines()
    row = next(i for i, line in enumerate(lines) if "radius" in line)
    lines[row] = lines[row].replace("1/2", "half")
    with pytest.raises(ParseError) as caught:
        loads("\n".join(lines) + "\n")
    assert caught.value.line == row + 1
    assert caught.value.column > 1


def test_malformed_yaml_is_a_parse_error():
    with pytest.raises(ParseError) as caught:
        loads("format_version: 1\ngraph: [unclosed\n")
    assert caught.value.line >= 2


def test_missing_section_is_a_parse_error():
    with pytest.raises(ParseError):
        loads("format_version: 1\nsurface: {pairs: []}\n")


def test_empty_file_is_a_parse_error():
    with pytest.raises(ParseError):
        loads("")
