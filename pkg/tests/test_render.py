from interfaces.charting import render_svg, save_svg
from services.routing_agent import gfr


def test_svg_is_deterministic(trap_graph):
    assert render_svg(trap_graph) == render_svg(trap_graph)


def test_fig2_draws_every_disk(fig2_graph):
    svg = render_svg(fig2_graph).decode("utf-8")
    for disk_id in range(8):
        assert f'id="disk-{disk_id}"' in svg


def test_plane_has_no_disks(planar_routed):
    svg = render_svg(planar_routed).decode("utf-8")
    assert "disk-" not in svg


def test_trace_overlay_changes_the_drawing(trap_graph):
    plain = render_svg(trap_graph)
    traced = render_svg(trap_graph, gfr(trap_graph))
    assert plain != traced
    assert render_svg(trap_graph, gfr(trap_graph)) == traced


def test_save_svg(tmp_path, fig2_graph):
    path = tmp_path / "fig2.svg"
    save_svg(fig2_graph, str(path), title="fig2")
    assert path.read_bytes().lstrip().startswith(b"<?xml")
