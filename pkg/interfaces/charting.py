"""
Charting Module
===============
SVG drawings of an instance in its planar representation: disks paired by
colour, lambda connectors, the graph, the connecting curve, the tiled part
shaded, and optionally the agent's traversed edges with numbered MSFR stops.

Output bytes depend only on the inputs: the SVG date stamp is dropped and the
id salt is fixed.
"""

import io
import logging
from typing import List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Circle, Polygon  # noqa: E402

from core.embedded_graph import EmbeddedGraph, Stroke  # noqa: E402
from core.exact import Point  # noqa: E402
from core.models import edge_of  # noqa: E402
from core.regions import face_outlines, leg_locus  # noqa: E402

logger = logging.getLogger(__name__)

SVG_SALT = "gfrsim"
PAIR_COLOURS = plt.get_cmap("tab10")


def _xy(p: Point) -> Tuple[float, float]:
    return float(p[0]), float(p[1])


def stroke_segment(graph: EmbeddedGraph, edge, stroke: Stroke) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """Float end points of a stroke, with portal legs cut at the circle."""
    if not stroke.is_leg:
        return _xy(stroke.start), _xy(stroke.end)
    disk_id, turns = leg_locus(graph.surface, edge, stroke)
    rim = graph.surface.circle_point(disk_id, turns)
    if stroke.end == stroke.hub:
        return _xy(stroke.start), rim
    return rim, _xy(stroke.end)


def _draw_edges(ax, graph: EmbeddedGraph, edge_ids: Sequence[int], **style) -> None:
    for eid in edge_ids:
        edge = graph.edges[eid]
        for stroke in edge.strokes:
            (x1, y1), (x2, y2) = stroke_segment(graph, edge, stroke)
            ax.plot([x1, x2], [y1, y2], **style)


def render_figure(graph: EmbeddedGraph, result=None, title: Optional[str] = None):
    surface = graph.surface
    fig, ax = plt.subplots(figsize=(10, 6))
    ax.set_aspect("equal")
    ax.axis("off")

    trivial = {r.region_id for r in graph.regions if r.trivial}
    for region_id, outline in face_outlines(graph):
        if region_id in trivial:
            ax.add_patch(Polygon([_xy(p) for p in outline], closed=True, facecolor="#d9d9d9",
                                 edgecolor="none", zorder=0))

    for pair in surface.pairs:
        colour = PAIR_COLOURS(pair.index % 10)
        for disk in (pair.first, pair.second):
            patch = Circle(_xy(disk.center), float(disk.radius), facecolor="white", edgecolor=colour,
                           linewidth=1.5, zorder=2)
            patch.set_gid(f"disk-{disk.disk_id}")
            ax.add_patch(patch)
        xs, ys = zip(*(_xy(p) for p in pair.lambda_arc))
        ax.plot(xs, ys, linestyle="--", color=colour, linewidth=1.0, zorder=1)

    _draw_edges(ax, graph, range(len(graph.edges)), color="black", linewidth=1.2, zorder=3)

    if graph.gamma:
        xs, ys = zip(*(_xy(p) for p in graph.gamma))
        ax.plot(xs, ys, color="tab:red", linewidth=1.0, zorder=4)

    if graph.nodes:
        xs, ys = zip(*(_xy(p) for p in graph.nodes.values()))
        ax.scatter(xs, ys, s=12, color="black", zorder=5)
    for label, nid in (("S", graph.source), ("T", graph.target)):
        if nid is not None:
            x, y = _xy(graph.nodes[nid])
            ax.annotate(label, (x, y), textcoords="offset points", xytext=(4, 4), fontsize=9, zorder=6)

    if result is not None:
        walked: List[int] = sorted({edge_of(s.dart) for s in result.trace})
        _draw_edges(ax, graph, walked, color="tab:blue", linewidth=3.0, alpha=0.35, zorder=3)
        for mark in result.stops:
            x, y = _xy(graph.nodes[mark.node])
            ax.scatter([x], [y], marker="*", s=140, color="gold", edgecolor="black", zorder=7)
            ax.annotate(str(mark.index), (x, y), textcoords="offset points", xytext=(6, -10),
                        fontsize=8, zorder=7)

    if title:
        ax.set_title(title)
    ax.autoscale_view()
    return fig


def render_svg(graph: EmbeddedGraph, result=None, title: Optional[str] = None) -> bytes:
    fig = render_figure(graph, result, title)
    buf = io.BytesIO()
    with plt.rc_context({"svg.hashsalt": SVG_SALT}):
        fig.savefig(buf, format="svg", bbox_inches="tight", metadata={"Date": None})
    plt.close(fig)
    logger.debug("rendered %d-byte svg", buf.tell())
    return buf.getvalue()


def save_svg(graph: EmbeddedGraph, path: str, result=None, title: Optional[str] = None) -> None:
    with open(path, "wb") as f:
        f.write(render_svg(graph, result, title))
