"""
Topology Oracle Module
======================
Global ground truth for a routing instance. Nothing here is available to the
agent: it sees whole curves, all border walks and the regions at once.

  * the multigraph Gamma of non-trivial border walks, joined by the pieces of
    reference curves that run through the tiled part of the surface
  * the counting bounds on Gamma and the path from first(gamma) to last(gamma)
  * the intersection pairing on basis curves, walks and formal sums
  * consistency of the agent with all of the above (component following,
    reversibility, DFS visits, memory)
"""

import hashlib
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import sympy

from core.embedded_graph import EmbeddedGraph, Region, walk_homology
from core.errors import GfrError, NoDualCurve, SharedArc
from core.exact import sub, turns_of
from core.models import MsfrStop, dart_of, edge_of, reverse
from core.surface import forward_of, reversed_index
from services.routing_agent import (
    WalkPosition,
    classic_fr,
    gfr,
    msfr,
    msfr_from_source,
    reverse_msfr,
)

logger = logging.getLogger(__name__)

WalkKey = Tuple[int, ...]


# ---------------------------------------------------------------------------
# Gamma
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaEdge:
    start: WalkKey
    end: WalkKey
    curve_index: int
    t_start: Fraction
    t_end: Fraction
    entry: WalkPosition
    arrival: WalkPosition


@dataclass
class GammaGraph:
    vertices: List[WalkKey] = field(default_factory=list)
    edges: List[GammaEdge] = field(default_factory=list)
    first: Optional[WalkKey] = None
    last: Optional[WalkKey] = None

    def __len__(self) -> int:
        return len(self.vertices)

    def star(self) -> "GammaGraph":
        """Gamma without the connecting-curve edges."""
        return GammaGraph(list(self.vertices), [e for e in self.edges if e.curve_index != 0])

    def as_networkx(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(self.vertices)
        for e in self.edges:
            g.add_edge(e.start, e.end, curve=e.curve_index, t_start=e.t_start, t_end=e.t_end)
        return g


@dataclass(frozen=True)
class _Hit:
    t: Fraction
    dart_in: int
    rank: int


def curve_hits(graph: EmbeddedGraph, index: int) -> List[_Hit]:
    """Crossings of a forward curve with G, sorted by t.

    ``dart_in`` is the dart whose left side the curve enters at the crossing.
    """
    hits = []
    for edge in graph.edges:
        m = len(edge.crossings)
        for k, c in enumerate(edge.crossings):
            if c.curve_index != index:
                continue
            if c.sign == -1:
                hits.append(_Hit(c.t, dart_of(edge.edge_id, True), k))
            else:
                hits.append(_Hit(c.t, dart_of(edge.edge_id, False), m - 1 - k))
    hits.sort(key=lambda h: h.t)
    return hits


def _region(graph: EmbeddedGraph, dart: int) -> Region:
    return graph.region_of_walk(graph.walk_of(dart))


def _ends(graph: EmbeddedGraph) -> Tuple[int, int]:
    gamma = graph.gamma
    d_source = graph.first_dart_clockwise_from(graph.source, turns_of(sub(gamma[1], gamma[0])))
    d_target = graph.first_dart_clockwise_from(graph.target, turns_of(sub(gamma[-2], gamma[-1])))
    return d_source, d_target


def gamma_graph(graph: EmbeddedGraph) -> GammaGraph:
    out = GammaGraph()
    out.vertices = [w.key for w in graph.walks if graph.is_ntbw(w)]
    if not out.vertices:
        return out

    has_gamma = graph.route is not None and bool(graph.gamma)
    indices = range(0 if has_gamma else 1, 2 * graph.genus + 1)
    for index in indices:
        closed = index != 0
        hits = curve_hits(graph, index)
        n = len(hits)
        for i, h in enumerate(hits):
            if _region(graph, reverse(h.dart_in)).trivial:
                continue
            j = i
            while _region(graph, hits[j].dart_in).trivial:
                j += 1
                if j == n:
                    if not closed:
                        break
                    j = 0
            if j == n:
                continue
            end = hits[j]
            out.edges.append(GammaEdge(
                start=graph.walk_of(reverse(h.dart_in)).key,
                end=graph.walk_of(end.dart_in).key,
                curve_index=index,
                t_start=h.t,
                t_end=end.t,
                entry=WalkPosition(h.dart_in, h.rank),
                arrival=WalkPosition(end.dart_in, end.rank),
            ))

    if has_gamma:
        d_source, d_target = _ends(graph)
        hits = curve_hits(graph, 0)
        if not _region(graph, d_source).trivial:
            out.first = graph.walk_of(d_source).key
        else:
            hit = next((h for h in hits if not _region(graph, h.dart_in).trivial), None)
            out.first = graph.walk_of(hit.dart_in).key if hit else None
        if not _region(graph, d_target).trivial:
            out.last = graph.walk_of(d_target).key
        else:
            hit = next((h for h in reversed(hits) if not _region(graph, reverse(h.dart_in)).trivial), None)
            out.last = graph.walk_of(reverse(hit.dart_in)).key if hit else None
    logger.debug("gamma graph: %d vertices, %d edges", len(out.vertices), len(out.edges))
    return out


@dataclass
class PropositionReport:
    passed: bool
    ntbw_count: int
    nontrivial_regions: int
    genus: int
    path: List[WalkKey] = field(default_factory=list)
    witness: str = ""


def check_proposition(graph: EmbeddedGraph, gamma: Optional[GammaGraph] = None) -> PropositionReport:
    gamma = gamma if gamma is not None else gamma_graph(graph)
    g = graph.genus
    n = len(gamma.vertices)
    k = sum(1 for r in graph.regions if not r.trivial)
    report = PropositionReport(True, n, k, g)
    problems = []
    if n > 2 * g:
        problems.append(f"|Gamma|={n} exceeds 2g={2 * g}")
    if n - k > g:
        problems.append(f"N-k={n - k} exceeds g={g}")
    if k > g:
        problems.append(f"k={k} exceeds g={g}")
    if gamma.first is not None and gamma.last is not None:
        try:
            report.path = nx.shortest_path(gamma.as_networkx(), gamma.first, gamma.last)
        except nx.NetworkXNoPath:
            problems.append("no Gamma path from first(gamma) to last(gamma)")
    if problems:
        report.passed = False
        report.witness = "; ".join(problems)
    return report


@dataclass
class StarReport:
    passed: bool
    pairs_checked: int
    witness: str = ""


def check_gamma_star(graph: EmbeddedGraph, gamma: Optional[GammaGraph] = None) -> StarReport:
    gamma = gamma if gamma is not None else gamma_graph(graph)
    star = gamma.star().as_networkx()
    checked = 0
    for region in graph.regions:
        if len(region.walks) < 2:
            continue
        keys = [graph.walks[w].key for w in region.walks]
        for i, a in enumerate(keys):
            for b in keys[i + 1:]:
                checked += 1
                if not nx.has_path(star, a, b):
                    return StarReport(False, checked, f"region {region.region_id}: walks {a} and {b} not joined")
    return StarReport(True, checked)


# ---------------------------------------------------------------------------
# Intersection pairing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BasisCycle:
    index: int


@dataclass(frozen=True)
class WalkCycle:
    darts: Tuple[int, ...]


@dataclass(frozen=True)
class FormalSum:
    terms: Tuple[Tuple[int, "Cycle"], ...]


Cycle = Union[BasisCycle, WalkCycle, FormalSum]


def basis_pairing(i: int, j: int, genus: int) -> int:
    """#(b_i, b_j) on the basis and its reversals: #(mu_k, lambda_k) = +1."""
    for idx in (i, j):
        if not 1 <= idx <= 4 * genus:
            raise ValueError(f"{idx} is not a basis curve index for genus {genus}")
    fi, ri = forward_of(i, genus)
    fj, rj = forward_of(j, genus)
    if fi == fj or (fi - 1) % genus != (fj - 1) % genus:
        return 0
    value = 1 if fi <= genus else -1
    return -value if ri != rj else value


def basis_gram(genus: int) -> sympy.Matrix:
    n = 2 * genus
    return sympy.Matrix(n, n, lambda r, c: basis_pairing(r + 1, c + 1, genus))


def _canonical(darts: Sequence[int]) -> Tuple[int, ...]:
    darts = list(darts)
    if not darts:
        return ()
    low = darts.index(min(darts))
    return tuple(darts[low:] + darts[:low])


def _walk_against_basis(graph: EmbeddedGraph, darts: Tuple[int, ...], index: int) -> int:
    fwd, rev = forward_of(index, graph.genus)
    value = walk_homology(graph, darts)[fwd - 1]
    return -value if rev else value


def intersection_number(a: Cycle, b: Cycle, graph: EmbeddedGraph) -> int:
    if isinstance(a, FormalSum):
        return sum(k * intersection_number(c, b, graph) for k, c in a.terms)
    if isinstance(b, FormalSum):
        return sum(k * intersection_number(a, c, graph) for k, c in b.terms)
    g = graph.genus
    if isinstance(a, BasisCycle) and isinstance(b, BasisCycle):
        return basis_pairing(a.index, b.index, g)
    if isinstance(a, WalkCycle) and isinstance(b, BasisCycle):
        return _walk_against_basis(graph, a.darts, b.index)
    if isinstance(a, BasisCycle) and isinstance(b, WalkCycle):
        return -_walk_against_basis(graph, b.darts, a.index)

    if _canonical(a.darts) == _canonical(b.darts):
        return 0
    shared = {edge_of(d) for d in a.darts} & {edge_of(d) for d in b.darts}
    if shared:
        raise SharedArc(f"walks share edge {min(shared)}", witness=f"edges {sorted(shared)}")
    if g == 0:
        return 0
    # through homology coordinates: a = sum x_k b_k with #(a, b_k) = w_k
    gram = basis_gram(g)
    x = gram.T.LUsolve(sympy.Matrix(walk_homology(graph, a.darts)))
    w_b = walk_homology(graph, b.darts)
    value = -sum(x[k] * w_b[k] for k in range(2 * g))
    return int(value)


def region_boundary(graph: EmbeddedGraph, region: Region) -> FormalSum:
    return FormalSum(tuple((1, WalkCycle(graph.walks[w].darts)) for w in region.walks))


@dataclass
class FormReport:
    passed: bool
    rank: int
    homology_checks: int
    bilinear_checks: int
    witness: str = ""


def check_form_properties(graph: EmbeddedGraph, samples: int = 100, seed: int = 0) -> FormReport:
    g = graph.genus
    rng = random.Random(seed)
    gram = basis_gram(g)
    rank = gram.rank() if g else 0
    report = FormReport(True, rank, 0, 0)
    if rank != 2 * g:
        report.passed = False
        report.witness = f"basis Gram matrix has rank {rank}, expected {2 * g}"
        return report
    if gram != -gram.T:
        report.passed = False
        report.witness = "basis Gram matrix is not antisymmetric"
        return report
    if g == 0 or not graph.walks:
        return report

    basis = [BasisCycle(i) for i in range(1, 4 * g + 1)]
    walks = [WalkCycle(w.darts) for w in graph.walks]
    for _ in range(samples):
        beta = rng.choice(walks)
        region = rng.choice(graph.regions)
        sign = rng.choice((1, -1))
        moved = FormalSum(((1, beta), (sign, region_boundary(graph, region))))
        for b in basis[: 2 * g]:
            report.homology_checks += 1
            if intersection_number(moved, b, graph) != intersection_number(beta, b, graph):
                report.passed = False
                report.witness = f"walk {beta.darts} plus a region boundary pairs differently with {b.index}"
                return report

    pool: List[Cycle] = basis + walks
    for _ in range(samples):
        x = FormalSum(tuple((rng.randint(-3, 3), rng.choice(pool)) for _ in range(3)))
        y = FormalSum(tuple((rng.randint(-3, 3), rng.choice(pool)) for _ in range(3)))
        z = rng.choice(basis)
        report.bilinear_checks += 1
        lhs = intersection_number(FormalSum(((1, x), (1, y))), z, graph)
        rhs = intersection_number(x, z, graph) + intersection_number(y, z, graph)
        left = intersection_number(z, FormalSum(((1, x), (1, y))), graph)
        right = intersection_number(z, x, graph) + intersection_number(z, y, graph)
        if lhs != rhs or left != right:
            report.passed = False
            report.witness = f"bilinearity fails against basis curve {z.index}"
            return report
    return report


@dataclass
class CappingReport:
    passed: bool
    dual_index: int
    m: int
    identities: Dict[int, int] = field(default_factory=dict)
    sides_ok: Optional[bool] = None
    witness: str = ""


def _changes_sides(graph: EmbeddedGraph, beta: WalkCycle, eta: int) -> bool:
    """Whether two cyclically consecutive crossings of eta with beta have equal sign."""
    fwd, rev = forward_of(eta, graph.genus)
    marks: List[Tuple[Fraction, int]] = []
    for d in beta.darts:
        for c in graph.dart_crossings(d):
            if c.curve_index == fwd:
                # the crossing sign on a dart is #(edge, curve); flip to #(curve, edge)
                marks.append((c.t, c.sign if rev else -c.sign))
    marks.sort()
    signs = [s for _, s in marks]
    if rev:
        signs.reverse()
    return any(signs[i] == signs[(i + 1) % len(signs)] for i in range(len(signs))) if signs else False


def check_capping_identity(graph: EmbeddedGraph, beta: Cycle) -> CappingReport:
    g = graph.genus
    basis = [BasisCycle(i) for i in range(1, 2 * g + 1)]
    pairings = {b.index: intersection_number(b, beta, graph) for b in basis}
    dual = next((i for i, v in pairings.items() if v != 0), None)
    if dual is None:
        raise NoDualCurve("cycle pairs to zero with every basis curve")
    m = pairings[dual]
    report = CappingReport(True, dual, m)
    for alpha in basis:
        combo = FormalSum(((m, alpha), (-pairings[alpha.index], BasisCycle(dual))))
        value = intersection_number(combo, beta, graph)
        report.identities[alpha.index] = value
        if value != 0:
            report.passed = False
            report.witness = f"identity fails for basis curve {alpha.index}: {value}"
    if isinstance(beta, WalkCycle):
        report.sides_ok = all(_changes_sides(graph, beta, i) for i, v in pairings.items() if v != 0)
        if not report.sides_ok:
            report.passed = False
            report.witness = report.witness or "no component of the dual curve changes sides"
    return report


@dataclass
class EquivalenceReport:
    agree: int
    disagree: int
    disagreements: List[WalkKey] = field(default_factory=list)


def homology_ntbws(graph: EmbeddedGraph) -> List[WalkKey]:
    return [w.key for w in graph.walks if any(walk_homology(graph, w))]


def ntbw_equivalence_report(graph: EmbeddedGraph) -> EquivalenceReport:
    report = EquivalenceReport(0, 0)
    for w in graph.walks:
        by_region = graph.is_ntbw(w)
        by_homology = any(walk_homology(graph, w))
        if by_region == by_homology:
            report.agree += 1
        else:
            report.disagree += 1
            report.disagreements.append(w.key)
    return report


# ---------------------------------------------------------------------------
# Agent consistency
# ---------------------------------------------------------------------------

def _own_t(index: int, genus: int, t: Fraction) -> Fraction:
    _, rev = forward_of(index, genus)
    if not rev:
        return t
    return 1 - t if index == 4 * genus + 1 else (1 - t) % 1


def check_components(graph: EmbeddedGraph, gamma: Optional[GammaGraph] = None,
                     through_target: bool = True) -> Tuple[bool, int, str]:
    """MSFR follows every Gamma edge and reverse MSFR brings it back.

    With ``through_target`` the runs ignore T, so every component is followed
    from end to end. Otherwise a run that meets T is accepted as it stands.
    """
    gamma = gamma if gamma is not None else gamma_graph(graph)
    homology = set(homology_ntbws(graph))
    checked = 0
    for e in gamma.edges:
        if e.start not in homology or e.end not in homology:
            continue
        checked += 1
        forward = msfr(graph, e.curve_index, e.entry, e.t_start, stop_at_target=not through_target)
        if forward.stop is MsfrStop.REACHED_T:
            continue
        if forward.walk_key != e.end or forward.position != e.arrival:
            return False, checked, f"curve {e.curve_index} from t={e.t_start} stopped at t={forward.triple.t_end}"
        back = reverse_msfr(graph, forward.triple, forward.position, stop_at_target=not through_target)
        if back.stop is MsfrStop.REACHED_T:
            continue
        back_index = reversed_index(e.curve_index, graph.genus)
        if (back.walk_key != e.start
                or back.triple.t_end != _own_t(back_index, graph.genus, e.t_start)):
            return False, checked, f"reverse run along curve {back_index} did not return to t={e.t_start}"
    return True, checked, ""


def _matches_edge(triple, genus: int, edges: List[GammaEdge]) -> bool:
    fwd, rev = forward_of(triple.curve_index, genus)
    for e in edges:
        if e.curve_index != fwd:
            continue
        if not rev and (e.t_start, e.t_end) == (triple.t_start, triple.t_end):
            return True
        if rev and (_own_t(triple.curve_index, genus, e.t_end), _own_t(triple.curve_index, genus, e.t_start)) == (
                triple.t_start, triple.t_end):
            return True
    return False


def check_agent(graph: EmbeddedGraph, gamma: Optional[GammaGraph] = None) -> List[Tuple[str, bool, str]]:
    """(check id, passed, witness) rows for one GFR run on the instance."""
    gamma = gamma if gamma is not None else gamma_graph(graph)
    rows: List[Tuple[str, bool, str]] = []
    result = gfr(graph)
    rows.append(("gfr_delivers", result.delivered,
                 "" if result.delivered else f"outcome {result.outcome.value}"))

    homology = set(homology_ntbws(graph))
    strays = [k for k in result.ntbw_visits if k not in homology]
    rows.append(("agent_stops_nontrivial", not strays, f"stopped on null walks {strays}" if strays else ""))

    agreement = ntbw_equivalence_report(graph)
    if agreement.disagree:
        rows.append(("gfr_gamma_walk", True, f"skipped: classifiers disagree on {agreement.disagree} walks"))
    else:
        bad = [t for t in result.triples[1:] if not _matches_edge(t, graph.genus, gamma.edges)]
        root_ok = not result.triples or result.ntbw_visits[0] == gamma.first
        ok = not bad and root_ok
        rows.append(("gfr_gamma_walk", ok, "" if ok else f"triples off Gamma: {bad}; root ok={root_ok}"))

    ok = result.peak_memory_bits <= result.memory_ceiling_bits and len(result.triples) <= 4 * graph.genus
    rows.append(("memory_ceiling", ok,
                 f"{result.peak_memory_bits} bits, ceiling {result.memory_ceiling_bits:.1f}" if not ok else ""))

    allowed = {graph.source} | {s.head for s in result.trace}
    rogue = sorted(set(result.query_log) - allowed)
    rows.append(("locality", not rogue, f"queried {rogue}" if rogue else ""))

    if graph.genus == 0:
        plain = msfr_from_source(graph)
        same = [(s.dart, s.node) for s in plain.trace] == [(s.dart, s.node) for s in result.trace]
        rows.append(("genus0_trace", same, "" if same else "gfr and msfr traces differ"))
        fr = classic_fr(graph)
        rows.append(("genus0_fr", fr.delivered, "" if fr.delivered else f"fr {fr.outcome.value}"))
    return rows


# ---------------------------------------------------------------------------
# Bundled records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckRecord:
    check_id: str
    instance_hash: str
    passed: bool
    witness: str = ""
    hard: bool = True

    def to_dict(self) -> Dict:
        return {
            "check_id": self.check_id,
            "instance_hash": self.instance_hash,
            "passed": "true" if self.passed else "false",
            "witness": self.witness,
        }


def instance_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def run_checks(graph: EmbeddedGraph, digest: str = "", samples: int = 25, seed: int = 0) -> List[CheckRecord]:
    records: List[CheckRecord] = []

    def add(check_id: str, passed: bool, witness: str = "", hard: bool = True) -> None:
        records.append(CheckRecord(check_id, digest, passed, witness, hard))
        if not passed:
            logger.info("check %s failed: %s", check_id, witness)

    gamma = gamma_graph(graph)
    prop = check_proposition(graph, gamma)
    add("proposition", prop.passed,
        prop.witness or f"N={prop.ntbw_count} k={prop.nontrivial_regions} path={len(prop.path)}")
    star = check_gamma_star(graph, gamma)
    add("gamma_star", star.passed, star.witness or f"{star.pairs_checked} pairs")
    form = check_form_properties(graph, samples, seed)
    add("form_properties", form.passed, form.witness or f"rank={form.rank}")

    nonnull = [w for w in graph.walks if any(walk_homology(graph, w))]
    if graph.genus == 0:
        add("capping_identity", True, "vacuous")
    else:
        beta: Cycle = WalkCycle(nonnull[0].darts) if nonnull else BasisCycle(1)
        try:
            cap = check_capping_identity(graph, beta)
            add("capping_identity", cap.passed, cap.witness or f"dual={cap.dual_index} m={cap.m}")
        except NoDualCurve as exc:
            add("capping_identity", False, str(exc))

    equivalence = ntbw_equivalence_report(graph)
    add("ntbw_equivalence", True, f"agree={equivalence.agree} disagree={equivalence.disagree}", hard=False)

    if graph.route is not None:
        try:
            ok, checked, witness = check_components(graph, gamma)
            add("component_following", ok, witness or f"{checked} components")
            for check_id, passed, witness in check_agent(graph, gamma):
                add(check_id, passed, witness)
        except GfrError as exc:
            add("agent", False, f"{type(exc).__name__}: {exc}")
    return records


def all_passed(records: Sequence[CheckRecord]) -> bool:
    return all(r.passed for r in records if r.hard)