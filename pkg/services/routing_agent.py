"""
Routing Agent Module
====================
A walking agent that reads only the LocalView of the node it stands on.
Implements classic face routing, MSFR along any curve of the reference list,
reverse MSFR and the full GFR depth-first search over non-trivial border
walks. Every directed edge traversal is counted and traced; memory is
accounted in bits from the triple list, the homology counters and a fixed
set of registers.

Positions on a border walk are (dart, rank): the agent stands at the tail of
the dart, just past the crossing with that rank (-1: before all of them).
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import log2
from typing import Callable, Dict, List, Optional, Tuple

from core.config import SimSettings
from core.embedded_graph import DartCrossing, EmbeddedGraph, LocalView
from core.errors import NoFurtherCrossing, StepBudgetExceeded
from core.exact import sub, turns_of
from core.models import (
    FailureReason,
    MsfrStop,
    Outcome,
    Phase,
    StopMark,
    TraceStep,
    Triple,
    reverse,
)
from core.surface import forward_of, reversed_index

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WalkPosition:
    dart: int
    rank: int = -1


class LocalityGuard:
    """Hands out the LocalView of the agent's current node, and nothing else."""

    def __init__(self, graph: EmbeddedGraph, start: int):
        self._graph = graph
        self._cache: Dict[int, LocalView] = {}
        self.position = start
        self.queries: List[int] = []

    def view(self) -> LocalView:
        self.queries.append(self.position)
        view = self._cache.get(self.position)
        if view is None:
            view = self._graph.local_view(self.position)
            self._cache[self.position] = view
        return view

    def move(self, neighbor: int) -> None:
        if neighbor not in {e.neighbor for e in self.view().ends}:
            raise RuntimeError(f"node {neighbor} is not adjacent to {self.position}")
        self.position = neighbor


class _Arrived(Exception):
    pass


def clog2(x: int) -> int:
    """ceil(log2(x)) for x >= 1."""
    return (x - 1).bit_length()


def memory_bits(genus: int, triples: int, max_crossings: int, crossing_bound: int, edges: int) -> int:
    t_bits = clog2(max_crossings + 1)
    triple_bits = clog2(4 * genus + 1) + 2 * t_bits
    counters = 2 * genus * clog2(2 * crossing_bound * edges + 1)
    registers = clog2(4 * genus + 2) + 3 * t_bits + triple_bits + clog2(2 * edges + 1)
    return triples * triple_bits + counters + registers


def memory_ceiling(settings: SimSettings, genus: int, nodes: int) -> float:
    return settings.memory_constant * (genus + 1) * log2(nodes * settings.crossing_bound + 2)


def own_view(curve: int, genus: int, c: DartCrossing) -> Optional[Tuple[Fraction, int]]:
    """t and sign of a crossing as seen by ``curve``, or None if it is another curve."""
    fwd, rev = forward_of(curve, genus)
    if c.curve_index != fwd:
        return None
    if not rev:
        return c.t, c.sign
    t = 1 - c.t if fwd == 0 else (1 - c.t) % 1
    return t, -c.sign


@dataclass
class MsfrOutcome:
    stop: MsfrStop
    triple: Optional[Triple]
    position: Optional[WalkPosition]
    walk_key: Tuple[int, ...] = ()
    trace: List[TraceStep] = field(default_factory=list)
    traversal_count: int = 0


@dataclass
class RouteResult:
    outcome: Outcome
    reason: Optional[FailureReason] = None
    trace: List[TraceStep] = field(default_factory=list)
    traversal_count: int = 0
    peak_memory_bits: int = 0
    memory_ceiling_bits: float = 0.0
    ntbw_visits: List[Tuple[int, ...]] = field(default_factory=list)
    triples: List[Triple] = field(default_factory=list)
    stops: List[StopMark] = field(default_factory=list)
    query_log: List[int] = field(default_factory=list)
    algorithm: str = "gfr"

    @property
    def delivered(self) -> bool:
        return self.outcome is Outcome.DELIVERED

    @property
    def ntbw_count(self) -> int:
        return len(set(self.ntbw_visits))

    def to_dict(self) -> Dict:
        return {
            "algorithm": self.algorithm,
            "outcome": self.outcome.value,
            "reason": self.reason.value if self.reason else "",
            "traversal_count": self.traversal_count,
            "peak_memory_bits": self.peak_memory_bits,
            "memory_ceiling_bits": round(self.memory_ceiling_bits, 2),
            "ntbw_count": self.ntbw_count,
            "triples": len(self.triples),
        }


class Agent:
    def __init__(self, graph: EmbeddedGraph, start: int, settings: Optional[SimSettings] = None,
                 budget: Optional[int] = None, stop_at_target: bool = True):
        self.settings = settings or graph.settings
        self.genus = graph.genus
        self.gamma = graph.gamma
        self.source = graph.source
        # None: walk through T like any other node
        self.target = graph.target if stop_at_target else None
        self.guard = LocalityGuard(graph, start)
        self.budget = budget or self.settings.step_budget(graph.genus, len(graph.nodes))
        self.steps = 0
        self.phase = Phase.MSFR
        self.counters: Tuple[int, ...] = (0,) * (2 * self.genus)
        self.trace: List[TraceStep] = []
        self.triples: List[Triple] = []
        self.peak_triples = 0
        self.stops: List[Tuple[WalkPosition, Optional[Triple]]] = []

    @property
    def at(self) -> int:
        return self.guard.position

    def view(self) -> LocalView:
        return self.guard.view()

    def step(self, dart: int) -> None:
        end = self.view().end(dart)
        if self.steps >= self.budget:
            raise StepBudgetExceeded(f"step budget of {self.budget} traversals exhausted")
        self.steps += 1
        self.trace.append(TraceStep(self.steps, self.at, dart, self.at, end.neighbor, self.phase, self.counters))
        self.guard.move(end.neighbor)
        if end.neighbor == self.target:
            raise _Arrived()

    def start_dart(self) -> int:
        """First dart clockwise from the connecting curve's direction at S."""
        theta = turns_of(sub(self.gamma[1], self.gamma[0]))
        ends = self.view().ends
        for e in ends:
            if e.departure < theta:
                return e.dart
        return ends[0].dart

    def is_start_dart(self, dart: int) -> bool:
        return self.at == self.source and dart == self.start_dart()

    # -- walking -----------------------------------------------------------

    def advance(self, pos: WalkPosition,
                stop: Callable[[int, Optional[DartCrossing]], bool]) -> WalkPosition:
        """Walk forward from pos until ``stop`` accepts a dart start or a crossing.

        ``stop(dart, None)`` is asked at the tail of every dart but the first;
        ``stop(dart, crossing)`` for each crossing in walk order.
        """
        d, first, laps = pos.dart, True, 0
        while True:
            if not first:
                if d == pos.dart:
                    laps += 1
                    if laps > 1:
                        raise NoFurtherCrossing(f"walk of dart {pos.dart} holds no such crossing")
                if stop(d, None):
                    return WalkPosition(d, -1)
            for c in self.view().end(d).crossings:
                if first and c.rank <= pos.rank:
                    continue
                if stop(d, c):
                    return WalkPosition(d, c.rank)
            self.step(d)
            d = self.view().next_clockwise(reverse(d))
            first = False

    def cross(self, pos: WalkPosition) -> WalkPosition:
        """Cross the edge at pos onto the adjacent walk."""
        m = len(self.view().end(pos.dart).crossings)
        self.step(pos.dart)
        return WalkPosition(reverse(pos.dart), m - 1 - pos.rank)

    def circuit(self, pos: WalkPosition, visit: Callable[[int, DartCrossing, bool], None]) -> None:
        """Traverse the whole walk once, back to pos.

        ``visit(dart, crossing, wrapped)`` sees every crossing; ``wrapped`` marks
        those on pos's dart at or before pos, which come last in walk order.
        """
        d = pos.dart
        tail: List[DartCrossing] = []
        while True:
            for c in self.view().end(d).crossings:
                if d == pos.dart and c.rank <= pos.rank:
                    tail.append(c)
                else:
                    visit(d, c, False)
            self.step(d)
            d = self.view().next_clockwise(reverse(d))
            if d == pos.dart:
                break
        for c in tail:
            visit(pos.dart, c, True)

    # -- MSFR --------------------------------------------------------------

    def _key(self, curve: int, t: Fraction, t0: Fraction) -> Fraction:
        fwd, _ = forward_of(curve, self.genus)
        return (t - t0) % 1 if fwd != 0 else t - t0

    def msfr_loop(self, curve: int, pos: WalkPosition, t0: Fraction, t_start: Fraction) -> Tuple[Triple, WalkPosition]:
        """Run MSFR from pos until a walk with non-zero homology sums is met."""
        g = self.genus
        while True:
            sums = [0] * (2 * g)
            self.counters = tuple(sums)
            exits: List[Tuple[Fraction, WalkPosition, Fraction]] = []

            def visit(d: int, c: DartCrossing, wrapped: bool) -> None:
                if 1 <= c.curve_index <= 2 * g:
                    sums[c.curve_index - 1] += c.sign
                    self.counters = tuple(sums)
                seen = own_view(curve, g, c)
                if seen is None or seen[1] != 1:
                    return
                key = self._key(curve, seen[0], t0)
                if key > 0:
                    exits.append((key, WalkPosition(d, c.rank), seen[0]))

            self.circuit(pos, visit)
            if any(sums):
                return Triple(curve, t_start, t0), pos
            if not exits:
                raise NoFurtherCrossing(f"curve {curve} has no crossing past t={t0} on this walk")
            _, target, t_next = min(exits, key=lambda item: item[0])
            pos = self.cross(self.advance(pos, lambda d, c: c is not None and d == target.dart
                                          and c.rank == target.rank))
            t0 = t_next
            logger.debug("msfr curve=%d switched walks at t=%s", curve, t0)

    def launch(self, curve: int, pos: WalkPosition, t: Fraction) -> Tuple[Triple, WalkPosition]:
        """Cross at pos (an exit of ``curve``) and follow the curve with MSFR."""
        return self.msfr_loop(curve, self.cross(pos), t, t)

    def from_source(self) -> Tuple[Triple, WalkPosition]:
        pos = WalkPosition(self.start_dart(), -1)
        return self.msfr_loop(0, pos, Fraction(0), Fraction(0))

    def arrival_at(self, triple: Triple) -> Callable[[int, Optional[DartCrossing]], bool]:
        """Matches the crossing where ``triple`` entered its walk."""
        def match(d: int, c: Optional[DartCrossing]) -> bool:
            if c is None:
                return triple.curve_index == 0 and triple.t_end == 0 and self.is_start_dart(d)
            seen = own_view(triple.curve_index, self.genus, c)
            return seen is not None and seen == (triple.t_end, -1)
        return match

    def launch_at(self, triple: Triple) -> Callable[[int, Optional[DartCrossing]], bool]:
        """Matches the crossing where ``triple`` left its walk."""
        def match(d: int, c: Optional[DartCrossing]) -> bool:
            if c is None:
                return triple.curve_index == 0 and triple.t_start == 0 and self.is_start_dart(d)
            seen = own_view(triple.curve_index, self.genus, c)
            return seen is not None and seen == (triple.t_start, 1)
        return match

    def reverse_run(self, triple: Triple, pos: WalkPosition) -> Tuple[Triple, WalkPosition]:
        """Undo ``triple`` from the walk it stopped on."""
        back = reversed_index(triple.curve_index, self.genus)
        found = self.advance(WalkPosition(pos.dart, pos.rank - 1), self.arrival_at(triple))
        seen = own_view(back, self.genus, self.view().end(found.dart).crossings[found.rank])
        return self.launch(back, found, seen[0])

    # -- GFR ---------------------------------------------------------------

    def ventures(self, d: int, c: Optional[DartCrossing]) -> Optional[int]:
        """Curve index to launch at this crossing, if any.

        A basis crossing is covered in both orientations: the curve leaves the
        walk here when the sign is +1, its reversal when it is -1. The other
        orientation at the same crossing would enter this walk and end where
        it started, so only the leaving one is launched. Gamma is followed
        forward only.
        """
        if c is None:
            return None
        if c.curve_index == 0:
            return 0 if c.sign == 1 else None
        if c.sign == 1:
            return c.curve_index
        return reversed_index(c.curve_index, self.genus)

    def visited(self, pos: WalkPosition, pending: Triple) -> bool:
        """One circuit of the walk, matching crossings against the recorded triples."""
        matchers = []
        for t in self.triples:
            if t is not pending:
                matchers += [self.arrival_at(t), self.launch_at(t)]
        hit = False
        d = pos.dart
        while True:
            if d != pos.dart or pos.rank < 0:
                if any(m(d, None) for m in matchers):
                    hit = True
            for c in self.view().end(d).crossings:
                if any(m(d, c) for m in matchers):
                    hit = True
            self.step(d)
            d = self.view().next_clockwise(reverse(d))
            if d == pos.dart:
                break
        return hit

    def note_triples(self) -> None:
        self.peak_triples = max(self.peak_triples, len(self.triples))

    def dfs(self, root: Triple, pos: WalkPosition) -> None:
        """Depth-first search over walks with non-zero homology; returns when exhausted."""
        self.triples = [root]
        self.note_triples()
        while True:
            self.phase = Phase.DFS
            anchors = [self.arrival_at(t) for t in self.triples]

            def stop(d: int, c: Optional[DartCrossing]) -> bool:
                if any(a(d, c) for a in anchors):
                    return True
                return self.ventures(d, c) is not None

            nxt = self.advance(pos, stop)
            crossing = None if nxt.rank < 0 else self.view().end(nxt.dart).crossings[nxt.rank]
            curve = self.ventures(nxt.dart, crossing)
            if curve is None or any(a(nxt.dart, crossing) for a in anchors):
                parent = next(t for t in self.triples if self.arrival_at(t)(nxt.dart, crossing))
                if parent is root:
                    return
                self.phase = Phase.REVERSE
                _, pos = self.reverse_run(parent, nxt)
                continue

            t = own_view(curve, self.genus, crossing)[0]
            triple, arrived = self.launch(curve, nxt, t)
            self.stops.append((arrived, triple))
            if self.visited(arrived, triple):
                self.phase = Phase.REVERSE
                _, pos = self.reverse_run(triple, arrived)
                continue
            self.triples.append(triple)
            self.note_triples()
            pos = arrived


def _result(agent: Agent, graph: EmbeddedGraph, outcome: Outcome, reason: Optional[FailureReason] = None,
            algorithm: str = "gfr") -> RouteResult:
    settings = agent.settings
    bits = memory_bits(graph.genus, agent.peak_triples, graph.max_curve_crossings,
                       settings.crossing_bound, len(graph.edges))
    stops = []
    visits = []
    for i, (pos, triple) in enumerate(agent.stops):
        key = graph.walk_of(pos.dart).key
        visits.append(key)
        stops.append(StopMark(i + 1, graph.tail(pos.dart), key, triple))
    return RouteResult(
        outcome=outcome,
        reason=reason,
        trace=agent.trace,
        traversal_count=agent.steps,
        peak_memory_bits=bits,
        memory_ceiling_bits=memory_ceiling(settings, graph.genus, len(graph.nodes)),
        ntbw_visits=visits,
        triples=list(agent.triples),
        stops=stops,
        query_log=agent.guard.queries,
        algorithm=algorithm,
    )


def _require_route(graph: EmbeddedGraph) -> None:
    if graph.route is None or not graph.gamma:
        raise ValueError("graph was embedded without a route")


def msfr(graph: EmbeddedGraph, curve_index: int, entry: WalkPosition, shift: Fraction,
         t_start: Optional[Fraction] = None, settings: Optional[SimSettings] = None,
         stop_at_target: bool = True) -> MsfrOutcome:
    """MSFR along ``curve_index`` from ``entry``, which sits just past a crossing at t = shift.

    With ``stop_at_target=False`` the run passes through T and stops only on a
    walk with non-zero homology sums.
    """
    agent = Agent(graph, graph.tail(entry.dart), settings, stop_at_target=stop_at_target)
    try:
        triple, pos = agent.msfr_loop(curve_index, entry, Fraction(shift),
                                      Fraction(shift if t_start is None else t_start))
    except _Arrived:
        return MsfrOutcome(MsfrStop.REACHED_T, None, None, (), agent.trace, agent.steps)
    return MsfrOutcome(MsfrStop.STOPPED_AT_NTBW, triple, pos, graph.walk_of(pos.dart).key,
                       agent.trace, agent.steps)


def msfr_from_source(graph: EmbeddedGraph, settings: Optional[SimSettings] = None) -> MsfrOutcome:
    _require_route(graph)
    agent = Agent(graph, graph.source, settings)
    try:
        triple, pos = agent.from_source()
    except _Arrived:
        return MsfrOutcome(MsfrStop.REACHED_T, None, None, (), agent.trace, agent.steps)
    return MsfrOutcome(MsfrStop.STOPPED_AT_NTBW, triple, pos, graph.walk_of(pos.dart).key,
                       agent.trace, agent.steps)


def reverse_msfr(graph: EmbeddedGraph, triple: Triple, position: WalkPosition,
                 settings: Optional[SimSettings] = None, stop_at_target: bool = True) -> MsfrOutcome:
    """Retrace ``triple`` from the walk (and position) where its run stopped."""
    agent = Agent(graph, graph.tail(position.dart), settings, stop_at_target=stop_at_target)
    agent.phase = Phase.REVERSE
    try:
        stopped, pos = agent.reverse_run(triple, position)
    except _Arrived:
        return MsfrOutcome(MsfrStop.REACHED_T, None, None, (), agent.trace, agent.steps)
    return MsfrOutcome(MsfrStop.STOPPED_AT_NTBW, stopped, pos, graph.walk_of(pos.dart).key,
                       agent.trace, agent.steps)


def gfr(graph: EmbeddedGraph, settings: Optional[SimSettings] = None) -> RouteResult:
    _require_route(graph)
    agent = Agent(graph, graph.source, settings)
    try:
        root, pos = agent.from_source()
        agent.stops.append((pos, root))
        agent.dfs(root, pos)
    except _Arrived:
        logger.info("gfr delivered after %d traversals", agent.steps)
        return _result(agent, graph, Outcome.DELIVERED)
    logger.info("gfr exhausted the search after %d traversals", agent.steps)
    return _result(agent, graph, Outcome.UNREACHABLE)


def classic_fr(graph: EmbeddedGraph, step_budget: Optional[int] = None,
               settings: Optional[SimSettings] = None) -> RouteResult:
    """Face routing along the connecting curve, always leaving by the exit nearest T."""
    _require_route(graph)
    agent = Agent(graph, graph.source, settings, budget=step_budget)
    agent.phase = Phase.FR
    seen = set()
    try:
        pos = WalkPosition(agent.start_dart(), -1)
        t0 = Fraction(0)
        while True:
            state = (pos.dart, t0)
            if state in seen:
                return _result(agent, graph, Outcome.FAILED, FailureReason.LOOP_DETECTED, "fr")
            seen.add(state)
            exits: List[Tuple[Fraction, WalkPosition]] = []

            def visit(d: int, c: DartCrossing, wrapped: bool) -> None:
                if c.curve_index == 0 and c.sign == 1:
                    exits.append((c.t, WalkPosition(d, c.rank)))

            agent.circuit(pos, visit)
            if not exits:
                # face routing would circle this face forever
                return _result(agent, graph, Outcome.FAILED, FailureReason.LOOP_DETECTED, "fr")
            t_next, target = max(exits, key=lambda item: item[0])
            pos = agent.cross(agent.advance(pos, lambda d, c: c is not None and d == target.dart
                                            and c.rank == target.rank))
            t0 = t_next
    except _Arrived:
        return _result(agent, graph, Outcome.DELIVERED, algorithm="fr")
    except StepBudgetExceeded:
        return _result(agent, graph, Outcome.FAILED, FailureReason.BUDGET_EXCEEDED, "fr")


def meter_report(result: RouteResult) -> Dict:
    return {
        "traversal_count": result.traversal_count,
        "peak_memory_bits": result.peak_memory_bits,
        "memory_ceiling_bits": result.memory_ceiling_bits,
        "ntbw_count": result.ntbw_count,
        "triples_recorded": len(result.triples),
    }
