from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from core.exact import Point, format_fraction


class CurveKind(str, Enum):
    CONNECTING = "connecting"
    MU = "mu"
    LAMBDA = "lambda"


class Orientation(str, Enum):
    FORWARD = "forward"
    REVERSED = "reversed"


class Phase(str, Enum):
    MSFR = "MSFR"
    DFS = "DFS"
    REVERSE = "REVERSE"
    FR = "FR"


class Outcome(str, Enum):
    DELIVERED = "Delivered"
    UNREACHABLE = "Unreachable"
    FAILED = "Failed"


class FailureReason(str, Enum):
    LOOP_DETECTED = "LoopDetected"
    BUDGET_EXCEEDED = "BudgetExceeded"


class MsfrStop(str, Enum):
    REACHED_T = "ReachedT"
    STOPPED_AT_NTBW = "StoppedAtNTBW"


# Directed edges ("darts"): edge e has 2e (u->v) and 2e+1 (v->u).

def dart_of(edge_id: int, forward: bool = True) -> int:
    return 2 * edge_id + (0 if forward else 1)


def edge_of(dart: int) -> int:
    return dart >> 1


def reverse(dart: int) -> int:
    return dart ^ 1


def is_forward(dart: int) -> bool:
    return dart & 1 == 0


@dataclass(frozen=True)
class Disk:
    disk_id: int
    center: Point
    radius: Fraction


@dataclass(frozen=True)
class BoundaryLocus:
    """A point on an identified circle, given by disk and angle in turns."""
    disk_id: int
    turns: Fraction


SurfacePoint = Union[Point, BoundaryLocus]


@dataclass(frozen=True)
class Portal:
    disk_id: int
    turns: Fraction


@dataclass(frozen=True)
class Crossing:
    """An edge crossing a forward curve, seen along the edge's u->v direction."""
    curve_index: int
    t: Fraction
    sign: int
    where: SurfacePoint


@dataclass(frozen=True)
class Triple:
    curve_index: int
    t_start: Fraction
    t_end: Fraction

    def to_dict(self) -> Dict:
        return {
            "curve": self.curve_index,
            "t_start": format_fraction(self.t_start),
            "t_end": format_fraction(self.t_end),
        }


@dataclass(frozen=True)
class TraceStep:
    step: int
    node: int
    dart: int
    tail: int
    head: int
    phase: Phase
    counters: Tuple[int, ...] = ()

    def line(self) -> str:
        counters = ",".join(str(c) for c in self.counters)
        return (
            f"step={self.step} node={self.node} edge={self.tail}->{self.head} "
            f"phase={self.phase.value} counters={counters}"
        )


@dataclass(frozen=True)
class NodeSpec:
    node_id: int
    position: Point


@dataclass(frozen=True)
class EdgeSpec:
    u: int
    v: int
    pieces: Tuple[Tuple[Point, ...], ...]
    portals: Tuple[Portal, ...] = ()


@dataclass(frozen=True)
class RouteSpec:
    source: int
    target: int
    gamma: Optional[Tuple[Point, ...]] = None


@dataclass
class StopMark:
    """Where an MSFR run stopped; drawn as a numbered star."""
    index: int
    node: int
    walk_key: Tuple[int, ...]
    triple: Optional[Triple] = None
    extra: Dict = field(default_factory=dict)


def triples_as_dicts(triples: List[Triple]) -> List[Dict]:
    return [t.to_dict() for t in triples]
