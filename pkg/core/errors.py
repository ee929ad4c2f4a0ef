"""
Error Types
===========
One hierarchy for the simulator. Every error may carry a ``witness``: a
short human-readable description of the objects that triggered it, used
verbatim in verification reports.
"""

from typing import Optional


class GfrError(Exception):
    def __init__(self, message: str, witness: Optional[str] = None):
        super().__init__(message)
        self.witness = witness or message


# -- invalid input -----------------------------------------------------------

class InstanceError(GfrError, ValueError):
    """Surface, graph or instance file that violates the model."""


class OverlappingDisks(InstanceError):
    pass


class MismatchedRadii(InstanceError):
    pass


class DetachedLambda(InstanceError):
    pass


class CurveCollision(InstanceError):
    pass


class MalformedChain(InstanceError):
    pass


class EdgeCrossing(InstanceError):
    pass


class NotGeneralPosition(InstanceError):
    pass


class TooManyCrossings(InstanceError):
    pass


class Disconnected(InstanceError):
    pass


class ParseError(InstanceError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})" if line else message)
        self.line = line
        self.column = column


class VersionMismatch(InstanceError):
    pass


# -- generation ----------------------------------------------------------------

class GenerationExhausted(GfrError, RuntimeError):
    pass


# -- routing -----------------------------------------------------------------

class RoutingError(GfrError, RuntimeError):
    pass


class NoFurtherCrossing(RoutingError):
    pass


class StepBudgetExceeded(RoutingError):
    pass


class EdgeNotOnWalk(GfrError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


# -- oracle ------------------------------------------------------------------

class OracleError(GfrError, ValueError):
    pass


class SharedArc(OracleError):
    pass


class NoDualCurve(OracleError):
    pass
