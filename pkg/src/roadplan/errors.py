"""Exception types shared across the package."""

from __future__ import annotations


class RoadPlanError(Exception):
    """Base class for all errors raised by this package."""


class UnknownIdError(RoadPlanError):
    """A referenced node, road, or state id does not exist."""


class StructuralError(RoadPlanError):
    """An operation would violate a structural invariant (bad value, duplicate, ...)."""


class UnreachableODError(RoadPlanError):
    """One or more demanded OD pairs have no path in the network."""

    def __init__(self, pairs: list[tuple[int, int]]):
        self.pairs = sorted(pairs)
        listed = ", ".join(f"{o}->{d}" for o, d in self.pairs)
        super().__init__(f"unreachable OD pair(s): {listed}")


class RootDeletionError(RoadPlanError):
    """The root state of a tree cannot be deleted."""


class ParseError(RoadPlanError):
    """An input file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SessionError(RoadPlanError):
    """A session document is malformed, stale, or internally inconsistent."""
