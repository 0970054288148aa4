"""Exception taxonomy shared across the toolkit.

Domain errors (bad inputs) and numerical failures (runs that could not
be completed) are kept in separate branches so the CLI can map them to
distinct exit codes.
"""

from __future__ import annotations


class UnfError(Exception):
    """Base class for all toolkit errors."""


class DomainError(UnfError):
    """Inputs violate a precondition of the requested operation."""


class InvalidDomain(DomainError):
    pass


class NonPositiveBeta(DomainError):
    """Parameter map would produce beta <= 0 (b >= 2a); rejected."""


class DegenerateParameters(DomainError):
    pass


class OutOfRange(DomainError):
    pass


class BracketNotSignChanging(DomainError):
    """Root bracket endpoints do not straddle a sign change."""


class NumericalError(UnfError):
    """A run failed for numerical reasons."""


class StepSizeUnderflow(NumericalError):
    pass


class Escaped(NumericalError):
    """Trajectory left the configured escape radius."""

    def __init__(self, state, time):
        self.state = state
        self.time = time
        super().__init__(f"trajectory escaped at t={time:.6g}")


class EventNotFound(NumericalError):
    """Integration horizon exhausted before the requested event."""


class ConvergedToFocus(NumericalError):
    """Trajectory converged to one of the symmetric foci instead."""

    def __init__(self, side, state, time):
        self.side = side  # +1 for E+, -1 for E-
        self.state = state
        self.time = time
        super().__init__(f"converged to E{'+' if side > 0 else '-'} at t={time:.6g}")


class NoConvergence(NumericalError):
    pass


class LadderTruncated(NumericalError):
    """Fewer rotation-ladder roots than requested; carries the prefix found."""

    def __init__(self, ladder, requested):
        self.ladder = ladder
        self.requested = requested
        super().__init__(
            f"found {len(ladder.tau)} ladder roots, {requested} requested"
        )


class FateInterference(NumericalError):
    """Separatrix fate changed class inside a computation (heteroclinic
    interference); carries the fate label and, for solvers, the offending
    sub-bracket."""

    def __init__(self, label, bracket=None):
        self.label = label
        self.bracket = bracket
        msg = f"separatrix fate interference: {label}"
        if bracket is not None:
            msg += f" inside bracket {bracket}"
        super().__init__(msg)


class TwistMismatch(NumericalError):
    """Root located but its winding count differs from the requested index."""

    def __init__(self, found, requested, params=None):
        self.found = found
        self.requested = requested
        self.params = params
        super().__init__(f"root has {found} half-turns, requested {requested}")


class EmptyTrace(NumericalError):
    """Curve continuation failed at every sample."""
