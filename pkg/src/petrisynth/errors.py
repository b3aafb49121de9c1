"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class PetrisynthError(Exception):
    """Base class for every error raised by this package."""


class UnknownNode(PetrisynthError, KeyError):
    """A place or transition id is not declared in the net."""

    def __str__(self) -> str:
        return Exception.__str__(self)


class NotEnabled(PetrisynthError):
    """A transition was fired in a marking that does not cover its preset."""

    def __init__(self, transition: str, marking, step: int | None = None):
        self.transition = transition
        self.marking = marking
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"transition {transition!r} not enabled{where} in {marking}")


class CapExceeded(PetrisynthError):
    """An exploration produced more objects than the configured cap."""


class BoundViolated(PetrisynthError):
    """A reachable marking puts more than the allowed number of tokens on a place."""

    def __init__(self, place: str, marking, bound: int):
        self.place = place
        self.marking = marking
        self.bound = bound
        super().__init__(f"place {place!r} exceeds bound {bound} in {marking}")


class ClassError(PetrisynthError):
    """The game is outside the decidable class handled by the solver."""


class NotOneEnvPlayer(ClassError):
    def __init__(self, marking):
        self.marking = marking
        super().__init__(f"reachable marking without exactly one environment token: {marking}")


class SystemBoundExceeded(ClassError):
    def __init__(self, marking, place: str, bound: int):
        self.marking = marking
        self.place = place
        self.bound = bound
        super().__init__(f"system place {place!r} holds more than {bound} tokens in {marking}")


class WrongConditionKind(PetrisynthError):
    """An operation received a game whose winning condition has the wrong kind."""


class AmbiguousClass(PetrisynthError):
    """A marking matches both a good and a bad pattern."""


class ArenaInvalid(PetrisynthError):
    """A Büchi arena violates a structural invariant."""


class StateCapExceeded(CapExceeded):
    """The reduction produced more arena states than allowed."""


class BmCapExceeded(CapExceeded):
    """A backward-move sequence grew beyond the configured cap."""


class NotWinning(PetrisynthError):
    """Strategy extraction was requested for a losing initial state."""


class InvariantBroken(PetrisynthError):
    """An internal consistency check failed (indicates a bug)."""


class ParseError(PetrisynthError):
    """A game, strategy, arena or PCP file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
