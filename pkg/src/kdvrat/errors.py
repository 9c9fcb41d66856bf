"""Exception hierarchy.

Every failure mode carries a category that the CLI maps to a stable exit
code: usage errors exit 1, expression parse errors exit 2, violated
mathematical preconditions exit 3, and failed exact identities exit 4.
"""

from __future__ import annotations


class KdvError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class ParseError(KdvError):
    """Expression text rejected by the grammar."""

    exit_code = 2

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class UnknownVariable(ParseError):
    pass


# -- precondition violations (exit 3) ---------------------------------------

class DivisionByZero(KdvError):
    pass


class DenominatorVanishes(KdvError):
    pass


class NonRationalAntiderivative(KdvError):
    pass


class LevelMismatch(KdvError):
    pass


class NotStationary(KdvError):
    pass


class NotASolution(KdvError):
    pass


class RiccatiViolation(KdvError):
    pass


class NotStationarySolution(KdvError):
    pass


class NotOnCurve(KdvError):
    pass


class NoSolutionWithinBound(KdvError):
    pass


class AmbiguousSolution(KdvError):
    pass


class UnrecognizedExtension(KdvError):
    pass


# -- failed exact identities (exit 4) ----------------------------------------

class IdentityError(KdvError):
    exit_code = 4


class InexactDivision(IdentityError):
    pass


class FormMismatch(IdentityError):
    pass


class CrossCheckFailure(IdentityError):
    pass


class IdentityFailure(IdentityError):
    pass


class PDEViolation(IdentityError):
    pass


class DegreeViolation(IdentityError):
    pass


class HomogeneityFailure(IdentityError):
    pass
