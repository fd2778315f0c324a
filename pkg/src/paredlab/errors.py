"""Exception hierarchy.  Each family maps to a CLI exit code."""

from __future__ import annotations


class ParedError(Exception):
    exit_code = 1


class ValidationError(ParedError):
    exit_code = 2


class NumericalError(ParedError):
    exit_code = 3


class SizeLimit(ParedError):
    exit_code = 4


# geometry
class DegenerateGeodesic(ValidationError):
    pass


class NoConvergence(NumericalError):
    pass


# graphs and trees
class NotRealizable(ValidationError):
    pass


class EndCountMismatch(ValidationError):
    pass


class CyclicOrderViolation(ValidationError):
    pass


class DecorationMismatch(ValidationError):
    pass


class Irreducible(ValidationError):
    pass


# laminations
class NotSimple(ValidationError):
    pass


class NonUniqueMatching(NumericalError):
    """The pullback selection rule did not isolate exactly one matching."""


# maps
class RootFindFailure(NumericalError):
    pass


class BracketFailure(NumericalError):
    pass


class ContinuationStepCollision(NumericalError):
    pass


# degenerations
class UnstableClustering(NumericalError):
    pass


class AmbiguousProjection(NumericalError):
    pass


class AngleStarvation(NumericalError):
    pass


class NormalFormFailure(NumericalError):
    pass


class SolveFailure(NumericalError):
    pass


# monodromy
class StepTooLarge(NumericalError):
    pass


class Collision(NumericalError):
    pass


class EndpointMismatch(ValidationError):
    pass


# cli
class MissingArtifact(ValidationError):
    pass
