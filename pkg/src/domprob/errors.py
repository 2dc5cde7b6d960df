"""Exception types raised across the package."""

from __future__ import annotations


class DomprobError(Exception):
    """Base class for every domain-level failure (CLI exit code 1)."""


class DivisionByIntervalContainingZero(DomprobError):
    pass


class DomainViolation(DomprobError):
    """An elementary function was applied outside its domain."""


class ElementDomainMismatch(DomprobError):
    pass


class DomainConstructionError(DomprobError):
    """A finite poset failed validation (cycle, missing bottom, not bounded complete)."""


class KindMismatch(DomprobError):
    pass


class Unsupported(DomprobError):
    pass


class DomainMismatch(DomprobError):
    pass


class ChainNotIncreasing(DomprobError):
    pass


class DegenerateConditioning(DomprobError):
    pass


class PartitionMismatch(DomprobError):
    pass


class NotLeq(DomprobError):
    pass


class NotSimple(DomprobError):
    pass


class UnboundedCodomain(DomprobError):
    pass


class UnboundedJoin(DomprobError):
    pass


class ValueOutsideRange(DomprobError):
    pass


class ParseError(DomprobError):
    pass


class TypeErrorPFL(DomprobError):
    pass


class NotPositiveSemidefinite(DomprobError):
    pass


class PointOutsideSpace(DomprobError):
    pass


class SpaceMismatch(DomprobError):
    pass


class PreconditionFailed(DomprobError):
    pass


class DepthOverflow(DomprobError):
    pass


class NotEquivalent(DomprobError):
    pass


class LengthMismatch(DomprobError):
    pass


class BadDigit(DomprobError):
    pass


class Misaligned(DomprobError):
    pass


class MissingMapping(DomprobError):
    pass


class NonMonotoneMap(DomprobError):
    pass


class IllFormedFunctional(DomprobError):
    pass


class PickOutsideInterval(DomprobError):
    pass


class MissingGridValue(DomprobError):
    pass


class BadProbability(DomprobError):
    pass


class BadAlpha(DomprobError):
    pass
NotPSD = NotPositiveSemidefinite


class Stuck(DomprobError):
    """No reduction rule applies (e.g. an undecided comparison)."""


class FuelExhausted(DomprobError):
    pass
