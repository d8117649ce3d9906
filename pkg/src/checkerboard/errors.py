"""Exception hierarchy shared by every module of the package."""


class CheckerboardError(Exception):
    """Base class for all package errors."""


class OutOfDomain(CheckerboardError, ValueError):
    """A vertex lies outside the domain of a weight field."""


class PolyaAtBoundary(OutOfDomain):
    """The Polya weight u/(u+v) was requested with u <= 0 or v <= 0."""


class WeightOutOfRange(CheckerboardError, ValueError):
    """An edge probability evaluated outside [0, 1]."""


class InexactWeights(CheckerboardError, TypeError):
    """An exact computation was asked of a field with floating-point weights."""


class ParityError(CheckerboardError, ValueError):
    """Coordinates of mixed integer / half-integer parity."""


class SpecError(CheckerboardError, ValueError):
    """An interval or site specification violates its ordering invariants."""


class EmptyEndpoints(SpecError):
    pass


class ConeNotCovered(CheckerboardError, KeyError):
    """A computation needed a random choice outside the sampled region."""

    def __str__(self):
        return Exception.__str__(self)


class ConeTooLarge(CheckerboardError, ValueError):
    """Brute-force enumeration refused: too many choice bits."""


class OddOrder(CheckerboardError, ValueError):
    pass


class OrderCap(CheckerboardError, ValueError):
    pass


class SizeCap(CheckerboardError, ValueError):
    pass


class NonPositiveParameters(CheckerboardError, ValueError):
    pass


class ConfigParse(CheckerboardError, ValueError):
    """The experiment configuration could not be parsed."""


class ValidationFailed(CheckerboardError, ValueError):
    """The experiment configuration parsed but is internally inconsistent."""
