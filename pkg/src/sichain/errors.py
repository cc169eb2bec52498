"""Exception types raised by sichain."""


class SichainError(Exception):
    """Base class for all library errors."""


class DegreeZero(SichainError):
    pass


class NearPole(SichainError):
    pass


class NotReduced(SichainError):
    pass


class ZeroA1(SichainError):
    pass


class NoCharacteristicFunction(SichainError):
    """The pair (A0, A1) admits no scalar rational phi with A1 R(l, A0) A1 = phi(l) A1."""


class PoleInRightHalfPlane(SichainError):
    pass


class NonRealOnAxis(SichainError):
    pass


class EpsTooLarge(SichainError):
    pass


class NotNormalized(SichainError):
    pass


class OddLeadingOrder(SichainError):
    pass


class WindowTooCoarse(SichainError):
    pass


class OnLevelSet(SichainError):
    pass


class NoConvergence(SichainError):
    pass


class ToleranceNotMet(SichainError):
    pass


class ShapeMismatch(SichainError):
    pass


class DegenerateWindow(SichainError):
    pass


class ZeroInSpectrum(SichainError):
    pass


class RangeInconsistent(SichainError):
    pass


class PhiPrimeZero(SichainError):
    pass


class BadParams(SichainError):
    pass


class FileError(SichainError):
    pass


class SchemaError(SichainError):
    pass
