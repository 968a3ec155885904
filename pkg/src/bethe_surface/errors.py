"""Exception hierarchy shared by all modules."""


class BetheSurfaceError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(BetheSurfaceError, ValueError):
    """Input data violates a documented invariant."""


class NumericalFailure(BetheSurfaceError, ArithmeticError):
    """A numerical kernel could not deliver the requested accuracy."""


# numkit
class NonConvergence(NumericalFailure):
    pass


class SingularOnContour(NumericalFailure):
    pass


class NoRootFound(NumericalFailure):
    pass


# schwarz
class CriticalPoint(NumericalFailure):
    pass


class FitUnstable(NumericalFailure):
    pass


class BranchTrackingFailure(NumericalFailure):
    pass


# genus 0 / elliptic / genus g configurations
class DegenerateConfig(ValidationError):
    pass


class InconsistentProfile(ValidationError):
    pass


class BadModulus(ValidationError):
    pass


class AtPole(ValidationError):
    pass


class PathThroughPole(NumericalFailure):
    pass


class SBViolated(UserWarning):
    """Warning: a potential was requested for a config that does not solve the SB system."""


# theta functions
class BadPeriodMatrix(ValidationError):
    pass


class UnsupportedOrder(ValidationError):
    pass


# curves
class CycleEncodingInvalid(NumericalFailure):
    pass


class BranchClearance(ValidationError):
    pass


class ValidationFailed(NumericalFailure):
    pass


class SingularCharacteristic(NumericalFailure):
    pass


class WronskianZero(NumericalFailure):
    pass


class DegenerateImage(NumericalFailure):
    pass


class NotCanonical(ValidationError):
    pass


class AtDivisor(ValidationError):
    pass


class PathThroughDivisor(NumericalFailure):
    pass


class QNotConstant(NumericalFailure):
    pass


# monodromy
class StepFailure(NumericalFailure):
    pass


class ClearanceViolated(ValidationError):
    pass
