"""Exception hierarchy shared by all modules."""


class SignedCEError(Exception):
    """Base class for errors raised by this package."""


class InvalidInterval(SignedCEError, ValueError):
    pass


class ResourceLimitExceeded(SignedCEError):
    pass


class CriticalLevel(SignedCEError, ValueError):
    """The queried level is a value of the function at a breakpoint."""

    def __init__(self, level):
        super().__init__(f"level {level} is a critical value")
        self.level = level


class HypothesisViolated(SignedCEError, ValueError):
    pass


class QuadratureTolNotMet(SignedCEError, ArithmeticError):
    pass


class SupportViolation(SignedCEError, ValueError):
    pass


class DomainViolation(SignedCEError, ValueError):
    pass


class BracketFailure(SignedCEError, ArithmeticError):
    pass


class NotMonotoneRun(SignedCEError, ValueError):
    pass
