"""Exception types raised by sppkit."""


class SppkitError(Exception):
    """Base class for all sppkit errors."""


class GammaPoleError(SppkitError, ZeroDivisionError):
    """Gamma evaluated at a non-positive integer."""


class GammaOverflowError(SppkitError, OverflowError):
    """Gamma result exceeds the float range (distinct from a pole)."""


class InvalidParameterError(SppkitError, ValueError):
    pass


class NonIntegralTargetError(SppkitError, ValueError):
    """A rational ladder monomial would map |n> outside the integer lattice."""


class TruncationOverflowError(SppkitError):
    """The power left outside a truncated expansion exceeds the tolerance."""

    def __init__(self, message, tail=None):
        super().__init__(message)
        self.tail = tail


class NotConvergedError(SppkitError):
    """Quadrature did not settle under node doubling."""

    def __init__(self, message, estimate=None, change=None):
        super().__init__(message)
        self.estimate = estimate
        self.change = change


class DegenerateLoopError(SppkitError, ValueError):
    """The field vanishes on the circulation loop, so its phase is undefined."""
