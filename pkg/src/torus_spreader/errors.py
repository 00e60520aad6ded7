"""Exception hierarchy shared by every module of the package."""


class InvalidInput(ValueError):
    """An argument violates a documented precondition."""


class DegenerateInput(InvalidInput):
    """Input is well-formed but geometrically degenerate (e.g. a singleton)."""


class ConstructionError(ValueError):
    """A derived object could not be built from otherwise valid inputs."""


class DegenerateNormalization(ArithmeticError):
    """A set is too small to be rescaled to unit diameter."""


class LargeApproxFailure(Exception):
    """Base class for failed large-approximate certifications."""

    def __init__(self, message, *, r, scale, gap=None, slack=None):
        super().__init__(message)
        self.r = r
        self.scale = scale
        self.gap = gap
        self.slack = slack


class TooSmall(LargeApproxFailure):
    """The set's diameter does not exceed the requested largeness ``r``."""


class ShapeMismatch(LargeApproxFailure):
    """The normalized set is not certifiably within ``1/r`` of the target."""
