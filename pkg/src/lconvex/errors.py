"""Exception types shared across the package."""


class LConvexError(Exception):
    """Base class for every error raised by this package."""


class InvalidBody(LConvexError):
    """Support function fails the strict convexity check."""


class UnsupportedOrder(LConvexError):
    pass


class CurvatureConditionViolated(LConvexError):
    pass


class NonInvertibleLeadingTerm(LConvexError):
    pass


class ComposeIntoConstant(LConvexError):
    pass


class HeightOutOfRange(LConvexError):
    pass


class TangentialIntersection(LConvexError):
    pass


class AreaOutOfRange(LConvexError):
    pass


class QuadratureNotConverged(LConvexError):
    def __init__(self, message, achieved_error=None):
        super().__init__(message)
        self.achieved_error = achieved_error


class PointsTooFarApart(LConvexError):
    pass


class NotContainedInAnyTranslate(LConvexError):
    pass


class DeltaTooLarge(LConvexError):
    pass
