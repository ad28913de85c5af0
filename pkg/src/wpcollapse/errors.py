"""Exception hierarchy.

Every error raised by the library derives from :class:`GeometryError`, itself a
``ValueError``, so callers may catch broadly or narrowly.  The CLI maps
:class:`ValidationError` subclasses to exit code 1 and :class:`NumericalError`
subclasses to exit code 2.
"""


class GeometryError(ValueError):
    pass


class ValidationError(GeometryError):
    """Input violates a precondition."""


class NumericalError(GeometryError):
    """A computation could not be carried out to the required accuracy."""


class DimensionMismatch(ValidationError):
    pass


class AsymmetricInput(ValidationError):
    pass


class NotPositiveDefinite(ValidationError):
    pass


class NotInSiegelSet(ValidationError):
    pass


class NotVertical(ValidationError):
    pass


class BaseMismatch(ValidationError):
    pass


class SiegelChainViolated(ValidationError):
    pass


class NonpositiveScale(ValidationError):
    pass


class DegenerateInput(ValidationError):
    pass


class DegenerateDirection(ValidationError):
    pass


class NotDeepEnough(ValidationError):
    pass


class SamplesTooCoarse(ValidationError):
    pass


class NumericallySingular(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class UnimodularOverflow(NumericalError):
    pass
