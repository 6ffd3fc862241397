"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`NcGrassError`,
so callers can separate library failures from programming errors.
"""


class NcGrassError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(NcGrassError, ValueError):
    """Layer dimensions (m, n, k) or block shapes do not agree."""


class NotInvertible(NcGrassError, ValueError):
    """A matrix required to be invertible is singular (within tolerance)."""


class NotHermitian(NcGrassError, ValueError):
    pass


class NegativeEigenvalue(NcGrassError, ValueError):
    pass


class ExactModeUnsupported(NcGrassError, TypeError):
    """The operation has no exact-arithmetic implementation."""


class InvalidSubalgebra(NcGrassError, ValueError):
    """A subalgebra description is not unital or not closed under products."""


class NotInSubalgebra(NcGrassError, ValueError):
    pass


class DomainError(NcGrassError, ValueError):
    """A point lies outside the domain of an nc function."""


class AdmissibilityError(DomainError):
    """No scaling factor on the ladder moves the pinched point into the domain.

    This does not prove that the domain is non-admissible; the ladder is finite.
    """


class StructureError(NcGrassError):
    """An evaluation broke the block pattern an nc function must produce."""


class WitnessRequired(NcGrassError, ValueError):
    pass


class NotTransversal(NcGrassError, ValueError):
    pass


class SignatureMismatch(NcGrassError, ValueError):
    pass


class NotPureContraction(NcGrassError, ValueError):
    pass


class IndexOutOfRange(NcGrassError, IndexError):
    pass


class UnknownSuite(NcGrassError, KeyError):
    pass


class SchemaError(NcGrassError, ValueError):
    """Malformed JSON input."""
