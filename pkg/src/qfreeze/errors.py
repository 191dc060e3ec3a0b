"""Exception types raised across the package."""


class QFreezeError(ValueError):
    """Base class for all input/validation errors."""


class NonHermitianInput(QFreezeError):
    pass


class NegativeEigenvalue(QFreezeError):
    pass


class DimensionMismatch(QFreezeError):
    pass


class InvalidTriple(QFreezeError):
    """A correlation triple outside the tetrahedron of Bell-diagonal states."""


class InvalidProbabilities(QFreezeError):
    pass


class InvalidParam(QFreezeError):
    pass


class IncompleteKrausSet(QFreezeError):
    pass


class InvalidAxis(QFreezeError):
    pass


class OutOfRangeQ(QFreezeError):
    pass


class UnknownName(QFreezeError):
    pass


class BudgetTooSmall(QFreezeError):
    pass


class DegenerateInput(QFreezeError):
    pass
