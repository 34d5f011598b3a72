"""Exception hierarchy shared by all codiv modules."""


class CodivError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(CodivError):
    """Operands live on different supports or have incompatible structure."""


class DominationError(CodivError):
    """An operation required absolute continuity that does not hold."""


class PreconditionError(CodivError):
    """An input violates a documented precondition (mass, sign, interval...)."""


class KindMismatchError(CodivError):
    """Parametric families of different kinds were mixed."""


class DegeneratePhiError(CodivError):
    """A correlation-type codivergence denominator vanished."""


class OracleFailureError(CodivError):
    """Adaptive numerical integration failed to converge within its budget."""
