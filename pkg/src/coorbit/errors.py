"""Exception hierarchy shared by all modules."""


class CoorbitError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(CoorbitError, ValueError):
    """Operands have incompatible lengths or shapes."""


class WeightError(CoorbitError, ValueError):
    """A weight has a non-positive or non-finite value."""


class FrameError(CoorbitError, ValueError):
    """A family of vectors violates the finite frame condition."""


class ConditioningError(CoorbitError, ArithmeticError):
    """A frame operator is too ill-conditioned to invert reliably."""


class ConsistencyError(CoorbitError, ArithmeticError):
    """A computed object contradicts an invariant it must satisfy."""


class PreconditionError(CoorbitError, ValueError):
    """Input does not satisfy the precondition of an operation."""


class SpecError(CoorbitError, ValueError):
    """A frame or weight specification has invalid parameters."""


class GenerationError(CoorbitError, RuntimeError):
    """A generator produced a rank-deficient family."""
