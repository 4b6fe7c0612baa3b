"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """Inputs violate a documented precondition."""


class InvalidState(RuntimeError):
    """A model state (or a kernel's intermediate) is not a valid point of the model."""


class NumericOverflow(ArithmeticError):
    """A quantity under- or overflowed double precision."""
