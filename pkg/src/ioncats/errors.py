"""Exception and warning types raised by the simulator."""


class DimensionError(ValueError):
    """Operand shapes disagree or a product space exceeds the configured size."""


class ExpmConvergenceError(ArithmeticError):
    """The matrix exponential cannot reach the requested tolerance."""


class TruncationError(RuntimeError):
    """Population reached the top of a truncated Fock space."""


class DegenerateOutcomeError(ValueError):
    """A measurement outcome or reference state has (numerically) zero weight."""


class TruncationWarning(UserWarning):
    pass
