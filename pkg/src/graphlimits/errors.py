class PreconditionError(ValueError):
    """Input violates an operation's precondition (CLI exit code 1)."""


class NonConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap (CLI exit code 2)."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
