"""Exception types shared across the toolkit."""


class ContractViolation(ValueError):
    """A precondition of an operation was violated by its caller."""


class BlowUpError(ArithmeticError):
    """A time stepper produced non-finite values."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NonConvergenceError(RuntimeError):
    """An iterative approximation did not reach its tolerance."""

    def __init__(self, message, last_defect=None, history=None):
        super().__init__(message)
        self.last_defect = last_defect
        self.history = list(history or [])
