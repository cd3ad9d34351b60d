"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the range an operation is defined on."""


class PreconditionError(DomainError):
    """Parameters violate the stated preconditions of a construction or theorem."""


class ContradictionError(DomainError):
    """The same query appears twice with opposite labels."""


class BudgetExceededError(RuntimeError):
    """An exhaustive search would exceed its configured work budget."""


class OptimizerError(RuntimeError):
    """Gradient descent produced a non-finite loss.

    The loss history up to the failure is kept in ``trace``.
    """

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class TieWarning(UserWarning):
    """Two compared distances were exactly equal; the label defaulted to +1."""
