"""Exception types shared across the package."""


class GtlError(Exception):
    """Base class for all package errors."""


class DomainError(GtlError):
    """An argument is outside the operation's domain (bad shape, range, class)."""


class DecompositionError(GtlError):
    """A matrix decomposition could not be carried out on the given input."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class DegenerateStateError(GtlError):
    """The state is pure or too close to pure for the requested functional."""


class CutoffError(GtlError):
    """A Fock-space cutoff is too small for the requested state."""

    def __init__(self, message, suggested_cutoff=None):
        super().__init__(message)
        self.suggested_cutoff = suggested_cutoff


class LearnError(GtlError):
    """A tomography run failed; ``stage`` tags where."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class AbortNoAngle(LearnError):
    """Algorithm aborted because a required homodyne-angle window was empty.

    This is a legitimate outcome of the non-adaptive single-mode algorithm
    (counted as a failure in success-rate statistics), not a bug.
    """

    def __init__(self, message):
        super().__init__(message, stage="angle-selection")


class DegenerateGeometryError(LearnError):
    """Mean-estimation geometry is singular (chosen angles nearly parallel)."""

    def __init__(self, message):
        super().__init__(message, stage="mean-solve")


class BudgetExhausted(LearnError):
    """An adaptive routine ran out of its copy budget before converging."""


class ConstructionFailure(GtlError):
    """A randomized construction exhausted its retry budget.

    ``best_overlap`` records the best (smallest) violating overlap found.
    """

    def __init__(self, message, best_overlap=None):
        super().__init__(message)
        self.best_overlap = best_overlap
