"""Exception hierarchy shared by all modules."""


class PinningError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(PinningError, ValueError):
    """A parameter lies outside the domain where an operation is defined."""


class HypothesisError(PinningError, ValueError):
    """A nonlinearity or kernel fails one of the structural assumptions."""


class BranchDomainError(PinningError, ValueError):
    """A value lies outside the range of a monotone branch of g."""


class CaseError(PinningError, ValueError):
    """The requested construction does not exist for this phase-plane case."""


class PreconditionError(PinningError, ValueError):
    """Inputs do not satisfy the hypotheses required by a check."""


class NumericalError(PinningError, RuntimeError):
    """A root-finder or quadrature failed to converge or bracket."""


class InstabilityError(NumericalError):
    """The time integrator produced a non-finite field.

    ``t_last`` is the last time at which the field was finite.
    """

    def __init__(self, message, t_last):
        super().__init__(message)
        self.t_last = t_last
