"""Exception hierarchy shared across the laboratory."""


class PcflabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PcflabError):
    """Input outside the mathematical domain (e.g. metric not positive)."""


class PreconditionError(PcflabError):
    """Operation precondition violated; carries the measured residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ParameterError(PcflabError):
    """Invalid numerical parameter (e.g. CFL violation)."""


class SingularityError(PcflabError):
    """Flow hit a degeneracy; carries location and time when known."""

    def __init__(self, message, time=None, location=None, min_eig=None):
        super().__init__(message)
        self.time = time
        self.location = location
        self.min_eig = min_eig


class StiffnessError(PcflabError):
    """Adaptive step-size underflow during ODE integration."""


class ValidationError(PcflabError):
    """Config validation failure; carries the offending field path."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
