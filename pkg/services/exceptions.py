class INLError(Exception):
    """Base class for numerical failures raised by the simulation services."""


class DomainError(INLError, ValueError):
    """The nonlinear map is undefined here: the state sits on a cell boundary."""


class StepTooLargeError(INLError):
    """Norm drift over a single integration step exceeded the tolerance."""


class ConvergenceError(INLError):
    """A series or a quadrature did not reach the requested tolerance."""


class InvalidOperatorError(INLError, ValueError):
    """Operator is not hermitian/unitary, or violates the trace condition."""


class ConfigError(ValueError):
    """Experiment configuration is incomplete or invalid."""
