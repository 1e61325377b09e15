"""Exception types raised across the package."""


class MimoRelayError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(MimoRelayError, ValueError):
    """A physical or numerical parameter is out of its admissible range."""


class SingularChannelError(MimoRelayError):
    """The baseband equivalent channel is too ill-conditioned to invert."""

    def __init__(self, cond: float):
        super().__init__(f"equivalent channel condition number {cond:.3e} exceeds limit")
        self.cond = cond


class SimulationFailure(MimoRelayError, RuntimeError):
    """A Monte Carlo run produced no usable draws."""


class OptimizerFailure(MimoRelayError, RuntimeError):
    """An optimizer could not certify an interior maximum."""


class ConfigError(MimoRelayError, ValueError):
    """Experiment configuration failed validation."""
