"""Exception hierarchy shared across the simulator."""


class ProxopsError(Exception):
    """Base class for all package errors."""


class ConfigError(ProxopsError):
    """A configuration document is missing, unreadable, or inconsistent."""


class ValidationError(ProxopsError):
    """A value or structure violates a documented invariant."""


class PropagationError(ProxopsError):
    """Dynamics produced a non-finite state.

    Carries the step context so a failed run can be traced back to the
    offending inputs.
    """

    def __init__(self, message, step=None, dt=None):
        super().__init__(message)
        self.step = step
        self.dt = dt


class LifecycleError(ProxopsError):
    """An episode operation was called in the wrong phase (e.g. step after
    termination, or before the first reset)."""


class TrainingError(ProxopsError):
    """A learner update produced a non-finite loss or gradient."""
