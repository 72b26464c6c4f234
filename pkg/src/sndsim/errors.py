"""Exception types shared across the package."""


class SndError(Exception):
    """Base class for all sndsim errors."""


class ParameterError(SndError, ValueError):
    """An argument is outside its documented domain."""


class ConfigError(SndError, ValueError):
    """A configuration is invalid.

    ``violations`` lists every violated invariant, not only the first.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class IntegrationError(SndError, RuntimeError):
    """ODE integration produced a non-finite state."""

    def __init__(self, time, message=None):
        self.time = time
        super().__init__(message or f"non-finite state at t = {time:.6g} s")


class ResolutionError(SndError, RuntimeError):
    """Time step too coarse for the fastest transient in the system."""

    def __init__(self, time, message=None):
        self.time = time
        super().__init__(
            message or f"state change exceeded 20% of I_C in one step at t = {time:.6g} s; reduce dt"
        )


class FitError(SndError, RuntimeError):
    """A least-squares search hit a non-finite residual.

    ``last_params`` holds the last parameter vector with a finite residual.
    """

    def __init__(self, last_params, message=None):
        self.last_params = last_params
        super().__init__(message or "non-finite residual during least-squares search")


class CalibrationError(SndError, RuntimeError):
    """A scalar calibration target could not be bracketed or reached."""


class VerificationError(SndError, AssertionError):
    """Two independent evaluation routes disagreed beyond tolerance."""
