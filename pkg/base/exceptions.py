"""
Exception hierarchy shared by every slitflow package.

Numerical preconditions raise DomainError (a ValueError, so callers that
only know the standard library still catch it); the CLI maps the rest to
exit codes.
"""


class SlitFlowError(Exception):
    """Root of all slitflow errors"""


class DomainError(SlitFlowError, ValueError):
    """Raised when an operation is called outside its admissible domain"""

    def __init__(self, message, diagnostic=None):
        self.diagnostic = dict(diagnostic or {})
        if self.diagnostic:
            details = ", ".join(f"{key}={value!r}" for key, value in self.diagnostic.items())
            message = f"{message} ({details})"
        super().__init__(message)


class EvaluationError(SlitFlowError):
    """Raised when a sampled field produces non-finite values"""


class StepRejectedError(SlitFlowError):
    """Raised when a Runge-Kutta stage moves particles onto the obstacle"""

    def __init__(self, time, dt, stage, indices, reason=""):
        self.time = time
        self.dt = dt
        self.stage = stage
        self.indices = list(indices)
        shown = self.indices[:5]
        message = (f"step rejected at t={time:.6g} (dt={dt:.3g}, stage {stage}): "
                   f"{len(self.indices)} particle(s) inadmissible, first {shown}")
        if reason:
            message = f"{message}; {reason}"
        super().__init__(message)


class ConfigError(SlitFlowError):
    """Raised when a run configuration cannot be parsed or validated"""

    def __init__(self, message, line_number=None, key=None):
        self.line_number = line_number
        self.key = key
        prefix = ""
        if line_number is not None:
            prefix = f"line {line_number}: "
        if key is not None:
            prefix = f"{prefix}'{key}': "
        super().__init__(f"{prefix}{message}")
