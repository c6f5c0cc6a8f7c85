"""Error hierarchy shared by the services, the CLI and the HTTP routers."""

from typing import Optional


class RGCError(Exception):
    """Root of every error raised on purpose by this package."""


class ParameterValidationError(RGCError, ValueError):
    """Raised when an operation is called outside its domain (t <= 0, r <= 0, ...)."""


class InstanceTooLargeError(RGCError, ValueError):
    """Raised when an exact enumeration or an oracle is asked to exceed its size cap."""


class NumericalError(RGCError, ArithmeticError):
    """Raised when a computed quantity breaks an invariant it must satisfy."""


class TrialFailedError(RGCError, RuntimeError):
    def __init__(self, t: float, trial_index: int, cause: Optional[BaseException] = None):
        self.t = t
        self.trial_index = trial_index
        self.cause = cause
        detail = f"{type(cause).__name__}: {cause}" if cause is not None else "unknown error"
        super().__init__(f"trial {trial_index} at t={t} failed ({detail})")

    def __reduce__(self):
        # crosses process boundaries in the trial pool
        return type(self), (self.t, self.trial_index, self.cause)


def require(condition: bool, message: str) -> None:
    if not condition:
        raise ParameterValidationError(message)
