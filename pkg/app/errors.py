from typing import TYPE_CHECKING, List, Optional

if TYPE_CHECKING:
    from app.models import SolveReport, Violation


class MdpError(ValueError):
    """Base class for every error raised by the solver and experiment services."""


class InvalidModelError(MdpError):
    def __init__(self, violations: List["Violation"]):
        self.violations = violations
        details = "; ".join(v.message for v in violations)
        super().__init__(f"invalid model: {details}")


class ModelMismatchError(MdpError):
    """A query names a state or action the model does not have."""


class PreconditionError(MdpError):
    """An operation was called outside its contract (bad gamma, empty grid, ...)."""


class NonConvergenceError(MdpError):
    """
    Value iteration stopped at max_iterations without reaching Δ < ε.

    The partial SolveReport is kept on `report` so callers can inspect it.
    """

    def __init__(self, report: Optional["SolveReport"], message: Optional[str] = None):
        self.report = report
        if message is None and report is not None:
            message = (
                f"value iteration did not converge after {report.iterations} iterations "
                f"(last delta {report.final_delta:.3e})"
            )
        super().__init__(message or "iteration did not converge")


class NoCrossingError(MdpError):
    """The optimal action is the same at both ends of a turning-point search."""


class ConfigError(MdpError):
    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)

