from typing import Iterable, List, Optional

__all__ = [
    "LabError",
    "ConfigError",
    "PreconditionError",
    "InsufficientSamplesError",
    "NumericalValidityError",
    "TruncationError",
    "DivergenceError",
    "CFLError",
    "RecordError",
]


class LabError(Exception):
    """Base class for every error the lab raises on purpose.

    Subclasses pick the process exit code the CLI reports for them.
    """

    exit_code: int = 1

    def __init__(self, message: str):
        super().__init__(message)
        self._message = message

    def __str__(self) -> str:
        return self._message


class ConfigError(LabError):
    exit_code = 2

    def __init__(self, message: str, violations: Optional[Iterable[str]] = None):
        super().__init__(message)
        self.violations: List[str] = list(violations or [])

    def __str__(self) -> str:
        if not self.violations:
            return self._message
        listed = "\n".join(f"  - {v}" for v in self.violations)
        return f"{self._message}\n{listed}"


class PreconditionError(LabError, ValueError):
    exit_code = 1


class InsufficientSamplesError(PreconditionError):
    pass


class NumericalValidityError(LabError):
    """The run left the regime where the discretization means anything."""

    exit_code = 3


class TruncationError(NumericalValidityError):
    def __init__(self, leakage: float, threshold: float):
        super().__init__(
            f"windowed truncation invalid: leakage {leakage:.3e} exceeds threshold {threshold:.3e}"
        )
        self.leakage = leakage
        self.threshold = threshold


class DivergenceError(NumericalValidityError):
    pass


class CFLError(NumericalValidityError):
    def __init__(self, dt: float, suggested_dt: float):
        super().__init__(f"dt={dt:.3e} violates the advective CFL bound, use dt <= {suggested_dt:.3e}")
        self.dt = dt
        self.suggested_dt = suggested_dt


class RecordError(LabError):
    """A run artifact is missing, truncated or fails its checksum."""

    exit_code = 4
