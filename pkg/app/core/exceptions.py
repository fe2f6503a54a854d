"""Exception hierarchy shared by the oracle, the learning core and the pipeline."""
from typing import Optional


class RobustnessError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(RobustnessError):
    """Invalid pipeline configuration."""


class InfeasibleSpecError(RobustnessError):
    """A generator spec asks for a graph that cannot exist."""


class EdgeListParseError(RobustnessError):
    """Malformed edge-list file."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class GraphStateError(RobustnessError):
    """Operation not valid for the current liveness mask."""


class AttackError(RobustnessError):
    """Invalid attack parameters."""


class CurveMismatchError(RobustnessError):
    """Two robustness curves or score lists cannot be compared."""


class SpectralError(RobustnessError):
    """Invalid input to a spectral routine."""


class DiffError(RobustnessError):
    """Error raised by the differentiable core."""


class ShapeError(DiffError):
    """Operand shapes violate an operator's contract."""

    def __init__(self, op: str, message: str):
        self.op = op
        super().__init__(f"{op}: {message}")


class TapeError(DiffError):
    """Backward pass requested on something the tape cannot differentiate."""


class ModelError(RobustnessError):
    """Model configuration or checkpoint problem."""


class DatasetError(RobustnessError):
    """Dataset missing, inconsistent or tampered with."""
