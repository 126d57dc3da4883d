"""Exception hierarchy shared by the solvers, the experiment harness and the CLI."""

from typing import List, Optional, Sequence, Tuple


class SAAError(Exception):
    """Base class for every error raised deliberately by this package."""


class ConfigError(SAAError, ValueError):
    """The experiment configuration failed validation."""


class ReportIOError(SAAError, OSError):
    """Artifacts could not be read or written."""


class SolverError(SAAError, RuntimeError):
    """A numerical solve failed. `coordinates` is the (N, replication) pair when known."""

    def __init__(self, message: str, coordinates: Optional[Tuple[int, int]] = None):
        super().__init__(message)
        self.coordinates = coordinates

    def with_coordinates(self, N: int, replication: int) -> "SolverError":
        self.coordinates = (N, replication)
        return self

    def __str__(self) -> str:
        base = super().__str__()
        if self.coordinates is None:
            return base
        return f"{base} (N={self.coordinates[0]}, replication={self.coordinates[1]})"


class NotPositiveDefiniteError(SolverError):
    """Cholesky pivot or CG curvature breakdown; `index` is the pivot or iteration index."""

    def __init__(self, message: str, index: int):
        super().__init__(f"{message} at index {index}")
        self.index = index


class ConvergenceError(SolverError):
    """Iteration cap reached before the residual tolerance."""

    def __init__(self, message: str, history: Sequence[float]):
        super().__init__(message)
        self.history: List[float] = list(history)
