"""Exceptions raised by the fracschrod package."""


class FractionalSchrodingerError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FractionalSchrodingerError, ValueError):
    """A run configuration value is missing, unknown or malformed."""


class GridError(FractionalSchrodingerError, ValueError):
    """A grid or wave field violates its construction invariants."""


class DomainError(FractionalSchrodingerError, ValueError):
    """An argument lies outside the supported domain of a function."""


class SchemeError(FractionalSchrodingerError, ValueError):
    """A splitting scheme is unknown, inconsistent or used in the wrong mode."""


class PotentialError(FractionalSchrodingerError, ValueError):
    """A potential specification is invalid for the requested grid."""


class OracleSizeError(FractionalSchrodingerError, ValueError):
    """The dense oracle was asked to build a matrix above its size guard."""


class ZeroOverlapError(FractionalSchrodingerError, ValueError):
    """Two states are orthogonal where a sign alignment was requested."""


class NormalizationError(FractionalSchrodingerError, ValueError):
    """A state that must be normalized is not."""


class NonOrthogonalError(FractionalSchrodingerError, ValueError):
    """Two states that must be orthogonal overlap."""


class NoForbiddenRegionError(FractionalSchrodingerError, ValueError):
    """A state has no classically forbidden region to analyse."""


class AccuracyError(FractionalSchrodingerError, RuntimeError):
    """A series evaluation could not reach its accuracy budget."""


class GammaOverflowError(FractionalSchrodingerError, OverflowError):
    """The Gamma function overflows double precision."""


class SolverError(FractionalSchrodingerError, RuntimeError):
    """A numerical solve failed.

    Attributes:
        index (int | None): ordinal of the state being solved when the error occurred
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index

    def with_index(self, index: int) -> "SolverError":
        """Return a copy of this error tagged with the failing state index."""
        tagged = type(self)(f"state {index}: {self}", index=index)
        tagged.__cause__ = self
        return tagged


class NoConvergenceError(SolverError):
    """The iteration hit its step cap before converging."""


class InstabilityError(SolverError):
    """Non-finite samples appeared, or the norm drifted beyond its budget."""


class DegenerateError(SolverError):
    """A projection removed (almost) the entire state."""


class FitError(SolverError):
    """A convergence-order fit has no usable data above the rounding floor."""
