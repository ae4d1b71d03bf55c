"""Uniform periodic grids, wave fields and the Riesz derivative as a Fourier multiplier.

Conventions:
    - The grid is periodic: x_max is the image of x_min and is not sampled.
    - Norms and inner products carry the dx quadrature weight, so they approximate
      the continuum integrals.
    - Transforms use scipy.fft with its default (backward) normalization; only the
      forward/inverse round trip matters here.
"""

from dataclasses import dataclass

import numpy as np
from scipy import fft

from .errors import DomainError, GridError

MIN_POINTS = 4
MAX_ALPHA = 4.0


@dataclass(frozen=True)
class Grid:
    """
    A uniform one-dimensional periodic grid.

    Attributes:
        n_points (int): number of samples
        x_min (float): first sample, left end of the periodic cell
        x_max (float): right end of the periodic cell (not sampled)
    """

    n_points: int
    x_min: float
    x_max: float

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < MIN_POINTS:
            raise GridError(f"n_points must be an integer >= {MIN_POINTS}, got {self.n_points}")
        if not np.isfinite(self.x_min) or not np.isfinite(self.x_max) or self.x_max <= self.x_min:
            raise GridError(f"grid span must be positive, got [{self.x_min}, {self.x_max})")

    @property
    def span(self) -> float:
        """Length of the periodic cell."""
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        """Sample spacing."""
        return self.span / self.n_points

    @property
    def dk(self) -> float:
        """Wavenumber spacing 2π/(n·dx)."""
        return 2.0 * np.pi / (self.n_points * self.dx)

    @property
    def x(self) -> np.ndarray:
        """Sample positions."""
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def is_symmetric(self) -> bool:
        """True when the cell is centred on the origin, so x -> -x maps samples onto samples."""
        return abs(self.x_min + self.x_max) <= 1e-12 * self.span

    def reflection_index(self) -> np.ndarray:
        """Index map i -> j with x_j = -x_i (mod the period) on a symmetric grid."""
        if not self.is_symmetric:
            raise GridError(f"grid [{self.x_min}, {self.x_max}) is not symmetric about 0")
        return (-np.arange(self.n_points)) % self.n_points


def make_grid(n_points: int, x_min: float, x_max: float) -> Grid:
    """Build a periodic grid over [x_min, x_max) with n_points samples.

    Args:
        n_points: number of samples, at least 4.
        x_min: left end of the cell.
        x_max: right end of the cell, must exceed x_min.

    Returns:
        The validated Grid.
    """
    return Grid(int(n_points), float(x_min), float(x_max))


def wavenumbers(grid: Grid) -> np.ndarray:
    """Angular wavenumbers of the grid in FFT ordering (non-negative first)."""
    return 2.0 * np.pi * fft.fftfreq(grid.n_points, d=grid.dx)


def _check_alpha(alpha: float) -> None:
    if not np.isfinite(alpha) or alpha <= 0.0 or alpha > MAX_ALPHA:
        raise DomainError(f"fractional order must satisfy 0 < alpha <= {MAX_ALPHA}, got {alpha}")


def abs_k_power(grid: Grid, alpha: float) -> np.ndarray:
    """|k|^alpha per Fourier mode; the k = 0 mode is exactly 0."""
    _check_alpha(alpha)
    return np.abs(wavenumbers(grid)) ** alpha


@dataclass(frozen=True, eq=False)
class WaveField:
    """
    Complex wavefunction samples on a Grid.

    Attributes:
        grid (Grid): the grid the samples live on
        values (np.ndarray): n_points complex amplitudes
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise GridError(f"wave field has shape {values.shape}, grid expects ({self.grid.n_points},)")
        object.__setattr__(self, "values", values)

    def norm(self) -> float:
        """Discrete L2 norm with the dx weight."""
        return float(np.sqrt(self.grid.dx * np.vdot(self.values, self.values).real))

    def inner(self, other: "WaveField") -> complex:
        """<self, other> with the dx weight, conjugate-linear in self."""
        if other.grid != self.grid:
            raise GridError("inner product of wave fields on different grids")
        return complex(self.grid.dx * np.vdot(self.values, other.values))

    def normalized(self) -> "WaveField":
        """Return the field scaled to unit norm."""
        norm = self.norm()
        if not np.isfinite(norm) or norm == 0.0:
            raise GridError(f"cannot normalize a field with norm {norm}")
        return WaveField(self.grid, self.values / norm)

    def reflect(self) -> "WaveField":
        """Return psi(-x) on a symmetric grid."""
        return WaveField(self.grid, self.values[self.grid.reflection_index()])

    def probability_mass(self, mask: np.ndarray) -> float:
        """Integrated |psi|^2 over the samples selected by mask."""
        return float(self.grid.dx * np.sum(np.abs(self.values[mask]) ** 2))

    def is_finite(self) -> bool:
        """True when every sample is finite."""
        return bool(np.all(np.isfinite(self.values)))


def riesz_apply(psi: WaveField, alpha: float) -> WaveField:
    """Apply the Riesz fractional derivative F^-1(-|k|^alpha F(psi)).

    Args:
        psi: the field to differentiate; all samples must be finite.
        alpha: fractional order, 0 < alpha <= 4.

    Returns:
        The differentiated field. For alpha = 2 this is the ordinary second
        derivative of band-limited input.
    """
    multiplier = -abs_k_power(psi.grid, alpha)
    if not psi.is_finite():
        raise GridError("riesz_apply received non-finite samples")
    return WaveField(psi.grid, fft.ifft(multiplier * fft.fft(psi.values)))


def kinetic_phase(grid: Grid, alpha: float, tau: complex) -> np.ndarray:
    """Per-mode multiplier exp(-tau * |k|^alpha / 2) of one kinetic sub-step.

    tau is a_k * dt for imaginary time and 1j * a_k * dt for real time.
    """
    return np.exp(-tau * 0.5 * abs_k_power(grid, alpha))


def hamiltonian_apply(psi: WaveField, potential: np.ndarray, alpha: float) -> WaveField:
    """Apply H = -1/2 d^alpha + V to psi, the kinetic part spectrally."""
    potential = np.asarray(potential, dtype=float)
    if potential.shape != psi.values.shape:
        raise GridError(f"potential has shape {potential.shape}, field has {psi.values.shape}")
    kinetic = riesz_apply(psi, alpha).values
    return WaveField(psi.grid, -0.5 * kinetic + potential * psi.values)
