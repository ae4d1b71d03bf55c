"""Declarative potentials: the particle on a ring, harmonic oscillator, finite well,
double well and tabulated samples."""

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import PotentialError
from .grid import Grid

SYMMETRY_RTOL = 1e-10


class PotentialKind(str, Enum):
    """Supported potential families."""

    RING_ZERO = "ring_zero"
    HARMONIC = "harmonic"
    FINITE_WELL = "finite_well"
    DOUBLE_WELL = "double_well"
    TABULATED = "tabulated"


class Symmetry(str, Enum):
    """Result of the x -> -x symmetry test."""

    SYMMETRIC = "symmetric"
    ASYMMETRIC = "asymmetric"


# default run domains (x_min, x_max, n_points); non-ring domains use dx = 1e-2
DEFAULT_DOMAINS = {
    PotentialKind.RING_ZERO: (-1.0, 1.0, 480),
    PotentialKind.HARMONIC: (-10.0, 10.0, 2000),
    PotentialKind.FINITE_WELL: (-8.0, 8.0, 1600),
    PotentialKind.DOUBLE_WELL: (-8.0, 8.0, 1600),
}


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """
    A potential V(x) described by its family and parameters.

    Attributes:
        kind (PotentialKind): the family
        v0 (float): finite well barrier height
        half_width (float): finite well half width
        c2 (float): double well quadratic coefficient
        c4 (float): double well quartic coefficient
        c0 (float): double well offset
        samples (np.ndarray | None): tabulated values
        source_x (np.ndarray | None): abscissae the tabulated values were given at
    """

    kind: PotentialKind
    v0: float = 100.0
    half_width: float = 1.0
    c2: float = -4.0
    c4: float = 0.5
    c0: float = 8.0
    samples: np.ndarray | None = field(default=None, repr=False)
    source_x: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", PotentialKind(self.kind))
        if self.kind is PotentialKind.FINITE_WELL:
            if not self.v0 > 0.0:
                raise PotentialError(f"finite well v0 must be positive, got {self.v0}")
            if not self.half_width > 0.0:
                raise PotentialError(f"finite well half_width must be positive, got {self.half_width}")
        if self.kind is PotentialKind.TABULATED:
            if self.samples is None:
                raise PotentialError("tabulated potential needs samples")
            samples = np.asarray(self.samples, dtype=float)
            if samples.ndim != 1 or not np.all(np.isfinite(samples)):
                raise PotentialError("tabulated samples must be a finite one-dimensional array")
            object.__setattr__(self, "samples", samples)

    def params(self) -> dict:
        """Kind-specific parameters, as written to run summaries."""
        if self.kind is PotentialKind.FINITE_WELL:
            return {"v0": self.v0, "half_width": self.half_width}
        if self.kind is PotentialKind.DOUBLE_WELL:
            return {"c2": self.c2, "c4": self.c4, "c0": self.c0}
        if self.kind is PotentialKind.TABULATED:
            return {"n_samples": int(self.samples.size)}  # type: ignore[union-attr]
        return {}


def ring() -> PotentialSpec:
    """V = 0 on a periodic domain."""
    return PotentialSpec(PotentialKind.RING_ZERO)


def harmonic() -> PotentialSpec:
    """V = x^2 / 2."""
    return PotentialSpec(PotentialKind.HARMONIC)


def finite_well(v0: float = 100.0, half_width: float = 1.0) -> PotentialSpec:
    """V = 0 for |x| < half_width, v0 otherwise."""
    return PotentialSpec(PotentialKind.FINITE_WELL, v0=v0, half_width=half_width)


def double_well(c2: float = -4.0, c4: float = 0.5, c0: float = 8.0) -> PotentialSpec:
    """V = c2 x^2 + c4 x^4 + c0; the defaults put the minima at x = ±2 with V = 0."""
    return PotentialSpec(PotentialKind.DOUBLE_WELL, c2=c2, c4=c4, c0=c0)


def tabulated(samples: np.ndarray, source_x: np.ndarray | None = None) -> PotentialSpec:
    """Potential given by samples on the run grid."""
    return PotentialSpec(PotentialKind.TABULATED, samples=samples, source_x=source_x)


def load_tabulated(path: str | Path) -> PotentialSpec:
    """Read a two-column (x, V) CSV file; a header row is optional.

    Args:
        path: file to read.

    Returns:
        A tabulated PotentialSpec remembering its abscissae.
    """
    xs, vs = [], []
    with open(path, "r", encoding="utf-8", newline="") as csv_file:
        for line_number, row in enumerate(csv.reader(csv_file), start=1):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise PotentialError(f"{path}:{line_number}: expected two columns (x, V), got {len(row)}")
            try:
                x_value, v_value = float(row[0]), float(row[1])
            except ValueError as exc:
                if line_number == 1:
                    continue
                raise PotentialError(f"{path}:{line_number}: cannot parse {row}") from exc
            xs.append(x_value)
            vs.append(v_value)
    if not vs:
        raise PotentialError(f"{path}: no potential samples found")
    return tabulated(np.array(vs), np.array(xs))


def sample_potential(spec: PotentialSpec, grid: Grid) -> np.ndarray:
    """Evaluate V at every grid sample.

    Args:
        spec: the potential.
        grid: the run grid.

    Returns:
        Real array of length grid.n_points.
    """
    x = grid.x
    if spec.kind is PotentialKind.RING_ZERO:
        return np.zeros_like(x)
    if spec.kind is PotentialKind.HARMONIC:
        return 0.5 * x**2
    if spec.kind is PotentialKind.FINITE_WELL:
        # strict interior: samples on |x| = half_width belong to the barrier
        return np.where(np.abs(x) < spec.half_width, 0.0, spec.v0)
    if spec.kind is PotentialKind.DOUBLE_WELL:
        return spec.c2 * x**2 + spec.c4 * x**4 + spec.c0

    samples = spec.samples
    assert samples is not None
    if samples.size != grid.n_points:
        raise PotentialError(f"tabulated potential has {samples.size} samples, grid has {grid.n_points}")
    if spec.source_x is not None:
        source_x = np.asarray(spec.source_x, dtype=float)
        if source_x.shape != x.shape or np.max(np.abs(source_x - x)) > 1e-9 * grid.span:
            raise PotentialError("tabulated abscissae do not match the run grid")
    return samples.copy()


def parity_of_potential(spec: PotentialSpec, grid: Grid) -> Symmetry:
    """Classify V as symmetric when max|V(x) - V(-x)| < 1e-10 max|V|."""
    values = sample_potential(spec, grid)
    mirrored = values[grid.reflection_index()]
    scale = float(np.max(np.abs(values)))
    if np.max(np.abs(values - mirrored)) <= SYMMETRY_RTOL * scale:
        return Symmetry.SYMMETRIC
    return Symmetry.ASYMMETRIC
