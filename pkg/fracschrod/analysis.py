"""Analytic references, error metrics, the dense-matrix oracle, bound-state counting,
tail extraction and tunneling quantities."""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy import fft, linalg, optimize, signal

from .errors import (
    GridError,
    NoForbiddenRegionError,
    NonOrthogonalError,
    NormalizationError,
    OracleSizeError,
    PotentialError,
    ZeroOverlapError,
)
from .grid import Grid, WaveField, abs_k_power
from .potentials import PotentialKind, PotentialSpec, sample_potential
from .solver import EigenSolution, Parity, SolveConfig, imaginary_time_solve
from .splitting import SplitScheme, scheme_sixth

logger = logging.getLogger(__name__)

ORACLE_MAX_POINTS = 1024
NOISE_FLOOR = 1e-13
MARGINAL_TOL = 1e-6
ORTHOGONALITY_TOL = 1e-8
NORMALIZATION_TOL = 1e-8
MAX_SOLVER_STATES = 64
PEAK_PROMINENCE = 1e-3


@dataclass(frozen=True, eq=False)
class ErrorReport:
    """
    Pointwise and energy error of a numerical state against a reference.

    Attributes:
        pointwise (np.ndarray): |psi_num - psi_ref| per sample, after sign alignment
        max_pointwise (float): largest pointwise error
        energy_error (float): |e_num - e_ref|
        index (int): state ordinal
        alpha (float): fractional order
    """

    pointwise: np.ndarray = field(repr=False)
    max_pointwise: float
    energy_error: float
    index: int
    alpha: float


@dataclass(frozen=True, eq=False)
class TailFit:
    """
    ln|psi| over the classically forbidden zone right of the state's peak.

    Attributes:
        region (np.ndarray): grid indices of the zone, noise-floor samples removed
        x (np.ndarray): positions of those samples
        log_abs (np.ndarray): ln|psi| there
        local_slope (np.ndarray): d ln|psi| / dx there
        node_count (int): sign changes of psi inside the zone
    """

    region: np.ndarray
    x: np.ndarray
    log_abs: np.ndarray
    local_slope: np.ndarray
    node_count: int

    def slope_at(self, x0: float) -> float:
        """Local slope interpolated at x0, which must lie inside the zone."""
        if not self.x[0] <= x0 <= self.x[-1]:
            raise NoForbiddenRegionError(f"x0 = {x0} is outside the tail region [{self.x[0]}, {self.x[-1]}]")
        return float(np.interp(x0, self.x, self.local_slope))


class BoundStateReport(NamedTuple):
    """Bound-state count of a finite well with the states lying within 1e-6 of the barrier."""

    count: int
    marginal: int
    energies: tuple[float, ...]
    method: str


def ring_analytic_energy(n: int, alpha: float) -> float:
    """E_n = (pi * ceil(n/2))^alpha / 2 on the ring [-1, 1)."""
    if n < 0:
        raise ValueError(f"state index must be non-negative, got {n}")
    return 0.5 * (math.pi * math.ceil(n / 2)) ** alpha


def ring_analytic_state(n: int, grid: Grid) -> WaveField:
    """Normalized ring eigenstate number n.

    The mode number is m = ceil(n/2). Odd n gives cos(pi m x), the even member of
    the degenerate pair, even n >= 2 gives sin(pi m x), and n = 0 the constant.

    Args:
        n: state index.
        grid: ring grid.

    Returns:
        The analytic state sampled on grid.
    """
    if n < 0:
        raise ValueError(f"state index must be non-negative, got {n}")
    m = math.ceil(n / 2)
    if 2 * m >= grid.n_points / 2:
        raise GridError(f"mode {m} is not representable on {grid.n_points} points")
    x = grid.x
    if n == 0:
        values = np.ones_like(x)
    elif n % 2 == 1:
        values = np.cos(math.pi * m * x)
    else:
        values = np.sin(math.pi * m * x)
    return WaveField(grid, values).normalized()


def compare_state(
    num: WaveField, ref: WaveField, e_num: float, e_ref: float, index: int = 0, alpha: float = float("nan")
) -> ErrorReport:
    """Pointwise comparison of a numerical state with a reference after sign alignment.

    Args:
        num: numerical state, normalized.
        ref: reference state on the same grid, normalized.
        e_num: numerical energy.
        e_ref: reference energy.
        index: state ordinal recorded in the report.
        alpha: fractional order recorded in the report.

    Returns:
        The ErrorReport.
    """
    if num.grid != ref.grid:
        raise GridError("compare_state needs both states on the same grid")
    for name, state in (("numerical", num), ("reference", ref)):
        if abs(state.norm() - 1.0) > NORMALIZATION_TOL:
            raise NormalizationError(f"{name} state has norm {state.norm()}")
    overlap = ref.inner(num).real
    if abs(overlap) < ORTHOGONALITY_TOL:
        raise ZeroOverlapError(f"state {index}: overlap {overlap:.3e} with the reference is zero, sign is undefined")
    pointwise = np.abs(num.values - math.copysign(1.0, overlap) * ref.values)
    return ErrorReport(
        pointwise=pointwise,
        max_pointwise=float(np.max(pointwise)),
        energy_error=abs(e_num - e_ref),
        index=index,
        alpha=alpha,
    )


def dense_hamiltonian(spec: PotentialSpec, grid: Grid, alpha: float) -> np.ndarray:
    """Real symmetric matrix of H = F^-1 diag(|k|^alpha / 2) F + diag(V) on the grid.

    The operator is applied to every unit column at once, then (H + H^T) / 2 is taken.
    """
    n = grid.n_points
    if n > ORACLE_MAX_POINTS:
        raise OracleSizeError(f"dense oracle is limited to {ORACLE_MAX_POINTS} points, grid has {n}")
    half_power = 0.5 * abs_k_power(grid, alpha)
    kinetic = fft.ifft(half_power[:, np.newaxis] * fft.fft(np.eye(n), axis=0), axis=0).real
    hamiltonian = kinetic + np.diag(sample_potential(spec, grid))
    return 0.5 * (hamiltonian + hamiltonian.T)


def dense_oracle_eigen(
    spec: PotentialSpec, grid: Grid, alpha: float, n_states: int
) -> list[tuple[float, WaveField]]:
    """Lowest n_states eigenpairs by dense symmetric eigendecomposition.

    Eigenvectors are rescaled to unit dx-weighted norm and sign-fixed so their
    largest-magnitude sample is positive.
    """
    hamiltonian = dense_hamiltonian(spec, grid, alpha)
    if not 1 <= n_states <= grid.n_points:
        raise ValueError(f"n_states must lie in [1, {grid.n_points}], got {n_states}")
    energies, vectors = linalg.eigh(hamiltonian, subset_by_index=[0, n_states - 1])
    pairs = []
    for energy, vector in zip(energies, vectors.T):
        vector = vector / math.sqrt(grid.dx)
        if vector[np.argmax(np.abs(vector))] < 0.0:
            vector = -vector
        pairs.append((float(energy), WaveField(grid, vector)))
    logger.debug("dense oracle alpha=%.4g: lowest energies %s", alpha, [e for e, _ in pairs[:4]])
    return pairs


def oracle_overlap(
    solutions: list[EigenSolution], oracle: list[tuple[float, WaveField]]
) -> list[tuple[float, float]]:
    """(|E_solver - E_oracle|, |<psi_solver, psi_oracle>|) for each paired state."""
    return [
        (abs(solution.energy - energy), abs(solution.psi.inner(state)))
        for solution, (energy, state) in zip(solutions, oracle)
    ]


def effective_half_width(spec: PotentialSpec, grid: Grid) -> float:
    """Half-width of the well as resolved on the grid: interior sample count * dx / 2."""
    if spec.kind is not PotentialKind.FINITE_WELL:
        raise PotentialError(f"effective_half_width needs a finite well, got {spec.kind.value}")
    interior = int(np.count_nonzero(np.abs(grid.x) < spec.half_width))
    return 0.5 * interior * grid.dx


def _matching_functions(v0: float, half_width: float, box_half_length: float | None):
    barrier = None if box_half_length is None else box_half_length - half_width
    if barrier is not None and barrier <= 0.0:
        raise PotentialError(f"box half length {box_half_length} must exceed the well half width {half_width}")

    def wavenumbers(energy):
        return math.sqrt(2.0 * energy), math.sqrt(2.0 * (v0 - energy))

    def even(energy):
        k, kappa = wavenumbers(energy)
        damping = 1.0 if barrier is None else math.tanh(kappa * barrier)
        return k * math.sin(k * half_width) - kappa * damping * math.cos(k * half_width)

    def odd(energy):
        k, kappa = wavenumbers(energy)
        damping = 1.0 if barrier is None else 1.0 / math.tanh(kappa * barrier)
        return k * math.cos(k * half_width) + kappa * damping * math.sin(k * half_width)

    return even, odd


def finite_well_transcendental_levels(
    v0: float, half_width: float, box_half_length: float | None = None, samples: int = 20_000
) -> list[float]:
    """Bound energies of the ordinary (alpha = 2) finite well from its matching conditions.

    Even states solve k tan(k a) = kappa tanh(kappa (L - a)) and odd states
    -k cot(k a) = kappa coth(kappa (L - a)), with k = sqrt(2E), kappa = sqrt(2(v0 - E)).
    Without a box (L infinite) both hyperbolic factors are 1.

    Args:
        v0: barrier height.
        half_width: well half width a.
        box_half_length: half length L of a periodic box centred on the well.
        samples: energy samples used to bracket the roots.

    Returns:
        Sorted energies strictly inside (0, v0).
    """
    if not v0 > 0.0 or not half_width > 0.0:
        raise PotentialError(f"v0 and half_width must be positive, got {v0}, {half_width}")
    energies = np.linspace(0.0, v0, samples + 2)[1:-1]
    levels = []
    for matching in _matching_functions(v0, half_width, box_half_length):
        values = np.array([matching(e) for e in energies])
        for i in np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0.0)[0]:
            levels.append(float(optimize.brentq(matching, energies[i], energies[i + 1], xtol=1e-14)))
    return sorted(levels)


def finite_well_transcendental_count(v0: float, half_width: float, box_half_length: float | None = None) -> int:
    """Number of alpha = 2 finite-well bound states from the matching conditions."""
    return len(finite_well_transcendental_levels(v0, half_width, box_half_length))


def _solver_bound_energies(
    spec: PotentialSpec, grid: Grid, config: SolveConfig, scheme: SplitScheme
) -> list[float]:
    basis: list[WaveField] = []
    energies = []
    for i in range(MAX_SOLVER_STATES):
        parity = Parity.EVEN if i % 2 == 0 else Parity.ODD
        state_config = replace(config, parity=parity, deflation_basis=tuple(basis))
        solution = imaginary_time_solve(state_config, spec, grid, scheme)
        energies.append(solution.energy)
        if solution.energy >= spec.v0:
            return energies
        basis.append(solution.psi)
    logger.warning("stopped counting after %d states, all below v0 = %g", MAX_SOLVER_STATES, spec.v0)
    return energies


def bound_state_report(
    alpha: float,
    spec: PotentialSpec,
    grid: Grid,
    method: str = "auto",
    config: SolveConfig | None = None,
    scheme: SplitScheme | None = None,
) -> BoundStateReport:
    """Count finite-well eigenvalues strictly below v0.

    Args:
        alpha: fractional order.
        spec: finite well.
        grid: run grid.
        method: "oracle", "solver" or "auto" (oracle up to 1024 points).
        config: solver settings for the solver method; alpha is taken from the argument.
        scheme: splitting scheme for the solver method, sixth order by default.

    Returns:
        BoundStateReport with the count, the marginal count and the bound energies.
    """
    if spec.kind is not PotentialKind.FINITE_WELL:
        raise PotentialError(f"bound-state counting needs a finite well, got {spec.kind.value}")
    if method == "auto":
        method = "oracle" if grid.n_points <= ORACLE_MAX_POINTS else "solver"
    if method == "oracle":
        energies = list(linalg.eigvalsh(dense_hamiltonian(spec, grid, alpha)))
    elif method == "solver":
        config = replace(config or SolveConfig(alpha), alpha=alpha)
        energies = _solver_bound_energies(spec, grid, config, scheme or scheme_sixth())
    else:
        raise ValueError(f"unknown counting method {method!r}, expected auto, oracle or solver")

    bound = tuple(float(e) for e in sorted(energies) if e < spec.v0)
    marginal = sum(1 for e in energies if abs(e - spec.v0) <= MARGINAL_TOL)
    if marginal:
        logger.warning(
            "alpha=%.4g: %d state(s) lie within %.0e of v0; count is marginal", alpha, marginal, MARGINAL_TOL
        )
    logger.info("alpha=%.4g: %d bound states (%s)", alpha, len(bound), method)
    return BoundStateReport(len(bound), marginal, bound, method)


def count_bound_states(alpha: float, spec: PotentialSpec, grid: Grid, method: str = "auto") -> int:
    """Number of finite-well eigenvalues strictly below v0."""
    return bound_state_report(alpha, spec, grid, method).count


def extract_tail(sol: EigenSolution, spec: PotentialSpec) -> TailFit:
    """ln|psi| and its slope in the forbidden zone right of the peak of psi.

    The zone starts at the first sample right of the peak with V > E and extends
    while V > E holds. Samples with |psi| below 1e-13 are dropped.
    """
    psi = sol.psi.values.real
    grid = sol.psi.grid
    potential = sample_potential(spec, grid)
    peak = int(np.argmax(np.abs(psi)))
    forbidden = potential > sol.energy
    ahead = np.nonzero(forbidden[peak:])[0]
    if ahead.size == 0:
        raise NoForbiddenRegionError(f"state {sol.index} has no sample with V > E right of its peak")
    start = peak + int(ahead[0])
    stop = start
    while stop < grid.n_points and forbidden[stop]:
        stop += 1
    zone = np.arange(start, stop)
    region = zone[np.abs(psi[zone]) >= NOISE_FLOOR]
    if region.size < 2:
        raise NoForbiddenRegionError(f"state {sol.index}: forbidden zone lies below the noise floor")

    x = grid.x[region]
    log_abs = np.log(np.abs(psi[region]))
    signs = np.sign(psi[region])
    return TailFit(
        region=region,
        x=x,
        log_abs=log_abs,
        local_slope=np.gradient(log_abs, x),
        node_count=int(np.count_nonzero(signs[:-1] * signs[1:] < 0.0)),
    )


def tunneling_frequency(e0: float, e1: float) -> float:
    """f = |E1 - E0| / 2 pi."""
    return abs(e1 - e0) / (2.0 * math.pi)


def tunneling_period(times: np.ndarray, right_mass: np.ndarray) -> float:
    """Time of the first maximum of the right-well probability, the left-to-right transfer time.

    Maxima with a prominence below 1e-3 of the range are splitting ripples and are
    skipped. The peak sample is refined by a parabola through it and its neighbours.
    """
    right_mass = np.asarray(right_mass)
    peaks, _ = signal.find_peaks(right_mass, prominence=PEAK_PROMINENCE * np.ptp(right_mass))
    if peaks.size == 0:
        raise ValueError("right-well probability has no interior maximum; propagate longer")
    i = int(peaks[0])
    y0, y1, y2 = right_mass[i - 1], right_mass[i], right_mass[i + 1]
    curvature = y0 - 2.0 * y1 + y2
    shift = 0.5 * (y0 - y2) / curvature if curvature != 0.0 else 0.0
    return float(times[i] + shift * (times[i + 1] - times[i]))


def left_right_superpositions(psi_plus: WaveField, psi_minus: WaveField) -> tuple[WaveField, WaveField]:
    """(psi_L, psi_R) = ((psi+ - psi-) / sqrt 2, (psi+ + psi-) / sqrt 2), each normalized.

    psi- is first oriented so that integral x psi+ psi- dx > 0, which puts psi_L on x < 0.
    """
    if psi_plus.grid != psi_minus.grid:
        raise GridError("superposition of states on different grids")
    overlap = abs(psi_plus.inner(psi_minus))
    if overlap > ORTHOGONALITY_TOL:
        raise NonOrthogonalError(f"|<psi+, psi->| = {overlap:.3e} exceeds {ORTHOGONALITY_TOL}")
    minus = psi_minus.values
    dipole = psi_plus.grid.dx * np.sum(psi_plus.grid.x * (psi_plus.values.conj() * minus).real)
    if dipole < 0.0:
        minus = -minus
    left = WaveField(psi_plus.grid, (psi_plus.values - minus) / math.sqrt(2.0)).normalized()
    right = WaveField(psi_plus.grid, (psi_plus.values + minus) / math.sqrt(2.0)).normalized()
    return left, right
