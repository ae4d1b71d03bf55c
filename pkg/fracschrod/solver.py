"""Imaginary-time eigensolver and real-time propagation.

Each state is relaxed by repeated split steps in imaginary time. After every
step the iterate is deflated against the already converged states, projected
onto the requested parity, renormalized and phase-aligned with its
predecessor. Excited states of symmetric potentials are obtained by
alternating even and odd parity constraints.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy import fft

from .errors import (
    DegenerateError,
    GridError,
    InstabilityError,
    NoConvergenceError,
    NormalizationError,
    SchemeError,
    SolverError,
)
from .grid import Grid, WaveField, hamiltonian_apply, wavenumbers
from .potentials import PotentialKind, PotentialSpec, Symmetry, parity_of_potential, sample_potential
from .splitting import SplitScheme, SplitStepper, TimeMode, scheme_strang

logger = logging.getLogger(__name__)

DEGENERATE_NORM = 1e-10
ORTHONORMAL_TOL = 1e-8
ACCEPT_TOL = 1e-6
REAL_CAST_BUDGET = 1e-8
BOUNDARY_RTOL = 1e-8
NORM_DRIFT_TOL = 1e-6
INITIAL_MODES = 10
DEGENERACY_RTOL = 1e-9


class Parity(str, Enum):
    """Parity constraint of an iterate."""

    NONE = "none"
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class Refinement:
    """
    Final imaginary-time stage at a smaller step.

    Attributes:
        dt_fine (float): time step of the stage
        n_fine_steps (int): maximum number of steps of the stage
    """

    dt_fine: float = 1e-3
    n_fine_steps: int = 10_000


@dataclass(frozen=True)
class SolveConfig:
    """
    Settings of one imaginary-time solve.

    Attributes:
        alpha (float): fractional order
        dt (float): imaginary time step
        tol (float): convergence tolerance on the per-step sup-norm change
        max_iters (int): step cap of the main stage
        parity (Parity): parity constraint
        deflation_basis (tuple): orthonormal previously converged states
        refine (Refinement | None): optional final stage
        seed (int): seed of the initial state
        track_energy (bool): record the Rayleigh energy after every step
    """

    alpha: float
    dt: float = 1e-2
    tol: float = 1e-12
    max_iters: int = 1_000_000
    parity: Parity = Parity.NONE
    deflation_basis: tuple[WaveField, ...] = field(default=(), repr=False)
    refine: Refinement | None = None
    seed: int = 0
    track_energy: bool = False

    def __post_init__(self):
        object.__setattr__(self, "parity", Parity(self.parity))
        object.__setattr__(self, "deflation_basis", tuple(self.deflation_basis))
        if not 0.0 < self.alpha <= 4.0:
            raise SolverError(f"alpha must lie in (0, 4], got {self.alpha}")
        if not self.dt > 0.0 or not self.tol > 0.0 or self.max_iters < 1:
            raise SolverError(f"dt, tol and max_iters must be positive, got {self.dt}, {self.tol}, {self.max_iters}")
        if self.refine is not None and not 0.0 < self.refine.dt_fine < self.dt:
            raise SolverError(f"refinement step {self.refine.dt_fine} must be smaller than dt = {self.dt}")
        if self.deflation_basis:
            basis = np.array([state.values for state in self.deflation_basis])
            gram = self.deflation_basis[0].grid.dx * basis.conj() @ basis.T
            if np.max(np.abs(gram - np.eye(len(basis)))) > ORTHONORMAL_TOL:
                raise SolverError("deflation basis is not orthonormal within 1e-8")


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """
    One converged eigenstate.

    Attributes:
        psi (WaveField): real, normalized, sign-fixed eigenfunction
        energy (float): Rayleigh-quotient energy
        energy_decay (float): energy from the norm decay of one imaginary-time step
        iterations (int): imaginary-time steps taken, refinement included
        residual (float): ||H psi - E psi||
        alpha (float): fractional order
        index (int): ordinal within its spectrum
        parity (Parity): parity constraint it was solved under
        boundary_ok (bool): False when the state has not decayed at the domain edge
        energy_history (tuple): Rayleigh energy per step when tracked
    """

    psi: WaveField
    energy: float
    energy_decay: float
    iterations: int
    residual: float
    alpha: float
    index: int
    parity: Parity = Parity.NONE
    boundary_ok: bool = True
    energy_history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def estimator_gap(self) -> float:
        """|energy - energy_decay|."""
        return abs(self.energy - self.energy_decay)

    @property
    def accepted(self) -> bool:
        """True when both the estimator agreement and the residual are below 1e-6."""
        return self.estimator_gap < ACCEPT_TOL and self.residual < ACCEPT_TOL

    def summary(self) -> dict:
        """Fields written to run summaries."""
        return {
            "alpha": self.alpha,
            "index": self.index,
            "energy": self.energy,
            "energy_decay": self.energy_decay,
            "residual": self.residual,
            "iterations": self.iterations,
            "parity": self.parity.value,
            "boundary_ok": self.boundary_ok,
            "accepted": self.accepted,
        }


class _Constraint:
    """Deflation against a fixed basis followed by a parity projection, on raw arrays."""

    def __init__(self, grid: Grid, basis: tuple[WaveField, ...], parity: Parity):
        self.dx = grid.dx
        self.basis = np.array([state.values for state in basis]) if basis else None
        self.parity = parity
        self.mirror = grid.reflection_index() if parity is not Parity.NONE else None

    def __call__(self, values: np.ndarray) -> np.ndarray:
        if self.basis is not None:
            values = values - (self.dx * self.basis.conj() @ values) @ self.basis
        if self.mirror is not None:
            sign = 1.0 if self.parity is Parity.EVEN else -1.0
            values = 0.5 * (values + sign * values[self.mirror])
        return values


def _norm(grid: Grid, values: np.ndarray) -> float:
    return float(np.sqrt(grid.dx * np.sum(np.abs(values) ** 2)))


def initial_state(grid: Grid, parity: Parity, seed: int, n_modes: int = INITIAL_MODES) -> WaveField:
    """Smooth pseudo-random start: random Fourier coefficients for |k| <= n_modes * dk.

    Args:
        grid: run grid; must be symmetric when a parity is requested.
        parity: parity projection to apply.
        seed: seed of numpy's default generator.
        n_modes: band limit in units of the wavenumber spacing.

    Returns:
        A normalized real-valued WaveField, identical for identical seeds.
    """
    rng = np.random.default_rng(seed)
    n = grid.n_points
    coefficients = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    coefficients[np.abs(wavenumbers(grid)) > (n_modes + 0.5) * grid.dk] = 0.0
    values = fft.ifft(coefficients).real.astype(complex)
    psi = WaveField(grid, values)
    if Parity(parity) is not Parity.NONE:
        return project_parity(psi, parity)
    return psi.normalized()


def deflate(psi: WaveField, basis: list[WaveField] | tuple[WaveField, ...]) -> WaveField:
    """Remove the components of psi along an orthonormal basis and renormalize.

    Gram-Schmidt is applied twice, and a third time if an overlap above 1e-12
    survives.
    """
    input_norm = psi.norm()
    if not basis:
        return psi.normalized()
    constraint = _Constraint(psi.grid, tuple(basis), Parity.NONE)
    values = constraint(constraint(psi.values))
    norm = _norm(psi.grid, values)
    if norm < DEGENERATE_NORM * max(input_norm, 1.0):
        raise DegenerateError(f"deflated norm {norm:.3e} is below {DEGENERATE_NORM}: the state lies in the basis span")
    values = values / norm
    if np.max(np.abs(psi.grid.dx * constraint.basis.conj() @ values)) > 1e-12:  # type: ignore[union-attr]
        values = constraint(values)
        values = values / _norm(psi.grid, values)
    return WaveField(psi.grid, values)


def project_parity(psi: WaveField, parity: Parity) -> WaveField:
    """Return (psi(x) ± psi(-x)) / 2, renormalized."""
    parity = Parity(parity)
    if parity is Parity.NONE:
        return psi.normalized()
    try:
        constraint = _Constraint(psi.grid, (), parity)
    except GridError as exc:
        raise SolverError(f"parity projection needs a symmetric grid: {exc}") from exc
    values = constraint(psi.values)
    norm = _norm(psi.grid, values)
    if norm < DEGENERATE_NORM * max(psi.norm(), 1.0):
        raise DegenerateError(f"{parity.value} projection left norm {norm:.3e}")
    return WaveField(psi.grid, values / norm)


def energy_decay_rate(norm_ratio: float, dt: float) -> float:
    """Energy from the norm ratio of one un-normalized imaginary-time step: -ln(ratio)/dt."""
    if not norm_ratio > 0.0 or not np.isfinite(norm_ratio):
        raise SolverError(f"norm ratio must be positive, got {norm_ratio}")
    if not dt > 0.0:
        raise SolverError(f"time step must be positive, got {dt}")
    return float(-np.log(norm_ratio) / dt)


def _rayleigh(psi: WaveField, potential: np.ndarray, alpha: float) -> complex:
    return psi.inner(hamiltonian_apply(psi, potential, alpha))


def rayleigh_energy(psi: WaveField, spec: PotentialSpec, alpha: float) -> float:
    """<psi, H psi> for a normalized psi, kinetic part applied spectrally."""
    norm = psi.norm()
    if abs(norm - 1.0) > 1e-8:
        raise NormalizationError(f"rayleigh_energy needs a normalized state, norm is {norm}")
    value = _rayleigh(psi, sample_potential(spec, psi.grid), alpha)
    if abs(value.imag) > 1e-10:
        raise SolverError(f"Rayleigh quotient has imaginary part {value.imag:.3e}")
    return float(value.real)


def residual_norm(psi: WaveField, potential: np.ndarray, alpha: float, energy: float) -> float:
    """||H psi - E psi|| with the dx weight."""
    h_psi = hamiltonian_apply(psi, potential, alpha)
    return WaveField(psi.grid, h_psi.values - energy * psi.values).norm()


def _cast_real(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Rotate the global phase to maximize the real part, drop the imaginary residue, fix the sign."""
    square_sum = np.sum(values**2)
    if abs(square_sum) > 0.0:
        values = values * np.exp(-0.5j * np.angle(square_sum))
    dropped = grid.dx * float(np.sum(values.imag**2))
    if dropped > REAL_CAST_BUDGET:
        raise SolverError(f"real cast would drop probability {dropped:.3e} > {REAL_CAST_BUDGET}")
    real = values.real / _norm(grid, values.real)
    if real[np.argmax(np.abs(real))] < 0.0:
        real = -real
    return real


def _boundary_ok(values: np.ndarray) -> bool:
    edge = max(abs(values[0]), abs(values[1]), abs(values[-2]), abs(values[-1]))
    return bool(edge < BOUNDARY_RTOL * np.max(np.abs(values)))


def _relax(stepper, constraint, grid, values, tol, max_steps, history, potential, alpha):
    """Run imaginary-time steps until the sup-norm change drops below tol.

    Returns (values, norm_ratio, steps, converged).
    """
    ratio = 1.0
    for step in range(1, max_steps + 1):
        advanced = constraint(stepper(values))
        ratio = _norm(grid, advanced)
        if not ratio > 0.0 or not np.isfinite(ratio):
            raise InstabilityError(f"iterate norm became {ratio} at step {step}")
        advanced = advanced / ratio
        overlap = np.vdot(values, advanced)
        if abs(overlap) > 0.0:
            advanced = advanced * (abs(overlap) / overlap)
        change = float(np.max(np.abs(advanced - values)))
        values = advanced
        if history is not None:
            history.append(_rayleigh(WaveField(grid, values), potential, alpha).real)
        if change < tol:
            return values, ratio, step, True
    return values, ratio, max_steps, False


def imaginary_time_solve(
    config: SolveConfig, spec: PotentialSpec, grid: Grid, scheme: SplitScheme
) -> EigenSolution:
    """Relax a random start to the lowest state compatible with the deflation basis and parity.

    Args:
        config: solve settings.
        spec: the potential.
        grid: the run grid.
        scheme: splitting composition for the imaginary-time steps.

    Returns:
        The converged EigenSolution, indexed by the size of the deflation basis.

    Raises:
        NoConvergenceError: the step budget ran out, or the converged state misses the
            estimator-gap or residual acceptance budget.
    """
    index = len(config.deflation_basis)
    potential = sample_potential(spec, grid)
    constraint = _Constraint(grid, config.deflation_basis, config.parity)

    start = initial_state(grid, config.parity, config.seed + index, n_modes=INITIAL_MODES + index)
    values = constraint(start.values)
    norm = _norm(grid, values)
    if norm < DEGENERATE_NORM:
        raise DegenerateError(f"initial state for seed {config.seed + index} lies in the deflation span", index)
    values = values / norm

    history: list[float] | None = [] if config.track_energy else None
    stepper = SplitStepper(grid, scheme, potential, config.alpha, config.dt)
    values, ratio, iterations, converged = _relax(
        stepper, constraint, grid, values, config.tol, config.max_iters, history, potential, config.alpha
    )
    if not converged:
        raise NoConvergenceError(
            f"no convergence within {config.max_iters} steps at alpha = {config.alpha} (tol {config.tol})", index
        )
    dt_final = config.dt

    if config.refine is not None:
        fine = SplitStepper(grid, scheme, potential, config.alpha, config.refine.dt_fine)
        values, ratio, fine_steps, _ = _relax(
            fine,
            constraint,
            grid,
            values,
            config.tol * config.refine.dt_fine / config.dt,
            config.refine.n_fine_steps,
            history,
            potential,
            config.alpha,
        )
        iterations += fine_steps
        dt_final = config.refine.dt_fine

    real = constraint(_cast_real(grid, values).astype(complex)).real
    psi = WaveField(grid, real / _norm(grid, real))
    energy = float(_rayleigh(psi, potential, config.alpha).real)
    solution = EigenSolution(
        psi=psi,
        energy=energy,
        energy_decay=energy_decay_rate(ratio, dt_final),
        iterations=iterations,
        residual=residual_norm(psi, potential, config.alpha, energy),
        alpha=config.alpha,
        index=index,
        parity=config.parity,
        boundary_ok=spec.kind is PotentialKind.RING_ZERO or _boundary_ok(psi.values),
        energy_history=tuple(history or ()),
    )
    logger.info(
        "state %d alpha=%.4g parity=%s: E=%.12g (decay %.12g) residual=%.2e after %d steps",
        index,
        config.alpha,
        config.parity.value,
        solution.energy,
        solution.energy_decay,
        solution.residual,
        iterations,
    )
    if not solution.boundary_ok:
        logger.warning("state %d: |psi| at the domain edge exceeds 1e-8 of its peak; domain too small", index)
    if not solution.accepted:
        raise NoConvergenceError(
            f"alpha = {config.alpha}: estimator gap {solution.estimator_gap:.2e} "
            f"and residual {solution.residual:.2e} must both be below {ACCEPT_TOL:.0e}",
            index,
        )
    return solution


def _order_degenerate_pairs(solutions: list[EigenSolution]) -> list[EigenSolution]:
    """Sort by energy; within a degenerate pair the even state comes first."""
    ordered = sorted(solutions, key=lambda sol: sol.energy)
    for i in range(len(ordered) - 1):
        first, second = ordered[i], ordered[i + 1]
        tied = abs(first.energy - second.energy) <= DEGENERACY_RTOL * max(1.0, abs(first.energy))
        if tied and first.parity is Parity.ODD and second.parity is Parity.EVEN:
            ordered[i], ordered[i + 1] = second, first
    return [replace(sol, index=i) for i, sol in enumerate(ordered)]


def solve_spectrum(
    config: SolveConfig, spec: PotentialSpec, grid: Grid, scheme: SplitScheme, n_states: int
) -> list[EigenSolution]:
    """Solve the lowest n_states states in turn, each deflated against its predecessors.

    Symmetric potentials on symmetric grids alternate even and odd parity unless the
    config fixes a parity.

    Returns:
        Solutions sorted by energy, degenerate pairs even-first.
    """
    if n_states < 1:
        raise SolverError(f"n_states must be at least 1, got {n_states}")
    alternate = (
        config.parity is Parity.NONE
        and grid.is_symmetric
        and parity_of_potential(spec, grid) is Symmetry.SYMMETRIC
    )
    basis = list(config.deflation_basis)
    solutions = []
    for i in range(n_states):
        parity = (Parity.EVEN if i % 2 == 0 else Parity.ODD) if alternate else config.parity
        state_config = replace(config, parity=parity, deflation_basis=tuple(basis))
        try:
            solution = imaginary_time_solve(state_config, spec, grid, scheme)
        except SolverError as exc:
            raise exc.with_index(i) from exc
        basis.append(solution.psi)
        solutions.append(solution)
    return _order_degenerate_pairs(solutions)


class RealTimeTrace(NamedTuple):
    """Left/right well probabilities sampled during real-time propagation."""

    times: np.ndarray
    left_mass: np.ndarray
    right_mass: np.ndarray
    final: WaveField


def _real_time_stepper(psi, spec, alpha, dt, scheme):
    scheme = scheme or scheme_strang()
    if not scheme.is_real:
        raise SchemeError(f"real-time propagation needs real coefficients; scheme {scheme.name!r} is complex")
    return SplitStepper(psi.grid, scheme, sample_potential(spec, psi.grid), alpha, dt, TimeMode.REAL)


def real_time_trace(
    psi: WaveField,
    spec: PotentialSpec,
    alpha: float,
    dt: float,
    n_steps: int,
    sample_every: int = 1,
    scheme: SplitScheme | None = None,
) -> RealTimeTrace:
    """Propagate psi in real time, recording the probability on x < 0 and x >= 0.

    Args:
        psi: initial state.
        spec: the potential.
        alpha: fractional order.
        dt: real time step, 1e-3 or below recommended.
        n_steps: number of steps.
        sample_every: record every this many steps (t = 0 is always recorded).
        scheme: real-coefficient scheme, Strang by default.

    Returns:
        RealTimeTrace with the sampled masses and the final state.
    """
    stepper = _real_time_stepper(psi, spec, alpha, dt, scheme)
    left = psi.grid.x < 0.0
    initial_norm = psi.norm()
    values = psi.values
    times, left_mass, right_mass = [0.0], [psi.probability_mass(left)], [psi.probability_mass(~left)]
    for step in range(1, n_steps + 1):
        values = stepper(values)
        if step % sample_every == 0 or step == n_steps:
            state = WaveField(psi.grid, values)
            times.append(step * dt)
            left_mass.append(state.probability_mass(left))
            right_mass.append(state.probability_mass(~left))
    final = WaveField(psi.grid, values)
    drift = abs(final.norm() - initial_norm)
    if drift > NORM_DRIFT_TOL:
        raise InstabilityError(f"norm drifted by {drift:.3e} during real-time propagation")
    return RealTimeTrace(np.array(times), np.array(left_mass), np.array(right_mass), final)


def real_time_propagate(
    psi: WaveField,
    spec: PotentialSpec,
    alpha: float,
    dt: float,
    n_steps: int,
    scheme: SplitScheme | None = None,
) -> WaveField:
    """Evolve psi by exp(-i H t) for t = n_steps * dt with a real-coefficient scheme."""
    stepper = _real_time_stepper(psi, spec, alpha, dt, scheme)
    initial_norm = psi.norm()
    values = psi.values
    for _ in range(n_steps):
        values = stepper(values)
    final = WaveField(psi.grid, values)
    drift = abs(final.norm() - initial_norm)
    if drift > NORM_DRIFT_TOL:
        raise InstabilityError(f"norm drifted by {drift:.3e} during real-time propagation")
    return final
