"""Operator-splitting schemes and the split-step propagator.

A scheme is an ordered list of (a_k, b_k) pairs approximating
exp(dt (A + B)) by prod_k exp(a_k dt A) exp(b_k dt B). Here A is always the
kinetic operator -|k|^alpha/2 (applied in Fourier space) and B the potential
-V(x) (applied pointwise), kinetic first within every pair.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import fft

from .errors import FitError, InstabilityError, SchemeError
from .grid import Grid, WaveField, abs_k_power, make_grid

logger = logging.getLogger(__name__)

CONSISTENCY_TOL = 1e-9

# Sixth-order, eight-stage complex splitting; rows 5-8 mirror rows 1-4.
_SIXTH_A = (
    0.0584500187773306 + 0.0217141273080301j,
    0.123229569418374 - 0.0402806787860161j,
    0.158045797047111 - 0.0604410907390099j,
    0.160274614757183 + 0.0790076422169959j,
)
_SIXTH_B = (
    0.116900037554661 + 0.0434282546160603j,
    0.129559101282088 - 0.123989612188092j,
    0.186532492812133 + 0.00310743071007267j,
    0.134016736702233 + 0.154907853723919j,
)

DEFAULT_PROBE_STEPS = tuple(2.0**-p * 1e-1 for p in range(3, 9))
PROBE_TIME = 0.5
PROBE_REFERENCE_DT = 1e-5
PROBE_FLOOR = 1e-13


class TimeMode(str, Enum):
    """Direction of the evolution: exp(-H t) or exp(-i H t)."""

    IMAGINARY = "imaginary"
    REAL = "real"


@dataclass(frozen=True)
class SplitScheme:
    """
    An operator-splitting composition.

    Attributes:
        name (str): registry name
        steps (tuple): ordered (a_k, b_k) complex coefficient pairs
        formal_order (int): order of the local error in dt, minus one
    """

    name: str
    steps: tuple[tuple[complex, complex], ...]
    formal_order: int

    def __post_init__(self):
        if not self.steps:
            raise SchemeError(f"scheme {self.name!r} has no steps")
        a_sum = sum(complex(a) for a, _ in self.steps)
        b_sum = sum(complex(b) for _, b in self.steps)
        if abs(a_sum - 1.0) > CONSISTENCY_TOL or abs(b_sum - 1.0) > CONSISTENCY_TOL:
            raise SchemeError(f"scheme {self.name!r} is inconsistent: sum(a) = {a_sum}, sum(b) = {b_sum}")
        for k, (a, b) in enumerate(self.steps, start=1):
            if complex(a).real <= 0.0 or complex(b).real < 0.0:
                raise SchemeError(f"scheme {self.name!r} step {k} is unstable in imaginary time: a = {a}, b = {b}")

    @property
    def a(self) -> np.ndarray:
        """Kinetic coefficients."""
        return np.array([a for a, _ in self.steps], dtype=complex)

    @property
    def b(self) -> np.ndarray:
        """Potential coefficients."""
        return np.array([b for _, b in self.steps], dtype=complex)

    @property
    def is_real(self) -> bool:
        """True when every coefficient is real, the requirement for unitary real-time steps."""
        return bool(np.all(self.a.imag == 0.0) and np.all(self.b.imag == 0.0))


def scheme_lie() -> SplitScheme:
    """First-order Lie splitting exp(dt A) exp(dt B)."""
    return SplitScheme("lie", ((1.0 + 0j, 1.0 + 0j),), 1)


def scheme_strang() -> SplitScheme:
    """Second-order Strang splitting exp(dt A/2) exp(dt B) exp(dt A/2)."""
    return SplitScheme("strang", ((0.5 + 0j, 1.0 + 0j), (0.5 + 0j, 0j)), 2)


def scheme_sixth() -> SplitScheme:
    """Sixth-order eight-stage scheme with complex coefficients of positive real part."""
    a = _SIXTH_A + _SIXTH_A[::-1]
    b = _SIXTH_B + _SIXTH_B[2::-1] + (0j,)
    return SplitScheme("sixth", tuple(zip(a, b)), 6)


SCHEMES = {
    "lie": scheme_lie,
    "strang": scheme_strang,
    "sixth": scheme_sixth,
}


def get_scheme(name: str) -> SplitScheme:
    """Look up a registered scheme by name."""
    try:
        return SCHEMES[name.strip().lower()]()
    except KeyError as exc:
        raise SchemeError(f"unknown scheme {name!r}, expected one of {sorted(SCHEMES)}") from exc


class SplitStepper:
    """
    One full split step for fixed grid, scheme, potential, order and time step.

    The multipliers are computed once. Kinetic factors separated only by a
    b_k = 0 pair are merged, so the transforms around a skipped potential
    multiply never happen.

    Attributes:
        grid (Grid): grid of the fields being stepped
        scheme (SplitScheme): the composition
        dt (float): time step
        mode (TimeMode): imaginary or real time
    """

    def __init__(
        self,
        grid: Grid,
        scheme: SplitScheme,
        potential: np.ndarray,
        alpha: float,
        dt: float,
        mode: TimeMode = TimeMode.IMAGINARY,
    ):
        potential = np.asarray(potential, dtype=float)
        if potential.shape != (grid.n_points,):
            raise SchemeError(f"potential has {potential.size} samples, grid has {grid.n_points}")
        if not dt > 0.0:
            raise SchemeError(f"time step must be positive, got {dt}")
        self.grid = grid
        self.scheme = scheme
        self.dt = dt
        self.mode = TimeMode(mode)

        factor = dt * (1j if self.mode is TimeMode.REAL else 1.0)
        half_power = 0.5 * abs_k_power(grid, alpha)
        self._operations: list[tuple[bool, np.ndarray]] = []
        pending = 0j
        for a, b in scheme.steps:
            pending += a
            if b == 0:
                continue
            self._operations.append((True, np.exp(-factor * pending * half_power)))
            self._operations.append((False, np.exp(-factor * b * potential)))
            pending = 0j
        if pending != 0:
            self._operations.append((True, np.exp(-factor * pending * half_power)))

    @property
    def transforms_per_step(self) -> int:
        """Number of FFTs one call performs."""
        return 2 + 2 * sum(1 for spectral, _ in self._operations if not spectral)

    def __call__(self, values: np.ndarray) -> np.ndarray:
        spectrum = fft.fft(values)
        for spectral, multiplier in self._operations:
            if spectral:
                spectrum *= multiplier
            else:
                spectrum = fft.fft(fft.ifft(spectrum) * multiplier)
        result = fft.ifft(spectrum)
        if not np.all(np.isfinite(result)):
            raise InstabilityError(f"non-finite samples after a {self.scheme.name} step with dt = {self.dt}")
        return result


def apply_split_step(
    psi: WaveField,
    scheme: SplitScheme,
    potential: np.ndarray,
    alpha: float,
    dt: float,
    mode: TimeMode = TimeMode.IMAGINARY,
) -> WaveField:
    """Apply one full split step to psi. No renormalization is done.

    Args:
        psi: state to advance.
        scheme: splitting composition.
        potential: V sampled on psi.grid.
        alpha: fractional order.
        dt: positive time step.
        mode: imaginary (exp(-H dt)) or real (exp(-i H dt)) time.

    Returns:
        The advanced state.
    """
    stepper = SplitStepper(psi.grid, scheme, potential, alpha, dt, mode)
    return WaveField(psi.grid, stepper(psi.values))


def _probe_state(grid: Grid) -> np.ndarray:
    x = grid.x
    values = np.exp(-((x - 0.5) ** 2)).astype(complex)
    return values / np.sqrt(grid.dx * np.sum(np.abs(values) ** 2))


def _evolve(grid: Grid, scheme: SplitScheme, potential: np.ndarray, alpha: float, dt: float, total_time: float):
    n_steps = int(round(total_time / dt))
    if n_steps < 1 or abs(n_steps * dt - total_time) > 1e-9 * total_time:
        raise FitError(f"time step {dt} does not divide the probe time {total_time}")
    stepper = SplitStepper(grid, scheme, potential, alpha, dt)
    values = _probe_state(grid)
    for _ in range(n_steps):
        values = stepper(values)
    return values


def order_probe(
    scheme: SplitScheme,
    alpha: float,
    step_sizes: tuple[float, ...] = DEFAULT_PROBE_STEPS,
    total_time: float = PROBE_TIME,
    reference_dt: float = PROBE_REFERENCE_DT,
    grid: Grid | None = None,
    floor: float = PROBE_FLOOR,
) -> float:
    """Measure the convergence order of a scheme on the harmonic oscillator.

    A displaced Gaussian is evolved in imaginary time to total_time at every step
    size, compared against a run at reference_dt, and the least-squares slope of
    log(error) against log(dt) is returned.

    Args:
        scheme: scheme under test.
        alpha: fractional order.
        step_sizes: time steps to measure; each must divide total_time.
        total_time: imaginary time of every run.
        reference_dt: time step of the reference run.
        grid: spatial grid, [-8, 8) with 256 points by default.
        floor: errors at or below this are treated as rounding noise.

    Returns:
        The measured order.
    """
    grid = grid or make_grid(256, -8.0, 8.0)
    potential = 0.5 * grid.x**2
    reference = _evolve(grid, scheme, potential, alpha, reference_dt, total_time)

    log_dt, log_error = [], []
    for dt in step_sizes:
        values = _evolve(grid, scheme, potential, alpha, dt, total_time)
        error = float(np.sqrt(grid.dx * np.sum(np.abs(values - reference) ** 2)))
        logger.debug("order probe %s: dt = %.6g error = %.6e", scheme.name, dt, error)
        if error > floor:
            log_dt.append(np.log(dt))
            log_error.append(np.log(error))
    if len(log_dt) < 3:
        raise FitError(
            f"only {len(log_dt)} of {len(step_sizes)} errors lie above {floor:.1e} for scheme {scheme.name!r};"
            " widen the step-size range"
        )
    slope = float(np.polyfit(log_dt, log_error, 1)[0])
    logger.info("scheme %s measured order %.3f (formal %d)", scheme.name, slope, scheme.formal_order)
    return slope
