"""Mittag-Leffler functions E_{q,beta}(x) = sum_k x^k / Gamma(q k + beta) by truncated series.

The series alternates for negative arguments, so double precision loses digits
to cancellation roughly like exp(|x|) * eps. Arguments are therefore capped at
|x| <= 12 and every value is returned together with an absolute error bound.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from .errors import AccuracyError, DomainError, GammaOverflowError

MAX_ARGUMENT = 12.0
MAX_TERMS = 400
TERM_RTOL = 1e-16
ACCURACY_BUDGET = 1e-6
GAMMA_MAX_ARGUMENT = 171.6

# relative rounding of a single term computed through exp(log|t|)
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class MLParams:
    """
    Parameters of the two-parameter Mittag-Leffler function.

    Attributes:
        q (float): series parameter, q > 0
        beta (float): second parameter, beta > 0; beta = 1 is the one-parameter function
    """

    q: float
    beta: float = 1.0

    def __post_init__(self):
        if not self.q > 0.0 or not np.isfinite(self.q):
            raise DomainError(f"Mittag-Leffler parameter q must be positive, got {self.q}")
        if not self.beta > 0.0 or not np.isfinite(self.beta):
            raise DomainError(f"Mittag-Leffler parameter beta must be positive, got {self.beta}")


class MLValue(NamedTuple):
    """A series value and its estimated absolute error."""

    value: float
    error: float
    terms: int


def gamma_fn(z: float) -> float:
    """Gamma function for positive real arguments.

    Args:
        z: argument, 0 < z <= ~171.6.

    Returns:
        Gamma(z) to scipy.special.gamma accuracy.
    """
    if not z > 0.0:
        raise DomainError(f"gamma_fn is defined here for z > 0 only, got {z}")
    if z > GAMMA_MAX_ARGUMENT:
        raise GammaOverflowError(f"Gamma({z}) overflows double precision")
    value = float(special.gamma(z))
    if math.isinf(value):
        raise GammaOverflowError(f"Gamma({z}) overflows double precision")
    return value


def _term(params: MLParams, x: float, k: int) -> tuple[float, float]:
    """Return the k-th series term and the magnitude of its rounding error."""
    if x == 0.0:
        return (1.0 / gamma_fn(params.beta), 0.0) if k == 0 else (0.0, 0.0)
    z = params.q * k + params.beta
    sign = -1.0 if (x < 0.0 and k % 2 == 1) else 1.0
    log_power = k * math.log(abs(x))
    if z < GAMMA_MAX_ARGUMENT and log_power < 690.0:
        magnitude = abs(x) ** k / gamma_fn(z)
        return sign * magnitude, magnitude * _EPS * (8.0 + z)
    # exp(log|t|) turns the absolute error of both logarithms into a relative one
    log_gamma = float(special.gammaln(z))
    magnitude = math.exp(log_power - log_gamma)
    return sign * magnitude, magnitude * _EPS * (8.0 + 2.0 * (log_power + abs(log_gamma)))


def mittag_leffler(params: MLParams, x: float, rtol: float = TERM_RTOL) -> MLValue:
    """Evaluate E_{q,beta}(x) with an error estimate.

    Terms are summed exactly with math.fsum; the series stops once a term is
    decreasing and smaller than rtol times the largest partial sum seen, or after
    400 terms. The error bound adds the rounding of every term to the first
    neglected term.

    Args:
        params: q and beta.
        x: real argument with |x| <= 12.
        rtol: termination tolerance relative to the largest partial sum.

    Returns:
        MLValue(value, error, terms).
    """
    if not np.isfinite(x) or abs(x) > MAX_ARGUMENT:
        raise DomainError(f"mittag_leffler argument must satisfy |x| <= {MAX_ARGUMENT}, got {x}")

    terms: list[float] = []
    rounding = 0.0
    largest_partial = 0.0
    previous_magnitude = math.inf
    truncation = 0.0
    for k in range(MAX_TERMS):
        term, term_rounding = _term(params, x, k)
        magnitude = abs(term)
        if k > 0 and magnitude <= previous_magnitude and magnitude < rtol * largest_partial:
            truncation = magnitude
            break
        terms.append(term)
        rounding += term_rounding
        largest_partial = max(largest_partial, abs(math.fsum(terms)))
        previous_magnitude = magnitude
    else:
        truncation = abs(_term(params, x, MAX_TERMS)[0])

    value = math.fsum(terms)
    error = rounding + truncation + _EPS * abs(value)
    if error > ACCURACY_BUDGET:
        raise AccuracyError(f"E_{{{params.q},{params.beta}}}({x}) error estimate {error:.3e} exceeds {ACCURACY_BUDGET}")
    return MLValue(value, error, len(terms))


def ml_gaussian_profile(q: float, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate E_q(-x^2) at every sample, the Mittag-Leffler analogue of exp(-x^2).

    Args:
        q: series parameter; q = 1 gives the Gaussian.
        xs: sample positions, each with x^2 <= 12.

    Returns:
        (values, errors) arrays matching xs.
    """
    params = MLParams(q, 1.0)
    xs = np.asarray(xs, dtype=float)
    values = np.empty_like(xs)
    errors = np.empty_like(xs)
    for i, x in enumerate(xs):
        try:
            result = mittag_leffler(params, -x * x)
        except (DomainError, AccuracyError) as exc:
            raise type(exc)(f"sample {i} (x = {x}): {exc}") from exc
        values[i] = result.value
        errors[i] = result.error
    return values, errors
