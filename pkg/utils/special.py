"""Complex-argument Bessel and Hankel functions from ascending series.

The kernel works on the disk |w| <= 30. Arguments produced by the Bessel
family are 2 sqrt(z) x^{kappa/2} / kappa with sqrt(z) on the arg (0, 2pi)
branch, so they lie in the closed upper half-plane where the principal
logarithm used below agrees with that branch.
"""

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from utils.errors import DomainTooLarge, PoleOrder

logger = logging.getLogger(__name__)

SERIES_RADIUS = 30.0
NEAR_INTEGER = 1e-6
EPS = np.finfo(float).eps
MAX_TERMS = 400


@dataclass(frozen=True)
class BesselKernelValue:
    order: float
    argument: complex
    J: complex
    Y: complex
    H1: complex
    dJ: complex
    dY: complex
    dH1: complex
    abs_error: float


def _check_radius(w: complex):
    if abs(w) > SERIES_RADIUS:
        raise DomainTooLarge(f"|w| = {abs(w):.3g} exceeds the series radius {SERIES_RADIUS}.")


def bessel_j(mu: float, w: complex) -> tuple[complex, complex, float]:
    """J_mu(w), J_mu'(w) and an absolute error estimate, for any real order mu."""
    w = complex(w)
    _check_radius(w)
    if w == 0:
        if mu == 0:
            return 1.0 + 0j, 0j, 0.0
        if mu == 1:
            return 0j, 0.5 + 0j, 0.0
        if mu > 0:
            return 0j, (0j if mu > 1 else complex(math.inf)), 0.0
        raise ValueError(f"J_{mu}(0) is singular.")
    half = w / 2
    x2 = -half * half
    value = 0j
    weighted = 0j
    largest = 0.0
    power = 1.0 + 0j
    for k in range(MAX_TERMS):
        term = power * special.rgamma(k + 1) * special.rgamma(k + mu + 1)
        value += term
        weighted += (2 * k + mu) * term
        largest = max(largest, abs(term))
        if k > abs(x2) and abs(term) <= EPS * abs(value):
            break
        power *= x2
    lead = cmath.exp(mu * cmath.log(half)) if mu != 0 else 1.0 + 0j
    error = 4 * EPS * largest * abs(lead) * (k + 1) ** 0.5
    return lead * value, lead * weighted / w, error


def _y_integer(n: int, w: complex) -> tuple[complex, complex, float]:
    """Y_n for integer n >= 0 from the limiting series with digamma coefficients."""
    half = w / 2
    log_half = cmath.log(half)
    j_value, j_derivative, j_error = bessel_j(n, w)
    finite_part = 0j
    finite_derivative = 0j
    for k in range(n):
        term = math.factorial(n - k - 1) / math.factorial(k) * half ** (2 * k - n)
        finite_part += term
        finite_derivative += (2 * k - n) * term / w
    x2 = -half * half
    series = 0j
    series_derivative = 0j
    largest = 0.0
    power = half**n
    for k in range(MAX_TERMS):
        coefficient = (special.digamma(k + 1) + special.digamma(n + k + 1)) * special.rgamma(
            k + 1
        ) * special.rgamma(n + k + 1)
        term = coefficient * power
        series += term
        series_derivative += (2 * k + n) * term / w
        largest = max(largest, abs(term))
        if k > abs(x2) and abs(term) <= EPS * max(abs(series), EPS):
            break
        power *= x2
    value = -finite_part / math.pi + (2 / math.pi) * log_half * j_value - series / math.pi
    derivative = (
        -finite_derivative / math.pi
        + (2 / math.pi) * (j_value / w + log_half * j_derivative)
        - series_derivative / math.pi
    )
    error = j_error * abs(log_half) + 4 * EPS * (largest + abs(finite_part))
    return value, derivative, error


def bessel_kernel(order: float, w: complex, allow_limit: bool = True) -> BesselKernelValue:
    """J, Y and H1 = J + iY of real order in [0, 2) with derivatives."""
    if not 0 <= order < 2:
        raise ValueError(f"Kernel order {order} outside [0, 2).")
    w = complex(w)
    _check_radius(w)
    if w == 0:
        raise ValueError("Y and H1 are singular at w = 0.")
    j_value, j_derivative, j_error = bessel_j(order, w)
    n = round(order)
    distance = abs(order - n)
    if distance < NEAR_INTEGER:
        if distance > 0:
            if not allow_limit:
                raise PoleOrder(f"order {order} is within {distance:.1e} of {n}.")
            logger.warning("order %.8g treated as integer %d for Y", order, n)
        y_value, y_derivative, y_error = _y_integer(n, w)
        y_error += distance
    else:
        sine = math.sin(math.pi * order)
        cosine = math.cos(math.pi * order)
        jm_value, jm_derivative, jm_error = bessel_j(-order, w)
        y_value = (j_value * cosine - jm_value) / sine
        y_derivative = (j_derivative * cosine - jm_derivative) / sine
        y_error = (j_error + jm_error) / abs(sine)
    return BesselKernelValue(
        order=order,
        argument=w,
        J=j_value,
        Y=y_value,
        H1=j_value + 1j * y_value,
        dJ=j_derivative,
        dY=y_derivative,
        dH1=j_derivative + 1j * y_derivative,
        abs_error=j_error + y_error,
    )
