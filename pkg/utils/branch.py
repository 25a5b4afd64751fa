"""Fractional powers and logarithms of z on the cut along [0, inf).

Every z^s, sqrt(z) and ln(z) in the package goes through these helpers so
that arg(z) lies in (0, 2pi) and ln(-i) = 3i*pi/2.
"""

import cmath
import math

from utils.errors import OnCutZ


def on_cut(z: complex) -> bool:
    z = complex(z)
    return z.imag == 0.0 and z.real >= 0.0


def arg_cut(z: complex) -> float:
    z = complex(z)
    if z == 0:
        raise OnCutZ("arg(z) is undefined at z = 0.")
    angle = cmath.phase(z)
    if angle <= 0.0:
        angle += 2.0 * math.pi
    return angle


def log_cut(z: complex) -> complex:
    return complex(math.log(abs(complex(z))), arg_cut(z))


def power_cut(z: complex, s: float) -> complex:
    if s == 0:
        return 1.0 + 0.0j
    return cmath.exp(s * log_cut(z))


def sqrt_cut(z: complex) -> complex:
    """Square root with Im sqrt(z) >= 0, the decaying branch for exp(i sqrt(z) x)."""
    return power_cut(z, 0.5)


def require_off_cut(z: complex) -> complex:
    if on_cut(z):
        raise OnCutZ(f"z = {complex(z)} lies on the branch cut [0, inf).")
    return complex(z)
