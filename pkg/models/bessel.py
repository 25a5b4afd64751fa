"""Generalized Bessel family on (0, b).

p(x) = x^nu, r(x) = x^delta and
q(x) = [(2 + delta - nu)^2 gamma^2 - (1 - nu)^2] / 4 * x^(nu - 2),
with delta > -1, nu < 1, gamma >= 0. The endpoint 0 is limit circle iff
gamma < 1; a finite b is regular and b = inf is limit point. All closed forms
use arg(z) in (0, 2pi).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from donoghue import one_lc_entry
from problem import Classification, EndpointKind, SLProblem
from utils.branch import log_cut, power_cut, require_off_cut, sqrt_cut
from utils.errors import ConfigError
from utils.ode import ClosedFormSolution
from utils.special import bessel_j, bessel_kernel

EULER_GAMMA = float(np.euler_gamma)


@dataclass(frozen=True)
class BesselParams:
    delta: float
    nu: float
    gamma: float
    b: float = math.inf

    def __post_init__(self):
        if not self.delta > -1:
            raise ConfigError(f"delta = {self.delta} must exceed -1.")
        if not self.nu < 1:
            raise ConfigError(f"nu = {self.nu} must be below 1.")
        if not self.gamma >= 0:
            raise ConfigError(f"gamma = {self.gamma} must be nonnegative.")
        if not self.b > 0:
            raise ConfigError(f"b = {self.b} must be positive.")

    @property
    def kappa(self) -> float:
        return 2.0 + self.delta - self.nu

    @property
    def limit_circle_at_zero(self) -> bool:
        return self.gamma < 1

    def require_limit_circle(self):
        if not self.limit_circle_at_zero:
            raise ConfigError(f"gamma = {self.gamma}: the closed forms need gamma in [0, 1).")

    def require_infinite_b(self):
        if math.isfinite(self.b):
            raise ConfigError("This closed form needs b = inf.")


@dataclass(frozen=True)
class BesselFamily:
    params: BesselParams
    tag: str = "bessel"

    def p(self, x):
        return np.power(x, self.params.nu)

    def r(self, x):
        return np.power(x, self.params.delta)

    def q(self, x):
        prm = self.params
        strength = (prm.kappa**2 * prm.gamma**2 - (1 - prm.nu) ** 2) / 4.0
        return strength * np.power(x, prm.nu - 2.0)

    def endpoint_kind(self, problem, endpoint):
        if endpoint == "a":
            return EndpointKind.SINGULAR
        return EndpointKind.REGULAR if problem.b_is_finite else EndpointKind.INFINITE

    def analytic_classification(self, problem, endpoint):
        if endpoint == "a":
            if self.params.limit_circle_at_zero:
                return Classification.LIMIT_CIRCLE
            return Classification.LIMIT_POINT
        if problem.b_is_finite:
            return Classification.LIMIT_CIRCLE
        return Classification.LIMIT_POINT

    def closed_form_pair(self, problem, endpoint, lam0):
        if endpoint == "a" and lam0 == 0 and self.params.limit_circle_at_zero:
            return bessel_principal_pair(self.params)
        return None

    def tail_moments(self, problem, endpoint, lam0, x0):
        if endpoint == "a" and lam0 == 0 and self.params.limit_circle_at_zero:
            return bessel_tail_moments(self.params, x0)
        return None

    def liouville(self, problem, x):
        kappa = self.params.kappa
        return 2.0 * x ** (kappa / 2.0) / kappa

    def describe(self) -> dict:
        return {
            "family": self.tag,
            "delta": self.params.delta,
            "nu": self.params.nu,
            "gamma": self.params.gamma,
        }


def bessel_problem(params: BesselParams) -> SLProblem:
    family = BesselFamily(params)
    return SLProblem(
        p=family.p,
        q=family.q,
        r=family.r,
        a=0.0,
        b=params.b,
        family=family,
        name=f"bessel(delta={params.delta:g}, nu={params.nu:g}, gamma={params.gamma:g})",
    )


def _principal_values(params: BesselParams, x):
    """(u, u^[1], u_hat, u_hat^[1]) of the lambda0 = 0 principal pair."""
    nu, kappa, gamma = params.nu, params.kappa, params.gamma
    x = np.asarray(x, dtype=float)
    if gamma == 0:
        u = x ** ((1 - nu) / 2) / (1 - nu)
        u_quasi = 0.5 * x ** ((nu - 1) / 2)
        log_inv = np.log(1.0 / x)
        u_hat = (1 - nu) * x ** ((1 - nu) / 2) * log_inv
        u_hat_quasi = (1 - nu) * x ** ((nu - 1) / 2) * ((1 - nu) / 2 * log_inv - 1)
        return u, u_quasi, u_hat, u_hat_quasi
    s = kappa * gamma
    u = x ** ((1 - nu + s) / 2) / (1 - nu)
    u_quasi = (1 - nu + s) / (2 * (1 - nu)) * x ** ((nu - 1 + s) / 2)
    u_hat = (1 - nu) / s * x ** ((1 - nu - s) / 2)
    u_hat_quasi = (1 - nu) / s * (1 - nu - s) / 2 * x ** ((nu - 1 - s) / 2)
    return u, u_quasi, u_hat, u_hat_quasi


def bessel_principal_pair(params: BesselParams) -> tuple[ClosedFormSolution, ClosedFormSolution]:
    """Principal u and nonprincipal u_hat at 0 for lambda0 = 0, with W(u_hat, u) = 1."""
    params.require_limit_circle()
    hi = params.b if math.isfinite(params.b) else math.inf

    def u_fn(x):
        u, u_quasi, _, _ = _principal_values(params, x)
        return u + 0j, u_quasi + 0j

    def u_hat_fn(x):
        _, _, u_hat, u_hat_quasi = _principal_values(params, x)
        return u_hat + 0j, u_hat_quasi + 0j

    return (
        ClosedFormSolution(z=0j, lo=0.0, hi=hi, fn=u_fn),
        ClosedFormSolution(z=0j, lo=0.0, hi=hi, fn=u_hat_fn),
    )


def bessel_tail_moments(params: BesselParams, x0: float) -> tuple[float, float, float]:
    """int_0^x0 r u^2, r u u_hat, r u_hat^2 for the lambda0 = 0 principal pair."""
    nu, kappa, gamma = params.nu, params.kappa, params.gamma
    if gamma == 0:
        log_inv = math.log(1.0 / x0)
        base = x0**kappa
        uu = base / kappa / (1 - nu) ** 2
        u_uhat = base * (log_inv / kappa + 1 / kappa**2)
        uhat_uhat = (1 - nu) ** 2 * base * (log_inv**2 / kappa + 2 * log_inv / kappa**2 + 2 / kappa**3)
        return uu, u_uhat, uhat_uhat
    s = kappa * gamma
    uu = x0 ** (kappa + s) / (kappa + s) / (1 - nu) ** 2
    u_uhat = x0**kappa / (kappa * s)
    uhat_uhat = ((1 - nu) / s) ** 2 * x0 ** (kappa - s) / (kappa - s)
    return uu, u_uhat, uhat_uhat


def _cylinder(values, derivative, x, nu, kappa, w):
    """(y, y^[1]) for y = x^{(1-nu)/2} C(w(x)) given C(w) and C'(w)."""
    y = x ** ((1 - nu) / 2) * values
    y_quasi = x ** ((nu - 1) / 2) * ((1 - nu) / 2 * values + kappa / 2 * w * derivative)
    return y, y_quasi


def bessel_fundamental(params: BesselParams, z: complex, x: float):
    """(phi, phi^[1], theta, theta^[1]) normalized at 0: phi~(0,1), theta~(1,0), W(theta, phi) = 1."""
    params.require_limit_circle()
    x = float(x)
    z = complex(z)
    if z == 0:
        u, u_quasi, u_hat, u_hat_quasi = _principal_values(params, x)
        return complex(u), complex(u_quasi), complex(u_hat), complex(u_hat_quasi)
    nu, kappa, gamma = params.nu, params.kappa, params.gamma
    w = 2.0 * sqrt_cut(z) * x ** (kappa / 2) / kappa
    if gamma == 0:
        kernel = bessel_kernel(0.0, w)
        y1, y1_quasi = _cylinder(kernel.J, kernel.dJ, x, nu, kappa, w)
        y2, y2_quasi = _cylinder(kernel.Y, kernel.dY, x, nu, kappa, w)
        phi_scale = 1.0 / (1 - nu)
        mix = log_cut(z) - 2 * math.log(kappa) + 2 * EULER_GAMMA
        theta_scale = (1 - nu) / kappa
        theta = theta_scale * (-math.pi * y2 + mix * y1)
        theta_quasi = theta_scale * (-math.pi * y2_quasi + mix * y1_quasi)
        return phi_scale * y1, phi_scale * y1_quasi, theta, theta_quasi
    j_plus, dj_plus, _ = bessel_j(gamma, w)
    j_minus, dj_minus, _ = bessel_j(-gamma, w)
    y1, y1_quasi = _cylinder(j_plus, dj_plus, x, nu, kappa, w)
    y2, y2_quasi = _cylinder(j_minus, dj_minus, x, nu, kappa, w)
    phi_scale = kappa**gamma * special.gamma(1 + gamma) * power_cut(z, -gamma / 2) / (1 - nu)
    theta_scale = (
        (1 - nu) * kappa ** (-gamma - 1) / gamma * special.gamma(1 - gamma) * power_cut(z, gamma / 2)
    )
    return phi_scale * y1, phi_scale * y1_quasi, theta_scale * y2, theta_scale * y2_quasi


def bessel_fundamental_solutions(params: BesselParams, z: complex):
    """(phi, theta) as closed-form solution objects on (0, b)."""
    hi = params.b if math.isfinite(params.b) else math.inf
    evaluate = np.vectorize(lambda x: bessel_fundamental(params, z, x), otypes=[complex] * 4)

    def phi_fn(x):
        phi, phi_quasi, _, _ = evaluate(x)
        return phi, phi_quasi

    def theta_fn(x):
        _, _, theta, theta_quasi = evaluate(x)
        return theta, theta_quasi

    return (
        ClosedFormSolution(z=complex(z), lo=0.0, hi=hi, fn=phi_fn),
        ClosedFormSolution(z=complex(z), lo=0.0, hi=hi, fn=theta_fn),
    )


def bessel_weyl_psi(params: BesselParams, z: complex, x: float) -> tuple[complex, complex]:
    """Weyl solution psi = theta + m0 phi on (0, inf) via the Hankel function H1."""
    params.require_limit_circle()
    params.require_infinite_b()
    z = require_off_cut(z)
    nu, kappa, gamma = params.nu, params.kappa, params.gamma
    w = 2.0 * sqrt_cut(z) * float(x) ** (kappa / 2) / kappa
    kernel = bessel_kernel(gamma, w)
    y, y_quasi = _cylinder(kernel.H1, kernel.dH1, float(x), nu, kappa, w)
    if gamma == 0:
        scale = 1j * math.pi * (1 - nu) / kappa
    else:
        scale = (
            1j
            * (1 - nu)
            * kappa ** (-gamma - 1)
            / gamma
            * special.gamma(1 - gamma)
            * math.sin(math.pi * gamma)
            * power_cut(z, gamma / 2)
        )
    return scale * y, scale * y_quasi


def bessel_weyl_m(params: BesselParams, z: complex) -> complex:
    """Weyl m-function m0(z) for b = inf."""
    params.require_limit_circle()
    params.require_infinite_b()
    z = require_off_cut(z)
    nu, kappa, gamma = params.nu, params.kappa, params.gamma
    if gamma == 0:
        return (1 - nu) ** 2 / kappa * (
            1j * math.pi - log_cut(z) + 2 * math.log(kappa) - 2 * EULER_GAMMA
        )
    return (
        -np.exp(-1j * math.pi * gamma)
        * (1 - nu) ** 2
        * kappa ** (-2 * gamma - 1)
        / gamma
        * special.gamma(1 - gamma)
        / special.gamma(1 + gamma)
        * power_cut(z, gamma)
    )


def bessel_donoghue_friedrichs(params: BesselParams, z: complex, literal_typo: bool = False) -> complex:
    """Friedrichs Donoghue m-function in the basis psi(i)/||psi(i)||.

    The gamma in (0, 1) branch uses the exponent 3i pi gamma / 2, the reading
    consistent with M(i) = i; ``literal_typo`` restores the printed 3i pi / 2.
    """
    params.require_limit_circle()
    params.require_infinite_b()
    z = require_off_cut(z)
    gamma = params.gamma
    if gamma == 0:
        return -1j + (2 / math.pi) * (1.5j * math.pi - log_cut(z))
    exponent = 1.5j * math.pi if literal_typo else 1.5j * math.pi * gamma
    return -1j - np.exp(-1j * math.pi * gamma) * (power_cut(z, gamma) - np.exp(exponent)) / math.sin(
        math.pi * gamma / 2
    )


def bessel_donoghue_alpha(params: BesselParams, alpha: float, z: complex) -> complex:
    """Donoghue m-function of T_alpha: the closed-form m0 fed through the one-endpoint reduction."""
    return one_lc_entry(
        alpha,
        bessel_weyl_m(params, z),
        bessel_weyl_m(params, 1j),
        bessel_weyl_m(params, -1j),
        z,
    )


def bessel_krein_vn_matrix(params: BesselParams) -> np.ndarray:
    """Boundary matrix R_K of the Krein-von Neumann extension for finite b."""
    params.require_limit_circle()
    if not math.isfinite(params.b):
        raise ConfigError("The Krein-von Neumann matrix needs a finite b.")
    nu, kappa, gamma, b = params.nu, params.kappa, params.gamma, params.b
    if gamma == 0:
        log_inv = math.log(1.0 / b)
        return np.array(
            [
                [(1 - nu) * log_inv * b ** ((1 - nu) / 2), b ** ((1 - nu) / 2) / (1 - nu)],
                [
                    ((1 - nu) ** 2 * log_inv - 2 * (1 - nu)) / 2 * b ** ((nu - 1) / 2),
                    0.5 * b ** ((nu - 1) / 2),
                ],
            ]
        )
    s = kappa * gamma
    prefactor = b ** ((nu - 1 - s) / 2)
    return prefactor * np.array(
        [
            [(1 - nu) / s * b ** (1 - nu), b ** (1 - nu + s) / (1 - nu)],
            [(1 - nu) ** 2 / (2 * s) - (1 - nu) / 2, (0.5 + s / (2 * (1 - nu))) * b**s],
        ]
    )
