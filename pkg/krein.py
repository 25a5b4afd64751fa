"""Krein-type coupling data for the self-adjoint extensions.

With e_j = (u_j(conj z), f) the resolvents differ from the Friedrichs one by
    (A - z)^{-1} f - (A_0 - z)^{-1} f = sum_{j,k} C[j, k] e_j u_k(z),
where C = K^{-1} for matrix couplings and C = conj(w) w^T / k for scalar ones.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as scipy_integrate

from deficiency import DeficiencyBasis, WeylSolution, deficiency_basis, require_nonreal, weyl_solution
from endpoints import classify, endpoint_frame
from problem import (
    Coupled,
    EndpointClassification,
    EndpointKind,
    ExtensionSpec,
    OneEndpoint,
    Separated,
    SLProblem,
    check_admissible,
    make_coupled,
)
from utils.errors import (
    ConfigError,
    FriedrichsReference,
    NoConvergence,
    NonFiniteValue,
    OutOfRange,
)
from utils.linalg import det2, inv2, mat2
from utils.ode import Solution, Spliced, integrate, wronskian_at

logger = logging.getLogger(__name__)

KVN_MIN_Z = 1e-3
PRIME_TOLERANCE = 1e-12


def _cot(angle: float) -> float:
    return math.cos(angle) / math.sin(angle)


@dataclass(frozen=True)
class KreinCoupling:
    """Scalar k with correction solution sum_k w_k u_k, or a 2x2 matrix K."""

    z: complex
    kind: str
    value: complex | np.ndarray
    weights: tuple[complex, complex] | None = None
    correction: tuple[Solution, ...] = field(default=(), compare=False, repr=False)

    def coefficients(self) -> np.ndarray:
        """C with (A - z)^{-1} - (A_0 - z)^{-1} = sum C[j, k] (u_j(conj z), .) u_k(z)."""
        if self.kind == "matrix":
            return inv2(self.value)
        if self.weights is None:
            return np.array([[1.0 / self.value]], dtype=complex)
        w = np.array(self.weights, dtype=complex)
        return np.outer(np.conj(w), w) / self.value

    @property
    def determinant(self) -> complex:
        return det2(self.value) if self.kind == "matrix" else complex(self.value)


# ---------------------------------------------------------------------------
# one limit-circle endpoint


def k_alpha(problem: SLProblem, alpha: float, z: complex, weyl: WeylSolution | None = None) -> complex:
    """k_alpha(z) = -cot(alpha) - m0(z), alpha in (0, pi)."""
    if not 0 < alpha < math.pi:
        raise ConfigError(f"alpha = {alpha} is outside (0, pi).")
    if weyl is None:
        weyl = weyl_solution(problem, z)
    return -_cot(alpha) - weyl.m0


def one_endpoint_coupling(problem: SLProblem, spec: OneEndpoint, z: complex, weyl=None) -> KreinCoupling:
    if spec.is_friedrichs():
        raise FriedrichsReference()
    if weyl is None:
        weyl = weyl_solution(problem, z)
    k = k_alpha(problem, spec.alpha, z, weyl)
    return KreinCoupling(z=weyl.z, kind="scalar", value=k, correction=(weyl.trace,))


# ---------------------------------------------------------------------------
# two limit-circle endpoints


def _separated(spec: Separated, basis: DeficiencyBasis) -> KreinCoupling:
    z = basis.z
    if spec.alpha == 0.0:
        return KreinCoupling(z, "scalar", _cot(spec.beta) + basis.u1_prime_b, weights=(1.0, 0.0))
    if spec.beta == 0.0:
        return KreinCoupling(z, "scalar", -_cot(spec.alpha) - basis.u2_prime_a, weights=(0.0, 1.0))
    matrix = mat2(
        _cot(spec.beta) + basis.u1_prime_b,
        -basis.u1_prime_a,
        basis.u2_prime_b,
        -_cot(spec.alpha) - basis.u2_prime_a,
    )
    return KreinCoupling(z, "matrix", matrix)


def _coupled(spec: Coupled, basis: DeficiencyBasis) -> KreinCoupling:
    z = basis.z
    (r11, r12), (r21, r22) = spec.R
    phase = cmath.exp(1j * spec.phi)
    if r12 != 0:
        matrix = mat2(
            -r22 / r12 + basis.u1_prime_b,
            1.0 / (phase * r12) - basis.u1_prime_a,
            phase / r12 + basis.u2_prime_b,
            -r11 / r12 - basis.u2_prime_a,
        )
        return KreinCoupling(z, "matrix", matrix)
    mix = r22 / phase
    prime_a = basis.u1_prime_a + mix * basis.u2_prime_a
    prime_b = basis.u1_prime_b + mix * basis.u2_prime_b
    k = -r21 * r22 - phase * r22 * prime_a + prime_b
    return KreinCoupling(z, "scalar", k, weights=(1.0, mix))


def krein_matrix(
    problem: SLProblem,
    spec: ExtensionSpec,
    z: complex,
    basis: DeficiencyBasis | None = None,
    classification: EndpointClassification | None = None,
) -> KreinCoupling:
    """Coupling of a two-endpoint extension relative to T_00."""
    if isinstance(spec, OneEndpoint):
        raise ConfigError("OneEndpoint specs use one_endpoint_coupling.")
    if spec.is_friedrichs():
        raise FriedrichsReference()
    if basis is None:
        basis = deficiency_basis(problem, z, classification)
    coupling = _separated(spec, basis) if isinstance(spec, Separated) else _coupled(spec, basis)
    coupling = KreinCoupling(
        coupling.z, coupling.kind, coupling.value, coupling.weights, correction=(basis.u1, basis.u2)
    )
    logger.debug("%s coupling at z=%s: |det| = %.3e", spec.kind, z, abs(coupling.determinant))
    return coupling


def extension_coupling(problem: SLProblem, spec: ExtensionSpec, z: complex, **kwargs) -> KreinCoupling:
    """krein_matrix or one_endpoint_coupling by spec type."""
    if isinstance(spec, OneEndpoint):
        return one_endpoint_coupling(problem, spec, z, kwargs.get("weyl"))
    return krein_matrix(problem, spec, z, kwargs.get("basis"), kwargs.get("classification"))


# ---------------------------------------------------------------------------
# relative primeness


def separated_primeness(alpha: float, beta: float, R) -> float:
    (r11, r12), (r21, r22) = np.asarray(R, dtype=float)
    ca, sa = math.cos(alpha), math.sin(alpha)
    cb, sb = math.cos(beta), math.sin(beta)
    return ca * cb * r12 + ca * sb * r22 - sa * cb * r11 - sa * sb * r21


def coupled_primeness(phi: float, R, eta: float, S) -> complex:
    """det(e^{i(eta - phi)} S R^{-1} - I); zero iff T_{phi,R} and T_{eta,S} share more than T_min."""
    value = det2(_coupled_transfer(phi, R, eta, S) - np.eye(2))
    if abs(value) <= PRIME_TOLERANCE:
        logger.debug("not relatively prime, common space %s", unit_eigenspace(phi, R, eta, S).tolist())
    return value


def _coupled_transfer(phi, R, eta, S) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    S = np.asarray(S, dtype=float)
    return cmath.exp(1j * (eta - phi)) * S @ np.linalg.inv(R)


def unit_eigenspace(phi: float, R, eta: float, S, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of ker(e^{i(eta - phi)} S R^{-1} - I)."""
    _, singular, vh = np.linalg.svd(_coupled_transfer(phi, R, eta, S) - np.eye(2))
    return np.conj(vh[singular <= tol]).T


def separated_pair_primeness(alpha: float, beta: float, alpha2: float, beta2: float) -> bool:
    return alpha != alpha2 and beta != beta2


def one_endpoint_primeness(alpha: float, alpha2: float) -> bool:
    return alpha != alpha2


# ---------------------------------------------------------------------------
# Krein-von Neumann extension


def krein_von_neumann_matrix(problem: SLProblem, rtol: float = 1e-11) -> np.ndarray:
    """R_K mapping (y~(a), y~'(a)) to (y~(b), y~'(b)) for solutions at z = 0."""
    frame_a = endpoint_frame(problem, 0.0, "a", rtol=rtol)
    frame_b = endpoint_frame(problem, 0.0, "b", rtol=rtol)
    c = problem.anchor
    columns = [frame_b.data_of(y, c) for y in frame_a.normalized]
    matrix = np.array(columns, dtype=complex).T
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteValue("Boundary data of the z = 0 solutions is not finite.")
    return matrix.real


def krein_von_neumann_spec(problem: SLProblem, rtol: float = 1e-11) -> Coupled:
    R = krein_von_neumann_matrix(problem, rtol)
    det = R[0, 0] * R[1, 1] - R[0, 1] * R[1, 0]
    if det <= 0:
        raise NonFiniteValue(f"z = 0 boundary map has det {det:.3e}.")
    return make_coupled(0.0, R / math.sqrt(det))


def krein_von_neumann_coupling(
    problem: SLProblem,
    z: complex,
    basis: DeficiencyBasis | None = None,
    basis_zero: DeficiencyBasis | None = None,
) -> KreinCoupling:
    """K(z) with entries u_j~'(z, .) - u_j~'(0, .); needs 0 in the resolvent set of T_00."""
    z = require_nonreal(z)
    if abs(z) < KVN_MIN_Z:
        raise OutOfRange(f"|z| = {abs(z):.2e} is below {KVN_MIN_Z:g} for the Krein-von Neumann coupling.")
    if basis is None:
        basis = deficiency_basis(problem, z)
    if basis_zero is None:
        basis_zero = deficiency_basis(problem, 0.0, allow_real=True)
    matrix = mat2(
        basis.u1_prime_b - basis_zero.u1_prime_b,
        basis_zero.u1_prime_a - basis.u1_prime_a,
        basis.u2_prime_b - basis_zero.u2_prime_b,
        basis_zero.u2_prime_a - basis.u2_prime_a,
    )
    return KreinCoupling(z, "matrix", matrix, correction=(basis.u1, basis.u2))


# ---------------------------------------------------------------------------
# direct boundary value problem


@dataclass(frozen=True)
class GridFunction:
    x: np.ndarray
    values: np.ndarray

    def __call__(self, x):
        return np.interp(x, self.x, self.values.real) + 1j * np.interp(x, self.x, self.values.imag)


def resolvent_grid(problem: SLProblem, start: float, stop: float, n: int = 1201) -> np.ndarray:
    """Grid on [start, stop], geometric toward singular finite endpoints."""
    c = problem.anchor
    parts = []
    if problem.kind("a") == EndpointKind.SINGULAR:
        parts.append(problem.a + np.geomspace(start - problem.a, c - problem.a, n))
    else:
        parts.append(np.linspace(start, c, n))
    if problem.b_is_finite and problem.kind("b") == EndpointKind.SINGULAR:
        parts.append(problem.b - np.geomspace(problem.b - stop, problem.b - c, n))
    else:
        parts.append(np.linspace(c, stop, n))
    return np.unique(np.concatenate(parts))


def _head(values: np.ndarray, x: np.ndarray, edge: float, first: int) -> complex:
    """int from edge to x[first] of a power-law integrand sampled at x."""
    offset0 = abs(x[first] - edge)
    if offset0 == 0 or not math.isfinite(edge):
        return 0j
    nxt = first + 1 if first == 0 else first - 1
    offset1 = abs(x[nxt] - edge)
    v0, v1 = values[first], values[nxt]
    if v0 == 0:
        return 0j
    exponent = math.log(abs(v1 / v0)) / math.log(offset1 / offset0)
    if exponent <= -1:
        raise NoConvergence(f"Integrand near {edge} decays like a power {exponent:.3f} <= -1.")
    return v0 * offset0 / (exponent + 1)


def grid_integral(problem: SLProblem, x: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Cumulative int_a^x r * values, with the power-law head below x[0]."""
    weighted = problem.r(x) * values
    cumulative = scipy_integrate.cumulative_simpson(weighted, x=x, initial=0)
    return cumulative + _head(weighted, x, problem.a, 0)


def grid_total(problem: SLProblem, x: np.ndarray, values: np.ndarray) -> complex:
    weighted = problem.r(x) * values
    cumulative = grid_integral(problem, x, values)
    tail = _head(weighted, x, problem.b, x.size - 1) if problem.b_is_finite else 0j
    return complex(cumulative[-1] + tail)


def l2_norm(problem: SLProblem, g: GridFunction) -> float:
    return math.sqrt(grid_total(problem, g.x, np.abs(g.values) ** 2).real)


def _boundary_rows(spec: ExtensionSpec) -> np.ndarray:
    """L with L (g~(a), g~'(a), g~(b), g~'(b))^T = 0."""
    if isinstance(spec, Separated):
        return np.array(
            [
                [math.cos(spec.alpha), math.sin(spec.alpha), 0, 0],
                [0, 0, math.cos(spec.beta), math.sin(spec.beta)],
            ],
            dtype=complex,
        )
    return np.hstack([-cmath.exp(1j * spec.phi) * spec.matrix, np.eye(2)])


def apply_resolvent_direct(
    problem: SLProblem,
    spec: ExtensionSpec,
    z: complex,
    f,
    classification: EndpointClassification | None = None,
    basis: DeficiencyBasis | None = None,
    weyl: WeylSolution | None = None,
    n: int = 1201,
    rtol: float = 1e-11,
) -> GridFunction:
    """u = (A - z)^{-1} f by variation of parameters, on a grid."""
    z = require_nonreal(z)
    if classification is None:
        classification = classify(problem)
    check_admissible(spec, classification)
    if isinstance(spec, OneEndpoint):
        return _one_endpoint_resolvent(problem, spec, z, f, weyl, n, rtol)
    if basis is None:
        basis = deficiency_basis(problem, z, classification, rtol=rtol)
    frame_a, frame_b = basis.frames
    x = resolvent_grid(problem, frame_a.start, frame_b.start, n)
    u1, _ = basis.u1.evaluate(x)
    u2, _ = basis.u2.evaluate(x)
    wronskian = wronskian_at(basis.u1, basis.u2, problem.anchor)
    fx = np.asarray(f(x), dtype=complex)
    big_a = grid_integral(problem, x, fx * u2) / wronskian
    big_b = -grid_integral(problem, x, fx * u1) / wronskian
    a_total = grid_total(problem, x, fx * u2) / wronskian
    b_total = -grid_total(problem, x, fx * u1) / wronskian
    data = np.array(
        [
            [0, 1],
            [basis.u1_prime_a, basis.u2_prime_a],
            [1, 0],
            [basis.u1_prime_b, basis.u2_prime_b],
        ],
        dtype=complex,
    )
    offset = np.array([0, 0, a_total, a_total * basis.u1_prime_b + b_total * basis.u2_prime_b])
    rows = _boundary_rows(spec)
    coefficients = np.linalg.solve(rows @ data, -rows @ offset)
    values = (big_a + coefficients[0]) * u1 + (big_b + coefficients[1]) * u2
    return GridFunction(x, values)


def _one_endpoint_resolvent(problem, spec: OneEndpoint, z, f, weyl, n, rtol) -> GridFunction:
    if weyl is None:
        weyl = weyl_solution(problem, z, rtol=rtol)
    frame = weyl.frame
    c = problem.anchor
    y_alpha = frame.solution(-math.sin(spec.alpha), math.cos(spec.alpha))
    u0, u0_quasi = y_alpha.evaluate(c)
    # continued past the anchor in its growing direction
    far = integrate(problem, z, c, complex(u0), complex(u0_quasi), weyl.anchor, rtol=rtol)
    y_alpha = Spliced(left=y_alpha, right=far, at=c)
    x = resolvent_grid(problem, frame.start, weyl.anchor, n)
    psi_x, _ = weyl.trace.evaluate(x)
    y_x, _ = y_alpha.evaluate(x)
    wronskian = wronskian_at(y_alpha, weyl.trace, c)
    fx = np.asarray(f(x), dtype=complex)
    psi_cumulative = grid_integral(problem, x, fx * psi_x)
    y_cumulative = grid_integral(problem, x, fx * y_x)
    values = -(y_x * (psi_cumulative[-1] - psi_cumulative) + psi_x * y_cumulative) / wronskian
    return GridFunction(x, values)
