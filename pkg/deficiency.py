"""Deficiency-subspace solutions.

One limit-circle endpoint: the Weyl solution psi(z, .) = theta + m0(z) phi,
square integrable at b and normalized by psi~(z, a) = 1.

Two limit-circle endpoints: u1, u2 with
    u1~(a) = 0, u1~(b) = 1,   u2~(a) = 1, u2~(b) = 0,
and the orthonormal basis v1 = c1 u1, v2 = c2 (u2 - mu u1) of N_i.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as scipy_integrate

from endpoints import DEFAULT_EPSILON, EndpointFrame, classify, endpoint_frame
from problem import Classification, EndpointClassification, SLProblem
from utils.branch import sqrt_cut
from utils.errors import (
    AnchorNotConverged,
    ConfigError,
    InadmissibleExtension,
    NoDecaySeparation,
    NonPositiveNorm,
    SingularBoundaryMap,
)
from utils.ode import Solution, Spliced, combine, integrate

logger = logging.getLogger(__name__)

MIN_IM = 1e-6
DECAY_TARGET = 12.0
ANCHOR_CAP = 1e4
LG_REACH = 64.0
LG_STEP = 1e-4
ANCHOR_RTOL = 1e-7
MAX_DOUBLINGS = 10
SINGULAR_MAP = 1e-12


def require_nonreal(z: complex) -> complex:
    z = complex(z)
    if abs(z.imag) < MIN_IM:
        raise ConfigError(f"z = {z} is within {MIN_IM:g} of the real axis.")
    return z


def _require(classification: EndpointClassification | None, problem: SLProblem, count: int):
    if classification is None:
        classification = classify(problem)
    if classification.deficiency_index != count or classification.at_a != Classification.LIMIT_CIRCLE:
        raise InadmissibleExtension(
            f"Expected {count} limit-circle endpoint(s) starting at a, got "
            f"a: {classification.at_a.value}, b: {classification.at_b.value}."
        )
    return classification


# ---------------------------------------------------------------------------
# one limit-circle endpoint


@dataclass(frozen=True)
class WeylSolution:
    z: complex
    trace: Solution
    m0: complex
    anchor: float
    frame: EndpointFrame = field(compare=False)

    def boundary_data(self) -> tuple[complex, complex]:
        """(psi~(a), psi~'(a)); the first entry is 1 by construction."""
        return self.frame.data_of(self.trace, self.frame.reach)


def _liouville_distance(problem: SLProblem, c: float, x: float) -> float:
    xi = problem.family.liouville(problem, x)
    if xi is not None:
        return xi - problem.family.liouville(problem, c)
    value, _ = scipy_integrate.quad(lambda t: math.sqrt(problem.r(t) / problem.p(t)), c, x, limit=200)
    return value


def _liouville_green_start(problem: SLProblem, z: complex, x: float) -> tuple[complex, complex]:
    """(psi, p psi') at x for the Liouville-Green approximation of the solution decaying at b = inf.

    Leading term w0 = i k sqrt(p r) of the Riccati variable w = p psi'/psi plus
    one correction p (q - w0') / (2 w0); exact when q = 0 and p r is constant.
    """
    k = sqrt_cut(z)

    def w0(t: float) -> complex:
        return 1j * k * math.sqrt(float(problem.p(t)) * float(problem.r(t)))

    h = LG_STEP * (x - problem.a)
    slope = (w0(x + h) - w0(x - h)) / (2.0 * h)
    lead = w0(x)
    return 1.0, lead + float(problem.p(x)) * (float(problem.q(x)) - slope) / (2.0 * lead)


def _anchors(problem: SLProblem, z: complex):
    """Candidate right anchors X.

    Finite b: points halving the distance to b. b = inf: the first doubling
    past the decay target or the Liouville-Green reach, whichever comes first.
    """
    c = problem.anchor
    if problem.b_is_finite:
        half = 0.5 * (problem.b - c)
        k = 1
        while True:
            yield problem.b - half * 2.0 ** (-k)
            k += 1
    decay_rate = sqrt_cut(z).imag
    x = c + problem.scale
    while decay_rate * _liouville_distance(problem, c, x) < DECAY_TARGET and x - c < LG_REACH * problem.scale:
        x = c + 2.0 * (x - c)
    while True:
        yield x
        x = c + 2.0 * (x - c)


def weyl_solution(
    problem: SLProblem,
    z: complex,
    classification: EndpointClassification | None = None,
    frame: EndpointFrame | None = None,
    rtol: float = 1e-11,
    epsilon: float = DEFAULT_EPSILON,
    anchor_rtol: float = ANCHOR_RTOL,
    max_doublings: int = MAX_DOUBLINGS,
    anchor_cap: float = ANCHOR_CAP,
) -> WeylSolution:
    """Square-integrable-at-b solution psi with psi~(a) = 1; m0(z) = psi~'(a).

    For b = inf the integration back to the anchor starts from Liouville-Green
    data, so z close to the continuous spectrum needs no exponential separation.
    """
    z = require_nonreal(z)
    _require(classification, problem, 1)
    c = problem.anchor
    if frame is None:
        frame = endpoint_frame(problem, z, "a", rtol=rtol, epsilon=epsilon)
    previous = None
    for count, x_anchor in enumerate(_anchors(problem, z)):
        if count > max_doublings:
            raise AnchorNotConverged(
                f"m0({z}) still moving after {max_doublings} anchors: last {previous:.10g}."
            )
        if problem.b_is_finite:
            u0, u0_quasi = 0.0, 1.0
        else:
            if x_anchor - c > anchor_cap * problem.scale:
                raise NoDecaySeparation(
                    f"m0({z}) not settled before x = {x_anchor:.3g} (cap {anchor_cap:g} scales)."
                )
            u0, u0_quasi = _liouville_green_start(problem, z, x_anchor)
        trace = integrate(problem, z, x_anchor, u0, u0_quasi, c, rtol=rtol)
        value, derivative = frame.data_of(trace, c)
        m0 = derivative / value
        logger.debug("m0(%s) at anchor %.4g: %.12g", z, x_anchor, m0)
        if previous is not None and abs(m0 - previous) <= anchor_rtol * abs(m0):
            psi = Spliced(
                left=frame.solution(1.0, m0),
                right=combine((1.0 / value, trace)),
                at=c,
            )
            return WeylSolution(z=z, trace=psi, m0=m0, anchor=x_anchor, frame=frame)
        previous = m0
    raise AnchorNotConverged(f"m0({z}) did not settle.")


def weyl_m(problem: SLProblem, z: complex, **kwargs) -> complex:
    return weyl_solution(problem, z, **kwargs).m0


# ---------------------------------------------------------------------------
# two limit-circle endpoints


@dataclass(frozen=True)
class DeficiencyBasis:
    z: complex
    u1: Solution
    u2: Solution
    u1_prime_a: complex
    u1_prime_b: complex
    u2_prime_a: complex
    u2_prime_b: complex
    frames: tuple[EndpointFrame, EndpointFrame] = field(compare=False, repr=False)

    def prime(self, j: int, endpoint: str) -> complex:
        """u_j~'(z, endpoint)."""
        return getattr(self, f"u{j}_prime_{endpoint}")

    def wronskian_residual(self) -> float:
        """|u2~'(b) + u1~'(a)|, zero by constancy of W(u1, u2)."""
        return abs(self.u2_prime_b + self.u1_prime_a)


def deficiency_basis(
    problem: SLProblem,
    z: complex,
    classification: EndpointClassification | None = None,
    rtol: float = 1e-11,
    allow_real: bool = False,
    epsilon: float = DEFAULT_EPSILON,
) -> DeficiencyBasis:
    z = complex(z) if allow_real else require_nonreal(z)
    _require(classification, problem, 2)
    c = problem.anchor
    frame_a = endpoint_frame(problem, z, "a", rtol=rtol, epsilon=epsilon)
    frame_b = endpoint_frame(problem, z, "b", rtol=rtol, epsilon=epsilon)
    phi = frame_a.solution(0.0, 1.0)
    theta = frame_a.solution(1.0, 0.0)
    phi_b, phi_prime_b = frame_b.data_of(phi, c)
    theta_b, theta_prime_b = frame_b.data_of(theta, c)
    if abs(phi_b) <= SINGULAR_MAP * max(1.0, abs(phi_prime_b)):
        raise SingularBoundaryMap(f"phi~(z, b) vanishes at z = {z}: z is an eigenvalue of T_00.")
    u1_prime_a = 1.0 / phi_b
    u1_prime_b = phi_prime_b / phi_b
    u2_prime_a = -theta_b / phi_b
    u2_prime_b = theta_prime_b - theta_b * phi_prime_b / phi_b
    u1 = Spliced(
        left=combine((u1_prime_a, phi)),
        right=frame_b.solution(1.0, u1_prime_b),
        at=c,
    )
    u2 = Spliced(
        left=combine((1.0, theta), (u2_prime_a, phi)),
        right=frame_b.solution(0.0, u2_prime_b),
        at=c,
    )
    basis = DeficiencyBasis(
        z=z,
        u1=u1,
        u2=u2,
        u1_prime_a=complex(u1_prime_a),
        u1_prime_b=complex(u1_prime_b),
        u2_prime_a=complex(u2_prime_a),
        u2_prime_b=complex(u2_prime_b),
        frames=(frame_a, frame_b),
    )
    logger.debug("deficiency basis at z=%s, W residual %.2e", z, basis.wronskian_residual())
    return basis


@dataclass(frozen=True)
class OrthonormalDeficiencyBasis:
    """v1 = c1 u1(i), v2 = c2 (u2(i) - mu u1(i)); constants frozen at z = i."""

    problem: SLProblem = field(repr=False)
    at_i: DeficiencyBasis
    c1: float
    c2: float
    mu: float
    classification: EndpointClassification | None = field(default=None, compare=False, repr=False)
    rtol: float = field(default=1e-11, compare=False)
    epsilon: float = field(default=DEFAULT_EPSILON, compare=False)

    @property
    def mixing(self) -> np.ndarray:
        """G with v_k = sum_l u_l G[l, k]."""
        return np.array([[self.c1, -self.c2 * self.mu], [0.0, self.c2]], dtype=complex)

    def vectors(self, basis: DeficiencyBasis) -> tuple[Solution, Solution]:
        """(v1(z), v2(z)) from the basis at z with the frozen constants."""
        v1 = combine((self.c1, basis.u1))
        v2 = combine((self.c2, basis.u2), (-self.c2 * self.mu, basis.u1))
        return v1, v2

    @property
    def v1(self) -> Solution:
        return self.vectors(self.at_i)[0]

    @property
    def v2(self) -> Solution:
        return self.vectors(self.at_i)[1]

    def continuation(self, z: complex) -> tuple[Solution, Solution]:
        basis = deficiency_basis(self.problem, z, self.classification, rtol=self.rtol, epsilon=self.epsilon)
        return self.vectors(basis)

    def norms_from_boundary_data(self) -> dict:
        b = self.at_i
        return {
            "u1_norm_sq": -b.u1_prime_b.imag,
            "u2_norm_sq": b.u2_prime_a.imag,
            "u1_u2": -b.u2_prime_b.imag,
        }


def orthonormal_basis(
    problem: SLProblem,
    classification: EndpointClassification | None = None,
    rtol: float = 1e-11,
    epsilon: float = DEFAULT_EPSILON,
) -> OrthonormalDeficiencyBasis:
    classification = _require(classification, problem, 2)
    at_i = deficiency_basis(problem, 1j, classification, rtol=rtol, epsilon=epsilon)
    u1_norm_sq = -at_i.u1_prime_b.imag
    u2_norm_sq = at_i.u2_prime_a.imag
    if u1_norm_sq <= 0 or u2_norm_sq <= 0:
        raise NonPositiveNorm(
            f"Boundary-data norms ||u1||^2 = {u1_norm_sq:.3e}, ||u2||^2 = {u2_norm_sq:.3e}."
        )
    mu = at_i.u2_prime_b.imag / at_i.u1_prime_b.imag
    reduced = u2_norm_sq + at_i.u2_prime_b.imag ** 2 / at_i.u1_prime_b.imag
    if reduced <= 0:
        raise NonPositiveNorm(f"||u2 - mu u1||^2 = {reduced:.3e} from boundary data.")
    return OrthonormalDeficiencyBasis(
        problem=problem,
        at_i=at_i,
        c1=u1_norm_sq**-0.5,
        c2=reduced**-0.5,
        mu=mu,
        classification=classification,
        rtol=rtol,
        epsilon=epsilon,
    )
