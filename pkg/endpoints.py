"""Endpoint analysis: Weyl classification, principal pairs, generalized boundary values.

Generalized boundary values at a limit-circle endpoint d are the Wronskian
limits g~(d) = -W(u, g)(d) and g~'(d) = W(u_hat, g)(d) against a principal
pair (u, u_hat) at a real lambda0. At a regular endpoint they reduce to
g(d) and g^[1](d).

Solutions at nonreal z are started at the endpoint through an EndpointFrame:
the principal pair values at d + eps serve as initial data and the first-order
tail integrals of r u^2, r u u_hat, r u_hat^2 over (d, d + eps) correct their
boundary data, so no integration ever runs into the singularity.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as scipy_integrate

from problem import (
    Classification,
    Endpoint,
    EndpointClassification,
    EndpointKind,
    SLProblem,
)
from utils.errors import (
    ConfigError,
    Inconclusive,
    NonConvergentLimit,
    NonFiniteValue,
    StepUnderflow,
    ZeroEncountered,
)
from utils.linalg import inv2, mat2
from utils.ode import (
    Combination,
    Solution,
    combine,
    integrate,
    quadrature_inner_product,
    wronskian_at,
)

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-8
NUMERIC_PAIR_OFFSET = 1e-4
PROBE_DEPTH = 40
LIMIT_RTOL = 1e-6
NOISE = 1e-14
AITKEN_LEVELS = 2
CIRCLE_RATIO = 0.93
POINT_RATIO = 0.98
PAIR_DEPTH = 24
LAM0_RETRIES = 6


def _sign(endpoint: Endpoint) -> float:
    """+1 when the interior lies to the right of the endpoint."""
    return 1.0 if endpoint == "a" else -1.0


def _half_distance(problem: SLProblem, endpoint: Endpoint) -> float:
    return 0.5 * abs(problem.anchor - problem.endpoint_value(endpoint))


def _probe_points(problem: SLProblem, endpoint: Endpoint, depth: int) -> np.ndarray:
    """x_k = d +- s 2^{-k}, k = 0..depth, moving toward the endpoint."""
    d = problem.endpoint_value(endpoint)
    s = _half_distance(problem, endpoint)
    return d + _sign(endpoint) * s * 2.0 ** (-np.arange(depth + 1, dtype=float))


# ---------------------------------------------------------------------------
# classification


def _piece_ratios(problem, trace, points) -> list[float]:
    pieces = []
    for x_outer, x_inner in zip(points[:-1], points[1:]):
        lo, hi = min(x_outer, x_inner), max(x_outer, x_inner)

        def integrand(x):
            u, _ = trace.evaluate(x)
            return float(problem.r(x) * abs(u) ** 2)

        value, _ = scipy_integrate.quad(integrand, lo, hi, limit=200)
        if not math.isfinite(value):
            return [math.inf]
        pieces.append(value)
    return [pieces[k] / pieces[k - 1] if pieces[k - 1] > 0 else math.inf for k in range(1, len(pieces))]


def _tail_points(problem: SLProblem, endpoint: Endpoint, depth: int) -> np.ndarray:
    if endpoint == "b" and not problem.b_is_finite:
        c = problem.anchor
        return c + problem.scale * (2.0 ** np.arange(depth + 1, dtype=float) - 1.0)
    return _probe_points(problem, endpoint, depth)


def _numeric_classification(problem, endpoint, z_probe, tail_depths) -> tuple[Classification, dict]:
    depth = max(tail_depths) + 1
    points = _tail_points(problem, endpoint, depth)
    c = problem.anchor
    evidence = {"method": "numeric", "z_probe": [z_probe.real, z_probe.imag], "ratios": []}
    verdicts = []
    for u0, u0_quasi in ((1.0, 0.0), (0.0, 1.0)):
        try:
            trace = integrate(problem, z_probe, c, u0, u0_quasi, float(points[-1]))
        except NonFiniteValue:
            evidence["ratios"].append([math.inf])
            verdicts.append(Classification.LIMIT_POINT)
            continue
        except StepUnderflow as e:
            raise Inconclusive(f"Tail integration toward {endpoint} stalled: {e.message}") from e
        ratios = _piece_ratios(problem, trace, points)
        sampled = [ratios[k - 1] for k in tail_depths if k - 1 < len(ratios)] or ratios[-1:]
        evidence["ratios"].append(sampled)
        worst = max(sampled)
        if worst <= CIRCLE_RATIO:
            verdicts.append(Classification.LIMIT_CIRCLE)
        elif worst >= POINT_RATIO:
            verdicts.append(Classification.LIMIT_POINT)
        else:
            verdicts.append(None)
    if Classification.LIMIT_POINT in verdicts:
        return Classification.LIMIT_POINT, evidence
    if None in verdicts:
        logger.warning("classification at %s inconclusive: ratios %s", endpoint, evidence["ratios"])
        raise Inconclusive(
            f"Tail ratios at {endpoint} are between {CIRCLE_RATIO} and {POINT_RATIO}: "
            f"{evidence['ratios']}. Deepen the tails."
        )
    return Classification.LIMIT_CIRCLE, evidence


def classify_endpoint(
    problem: SLProblem,
    endpoint: Endpoint,
    z_probe: complex = 1j,
    tail_depths: list[int] | None = None,
    method: str = "auto",
    evidence: dict | None = None,
) -> Classification:
    """Limit circle iff r|y|^2 has a convergent tail for two independent solutions.

    ``method="auto"`` uses the family's analytic rule when it has one; regular
    endpoints are limit circle. ``method="numeric"`` always runs the dyadic
    tail test at ``z_probe``.
    """
    z_probe = complex(z_probe)
    if z_probe.imag == 0:
        raise ConfigError("z_probe must be nonreal.")
    if method not in ("auto", "numeric"):
        raise ConfigError(f"Unknown classification method {method!r}.")
    if evidence is None:
        evidence = {}
    if method == "auto":
        analytic = problem.family.analytic_classification(problem, endpoint)
        if analytic is not None:
            evidence[endpoint] = {"method": "analytic", "family": problem.family.tag}
            return analytic
        if problem.kind(endpoint) == EndpointKind.REGULAR:
            evidence[endpoint] = {"method": "regular"}
            return Classification.LIMIT_CIRCLE
    if tail_depths is None:
        infinite = endpoint == "b" and not problem.b_is_finite
        tail_depths = [4, 5] if infinite else [16, 18, 20]
    result, details = _numeric_classification(problem, endpoint, z_probe, tail_depths)
    evidence[endpoint] = details
    logger.debug("endpoint %s of %s: %s", endpoint, problem.name, result.value)
    return result


def classify(problem: SLProblem, z_probe: complex = 1j, method: str = "auto") -> EndpointClassification:
    evidence = {}
    at_a = classify_endpoint(problem, "a", z_probe, method=method, evidence=evidence)
    at_b = classify_endpoint(problem, "b", z_probe, method=method, evidence=evidence)
    return EndpointClassification(at_a=at_a, at_b=at_b, evidence=evidence)


# ---------------------------------------------------------------------------
# principal pairs


@dataclass(frozen=True)
class PrincipalPair:
    lam0: float
    endpoint: Endpoint
    u: Solution
    u_hat: Solution
    normalization: complex
    closed_form: bool = False

    @property
    def span(self) -> tuple[float, float]:
        return max(self.u.span[0], self.u_hat.span[0]), min(self.u.span[1], self.u_hat.span[1])


@dataclass
class PairDiagnostics:
    wronskian: complex
    ratios: list[float]
    ratio_monotone: bool
    u_reciprocal_ratio: float
    u_hat_reciprocal_ratio: float


def _default_lam0(problem: SLProblem, endpoint: Endpoint) -> float:
    xs = _probe_points(problem, endpoint, 20)
    potential = np.asarray(problem.q(xs), dtype=float) / np.asarray(problem.r(xs), dtype=float)
    return min(0.0, float(np.min(potential))) - 1.0


def _regular_pair(problem, lam0, endpoint, rtol) -> PrincipalPair:
    d = problem.endpoint_value(endpoint)
    c = problem.anchor
    u = integrate(problem, lam0, d, 0.0, 1.0, c, rtol=rtol)
    u_hat = integrate(problem, lam0, d, 1.0, 0.0, c, rtol=rtol)
    return PrincipalPair(lam0, endpoint, u, u_hat, wronskian_at(u_hat, u, d))


def _numeric_pair(problem, lam0, endpoint, rtol) -> PrincipalPair:
    """Recessive u by a Dirichlet condition at the deepest probe, u_hat with W(u_hat, u) = 1."""
    c = problem.anchor
    points = _probe_points(problem, endpoint, PAIR_DEPTH)
    deepest = float(points[-1])
    y1 = integrate(problem, lam0, c, 1.0, 0.0, deepest, rtol=rtol)
    y2 = integrate(problem, lam0, c, 0.0, 1.0, deepest, rtol=rtol)
    y1_deep, _ = y1.evaluate(deepest)
    y2_deep, _ = y2.evaluate(deepest)
    if y2_deep == 0:
        raise ZeroEncountered(f"Trial solution vanishes at the probe {deepest:.3g}.")
    u = combine((1.0, y1), (-y1_deep / y2_deep, y2))
    # u(c) = 1 and u^[1](c) = -y1_deep / y2_deep
    neighborhood = np.geomspace(abs(float(points[-4]) - c), abs(float(points[0]) - c), 200)
    samples, _ = u.evaluate(c - _sign(endpoint) * neighborhood)
    if np.any(np.diff(np.sign(samples.real)) != 0):
        raise ZeroEncountered(f"Principal candidate at lambda0 = {lam0:g} has a zero near {endpoint}.")
    u_hat = integrate(problem, lam0, c, 0.0, -1.0, deepest, rtol=rtol)
    return PrincipalPair(lam0, endpoint, u, u_hat, wronskian_at(u_hat, u, c))


def principal_pair(
    problem: SLProblem,
    lam0: float | None = None,
    endpoint: Endpoint = "a",
    rtol: float = 1e-11,
) -> PrincipalPair:
    """Principal u and nonprincipal u_hat at lambda0 with W(u_hat, u) = 1."""
    kind = problem.kind(endpoint)
    if kind == EndpointKind.INFINITE:
        raise ConfigError("Principal pairs are only built at finite endpoints.")
    if lam0 is None:
        closed = problem.family.closed_form_pair(problem, endpoint, 0.0)
        if closed is not None:
            lam0 = 0.0
    if lam0 is not None:
        closed = problem.family.closed_form_pair(problem, endpoint, lam0)
        if closed is not None:
            u, u_hat = closed
            x = problem.anchor
            return PrincipalPair(lam0, endpoint, u, u_hat, wronskian_at(u_hat, u, x), closed_form=True)
    if kind == EndpointKind.REGULAR:
        return _regular_pair(problem, 0.0 if lam0 is None else lam0, endpoint, rtol)
    if lam0 is not None:
        return _numeric_pair(problem, lam0, endpoint, rtol)
    lam0 = _default_lam0(problem, endpoint)
    for attempt in range(LAM0_RETRIES):
        try:
            return _numeric_pair(problem, lam0, endpoint, rtol)
        except ZeroEncountered:
            logger.debug("lambda0 = %g gave a zero at %s, lowering", lam0, endpoint)
            lam0 = 2.0 * lam0
    raise ZeroEncountered(f"No nonvanishing principal solution at {endpoint} down to lambda0 = {lam0:g}.")


def _reciprocal_ratio(problem, solution, points) -> float:
    """Ratio of the last two dyadic pieces of int dx / (p y^2)."""
    pieces = []
    for x_outer, x_inner in zip(points[:-1], points[1:]):
        lo, hi = min(x_outer, x_inner), max(x_outer, x_inner)

        def integrand(x):
            y, _ = solution.evaluate(x)
            return float(1.0 / (problem.p(x) * abs(y) ** 2))

        pieces.append(scipy_integrate.quad(integrand, lo, hi, limit=200)[0])
    return pieces[-1] / pieces[-2]


def pair_diagnostics(problem: SLProblem, pair: PrincipalPair, depth: int = 20) -> PairDiagnostics:
    lo, hi = pair.span
    points = [x for x in _probe_points(problem, pair.endpoint, depth) if lo < x < hi]
    if len(points) < 3:
        raise ConfigError("Principal pair span is too short for diagnostics.")
    u, _ = pair.u.evaluate(np.array(points))
    u_hat, _ = pair.u_hat.evaluate(np.array(points))
    ratios = list(np.abs(u / u_hat))
    return PairDiagnostics(
        wronskian=wronskian_at(pair.u_hat, pair.u, points[len(points) // 2]),
        ratios=ratios,
        ratio_monotone=bool(np.all(np.diff(ratios) < 0)),
        u_reciprocal_ratio=_reciprocal_ratio(problem, pair.u, points[-4:]),
        u_hat_reciprocal_ratio=_reciprocal_ratio(problem, pair.u_hat, points[-4:]),
    )


# ---------------------------------------------------------------------------
# Wronskian limits


def _richardson(values, rtol: float = LIMIT_RTOL) -> complex:
    """Limit of a sequence by repeated Aitken extrapolation, noise-truncated."""
    seq = np.asarray(values, dtype=complex)
    floor = NOISE * max(1.0, float(np.max(np.abs(seq))))
    settled = np.nonzero(np.abs(np.diff(seq)) <= floor)[0]
    if settled.size:
        seq = seq[: settled[0] + 2]
    for _ in range(AITKEN_LEVELS):
        if seq.size < 3:
            break
        first = seq[1:-1] - seq[:-2]
        second = seq[2:] - seq[1:-1]
        denom = second - first
        with np.errstate(all="ignore"):
            accelerated = np.where(np.abs(denom) > floor, seq[2:] - second**2 / denom, seq[2:])
        seq = accelerated
    estimate = complex(seq[-1])
    if seq.size >= 2:
        spread = abs(seq[-1] - seq[-2])
        if spread > rtol * max(abs(estimate), 1.0):
            raise NonConvergentLimit(
                f"Extrapolants {seq[-2]:.10g} and {seq[-1]:.10g} disagree by {spread:.2e}."
            )
        logger.debug("wronskian limit %.12g (spread %.2e)", estimate, spread)
    return estimate


@dataclass(frozen=True)
class BoundaryValues:
    g_tilde: complex
    g_tilde_prime: complex
    quotient: complex | None = None
    probes: int = 0


def boundary_values(
    problem: SLProblem,
    g: Solution,
    endpoint: Endpoint,
    pair: PrincipalPair,
    depth: int = PROBE_DEPTH,
    rtol: float = LIMIT_RTOL,
) -> BoundaryValues:
    """g~(d) = -W(u, g)(d) and g~'(d) = W(u_hat, g)(d) as limits along x_k -> d."""
    d = problem.endpoint_value(endpoint)
    lo = max(g.span[0], pair.span[0])
    hi = min(g.span[1], pair.span[1])
    if lo <= d <= hi:
        return BoundaryValues(
            g_tilde=-wronskian_at(pair.u, g, d),
            g_tilde_prime=wronskian_at(pair.u_hat, g, d),
            quotient=None,
            probes=1,
        )
    points = np.array([x for x in _probe_points(problem, endpoint, depth) if lo <= x <= hi])
    if points.size < 3:
        raise NonConvergentLimit(f"Only {points.size} probe points toward {endpoint} lie in the span.")
    w_u = wronskian_at(pair.u, g, points)
    w_u_hat = wronskian_at(pair.u_hat, g, points)
    g_values, _ = g.evaluate(points[-1])
    u_hat_values, _ = pair.u_hat.evaluate(points[-1])
    return BoundaryValues(
        g_tilde=-_richardson(w_u, rtol),
        g_tilde_prime=_richardson(w_u_hat, rtol),
        quotient=complex(g_values / u_hat_values),
        probes=int(points.size),
    )


@dataclass(frozen=True)
class GeneralizedBoundaryData:
    """Boundary values at the limit-circle endpoints; None at limit-point ones."""

    g_tilde_a: complex | None = None
    g_tilde_prime_a: complex | None = None
    g_tilde_b: complex | None = None
    g_tilde_prime_b: complex | None = None

    def at(self, endpoint: Endpoint) -> tuple[complex, complex]:
        if endpoint == "a":
            values = self.g_tilde_a, self.g_tilde_prime_a
        else:
            values = self.g_tilde_b, self.g_tilde_prime_b
        if values[0] is None:
            raise ConfigError(f"No generalized boundary data at the limit-point endpoint {endpoint}.")
        return values

    def bracket(self, other: GeneralizedBoundaryData, endpoint: Endpoint) -> complex:
        """g~ h~' - g~' h~ at the endpoint, equal to W(g, h)(d)."""
        g0, g1 = self.at(endpoint)
        h0, h1 = other.at(endpoint)
        return g0 * h1 - g1 * h0


def boundary_data(
    problem: SLProblem,
    g: Solution,
    classification: EndpointClassification | None = None,
    pairs: dict | None = None,
    depth: int = PROBE_DEPTH,
) -> GeneralizedBoundaryData:
    if classification is None:
        classification = classify(problem)
    pairs = pairs or {}
    values = {}
    for endpoint, kind in (("a", classification.at_a), ("b", classification.at_b)):
        if kind != Classification.LIMIT_CIRCLE:
            continue
        pair = pairs.get(endpoint) or principal_pair(problem, endpoint=endpoint)
        bv = boundary_values(problem, g, endpoint, pair, depth=depth)
        values[f"g_tilde_{endpoint}"] = bv.g_tilde
        values[f"g_tilde_prime_{endpoint}"] = bv.g_tilde_prime
    return GeneralizedBoundaryData(**values)


# ---------------------------------------------------------------------------
# endpoint frames


@dataclass(frozen=True)
class EndpointFrame:
    """Two solutions at z started at a limit-circle endpoint, with exact boundary data.

    ``data`` holds the generalized boundary data of (y1, y2) as columns.
    """

    endpoint: Endpoint
    z: complex
    start: float
    reach: float
    y1: Solution
    y2: Solution
    data: np.ndarray
    pair: PrincipalPair | None = field(default=None, compare=False)

    def solution(self, s: complex, t: complex) -> Combination:
        """The solution with generalized boundary data (s, t) at the endpoint."""
        coefficients = inv2(self.data) @ np.array([s, t], dtype=complex)
        return combine((coefficients[0], self.y1), (coefficients[1], self.y2))

    @property
    def normalized(self) -> tuple[Combination, Combination]:
        return self.solution(1.0, 0.0), self.solution(0.0, 1.0)

    def data_of(self, g: Solution, x: float | None = None) -> tuple[complex, complex]:
        """(g~, g~') at the endpoint of a solution g at the frame's z."""
        x = self.reach if x is None else x
        y_theta, y_phi = self.normalized
        unit = wronskian_at(y_theta, y_phi, x)
        return wronskian_at(g, y_phi, x) / unit, wronskian_at(y_theta, g, x) / unit


def _tail_moments(problem, pair: PrincipalPair, start: float) -> tuple[float, float, float]:
    moments = problem.family.tail_moments(problem, pair.endpoint, pair.lam0, start)
    if moments is not None:
        return moments
    d = problem.endpoint_value(pair.endpoint)
    lo, hi = min(d, start), max(d, start)
    return tuple(
        quadrature_inner_product(problem, f, g, lo, hi).real
        for f, g in ((pair.u, pair.u), (pair.u, pair.u_hat), (pair.u_hat, pair.u_hat))
    )


def endpoint_frame(
    problem: SLProblem,
    z: complex,
    endpoint: Endpoint,
    reach: float | None = None,
    rtol: float = 1e-11,
    epsilon: float = DEFAULT_EPSILON,
    pair: PrincipalPair | None = None,
) -> EndpointFrame:
    z = complex(z)
    reach = problem.anchor if reach is None else reach
    kind = problem.kind(endpoint)
    d = problem.endpoint_value(endpoint)
    if kind == EndpointKind.INFINITE:
        raise ConfigError("No endpoint frame at infinity.")
    if kind == EndpointKind.REGULAR and pair is None:
        y1 = integrate(problem, z, d, 1.0, 0.0, reach, rtol=rtol)
        y2 = integrate(problem, z, d, 0.0, 1.0, reach, rtol=rtol)
        return EndpointFrame(endpoint, z, d, reach, y1, y2, np.eye(2, dtype=complex))
    if pair is None:
        pair = principal_pair(problem, endpoint=endpoint, rtol=rtol)
    offset = epsilon * problem.scale if pair.closed_form else NUMERIC_PAIR_OFFSET * _half_distance(problem, endpoint)
    start = d + _sign(endpoint) * offset if kind == EndpointKind.SINGULAR else d
    u0, u0_quasi = pair.u.evaluate(start)
    v0, v0_quasi = pair.u_hat.evaluate(start)
    y1 = integrate(problem, z, start, complex(v0), complex(v0_quasi), reach, rtol=rtol)
    y2 = integrate(problem, z, start, complex(u0), complex(u0_quasi), reach, rtol=rtol)
    if start == d:
        data = np.eye(2, dtype=complex)
    else:
        i_uu, i_u_uhat, i_uhat_uhat = _tail_moments(problem, pair, start)
        shift = _sign(endpoint) * (z - pair.lam0)
        data = mat2(1 - shift * i_u_uhat, -shift * i_uu, shift * i_uhat_uhat, 1 + shift * i_u_uhat)
    logger.debug("frame at %s for z=%s starts at %.3g", endpoint, z, start)
    return EndpointFrame(endpoint, z, start, reach, y1, y2, data, pair)
