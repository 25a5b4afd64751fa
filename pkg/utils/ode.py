"""Solutions of (tau - z) u = 0 as the first-order system in (u, u^[1] = p u').

Every solution object exposes ``z``, ``span`` and ``evaluate(x) -> (u, u^[1])``;
integrated traces, closed forms, linear combinations and spliced pieces all
share that surface so Wronskians and inner products never care which one
they hold.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np
from scipy import integrate as scipy_integrate

from utils.errors import (
    EqualSpectralParams,
    NoConvergence,
    NonFiniteValue,
    NumericalError,
    OutOfRange,
    StepUnderflow,
)

logger = logging.getLogger(__name__)

SPAN_SLACK = 1e-12


class Solution(Protocol):
    z: complex

    @property
    def span(self) -> tuple[float, float]: ...

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray]: ...


def _check_span(solution: Solution, x):
    lo, hi = solution.span
    slack = SPAN_SLACK * max(1.0, abs(lo), abs(hi))
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < lo - slack) or np.any(x_arr > hi + slack):
        raise OutOfRange(f"x outside the solution span [{lo:.6g}, {hi:.6g}].")
    return np.clip(x_arr, lo, hi)


@dataclass(frozen=True)
class SolutionTrace:
    """Integrated solution with the DOP853 dense output."""

    z: complex
    grid: np.ndarray
    values: np.ndarray
    dense: scipy_integrate.OdeSolution

    @property
    def span(self) -> tuple[float, float]:
        return float(min(self.grid[0], self.grid[-1])), float(max(self.grid[0], self.grid[-1]))

    def evaluate(self, x):
        y = self.dense(_check_span(self, x))
        return y[0], y[1]


@dataclass(frozen=True)
class ClosedFormSolution:
    z: complex
    lo: float
    hi: float
    fn: Callable

    @property
    def span(self) -> tuple[float, float]:
        return self.lo, self.hi

    def evaluate(self, x):
        return self.fn(_check_span(self, x))


@dataclass(frozen=True)
class Combination:
    """sum_k coefficients[k] * solutions[k]; all terms share one z."""

    coefficients: tuple[complex, ...]
    solutions: tuple[Solution, ...]

    @property
    def z(self) -> complex:
        return self.solutions[0].z

    @property
    def span(self) -> tuple[float, float]:
        los, his = zip(*(s.span for s in self.solutions))
        return max(los), min(his)

    def evaluate(self, x):
        x = _check_span(self, x)
        u = 0j
        u_quasi = 0j
        for c, s in zip(self.coefficients, self.solutions):
            if c == 0:
                continue
            v, v_quasi = s.evaluate(x)
            u = u + c * v
            u_quasi = u_quasi + c * v_quasi
        return u + 0 * x, u_quasi + 0 * x


@dataclass(frozen=True)
class Spliced:
    """left on x <= at, right on x > at; both must represent the same solution."""

    left: Solution
    right: Solution
    at: float

    @property
    def z(self) -> complex:
        return self.left.z

    @property
    def span(self) -> tuple[float, float]:
        return self.left.span[0], self.right.span[1]

    def evaluate(self, x):
        x = np.asarray(_check_span(self, x), dtype=float)
        on_left = x <= self.at
        u = np.zeros(x.shape, dtype=complex)
        u_quasi = np.zeros(x.shape, dtype=complex)
        if np.any(on_left):
            u[on_left], u_quasi[on_left] = self.left.evaluate(x[on_left])
        if np.any(~on_left):
            u[~on_left], u_quasi[~on_left] = self.right.evaluate(x[~on_left])
        if x.ndim == 0:
            return u[()], u_quasi[()]
        return u, u_quasi


def combine(*terms: tuple[complex, Solution]) -> Combination:
    coefficients, solutions = zip(*terms)
    return Combination(tuple(complex(c) for c in coefficients), tuple(solutions))


def integrate(
    problem,
    z: complex,
    x0: float,
    u0: complex,
    u0_quasi: complex,
    x1: float,
    rtol: float = 1e-10,
    atol: float | None = None,
) -> SolutionTrace:
    """Integrate from x0 to x1 (either direction) starting from (u0, u0_quasi)."""
    if u0 == 0 and u0_quasi == 0:
        raise ValueError("Initial data (0, 0) gives the trivial solution.")
    z = complex(z)
    p, q, r = problem.p, problem.q, problem.r

    def rhs(x, y):
        return np.array([y[1] / p(x), (q(x) - z * r(x)) * y[0]], dtype=complex)

    if atol is None:
        atol = rtol * 1e-10 * max(abs(u0), abs(u0_quasi))
    sol = scipy_integrate.solve_ivp(
        rhs,
        (x0, x1),
        np.array([u0, u0_quasi], dtype=complex),
        method="DOP853",
        dense_output=True,
        rtol=rtol,
        atol=atol,
    )
    if not np.all(np.isfinite(sol.y)):
        raise NonFiniteValue(f"Solution at z = {z} is not finite between {x0:.6g} and {x1:.6g}.")
    if sol.status < 0:
        if "step size" in sol.message.lower():
            raise StepUnderflow(f"{sol.message} (z = {z}, stopped at x = {sol.t[-1]:.6g})")
        raise NumericalError(sol.message)
    logger.debug("integrated z=%s on [%.3g, %.3g] in %d steps", z, x0, x1, sol.t.size)
    return SolutionTrace(z=z, grid=sol.t, values=sol.y.T, dense=sol.sol)


def wronskian_at(f: Solution, g: Solution, x) -> complex:
    f0, f1 = f.evaluate(x)
    g0, g1 = g.evaluate(x)
    return f0 * g1 - f1 * g0


def quasi_derivative_residual(problem, trace: SolutionTrace, n: int = 64) -> float:
    """Max relative gap between a centred difference of u and u^[1]/p."""
    lo, hi = trace.span
    h = 1e-5 * (hi - lo)
    xs = np.linspace(lo + 2 * h, hi - 2 * h, n)
    u_plus, _ = trace.evaluate(xs + h)
    u_minus, _ = trace.evaluate(xs - h)
    _, u_quasi = trace.evaluate(xs)
    derivative = (u_plus - u_minus) / (2 * h)
    expected = u_quasi / problem.p(xs)
    return float(np.max(np.abs(derivative - expected)) / max(1.0, np.max(np.abs(expected))))


def green_inner_product(problem, y1: Solution, y2: Solution, alpha: float, beta: float) -> complex:
    """int_alpha^beta r y1 y2 dx for solutions at z1 != z2, bilinear (no conjugation)."""
    z1, z2 = complex(y1.z), complex(y2.z)
    if z1 == z2:
        raise EqualSpectralParams()
    return (wronskian_at(y1, y2, beta) - wronskian_at(y1, y2, alpha)) / (z1 - z2)


def _quad(integrand, lo, hi, rtol) -> complex:
    value, _ = scipy_integrate.quad(
        integrand, lo, hi, complex_func=True, epsrel=rtol, epsabs=1e-15, limit=200
    )
    return complex(value)


def _toward_edge(integrand, inner, edge, reach, rtol, scale, max_pieces) -> complex:
    """Geometric subdivision from inner toward edge, evaluable only up to reach."""
    def segment(x, y):
        return _quad(integrand, min(x, y), max(x, y), rtol)

    if edge == reach:
        return segment(inner, edge)
    direction = 1.0 if edge > inner else -1.0
    finite = math.isfinite(edge)

    def point(k):
        if finite:
            return edge - direction * abs(edge - inner) * 2.0 ** (-k)
        return inner + direction * scale * (2.0**k - 1.0)

    total = 0j
    pieces = []
    small = 0
    for k in range(max_pieces):
        lo, hi = point(k), point(k + 1)
        if direction * (hi - reach) >= 0:
            total += segment(lo, reach)
            return total + _extrapolated_tail(pieces, edge, reach, lo, finite)
        piece = segment(lo, hi)
        pieces.append(piece)
        total += piece
        small = small + 1 if abs(piece) <= rtol * abs(total) else 0
        if small >= 2:
            return total
    raise NoConvergence(f"Tail toward {edge} did not converge after {max_pieces} pieces.")


def _extrapolated_tail(pieces, edge, reach, last_bound, finite) -> complex:
    if len(pieces) < 2 or abs(pieces[-2]) == 0:
        return 0j
    ratio = abs(pieces[-1]) / abs(pieces[-2])
    if ratio >= 1.0:
        if abs(pieces[-1]) == 0:
            return 0j
        raise NoConvergence("Quadrature tail pieces are not decaying.")
    if not finite:
        return pieces[-1] * ratio / (1.0 - ratio)
    exponent = -math.log2(ratio)
    outer = abs(edge - last_bound) * 2.0
    remaining = abs(edge - reach)
    return pieces[-1] * (remaining / outer) ** exponent / (1.0 - ratio)


def quadrature_inner_product(
    problem,
    f: Solution,
    g: Solution,
    alpha: float,
    beta: float,
    rtol: float = 1e-10,
    max_pieces: int = 90,
) -> complex:
    """Sesquilinear int_alpha^beta r conj(f) g dx, improper toward unreached edges."""
    lo = max(alpha, f.span[0], g.span[0])
    hi = min(beta, f.span[1], g.span[1])

    def integrand(x):
        f0, _ = f.evaluate(x)
        g0, _ = g.evaluate(x)
        return complex(problem.r(x) * np.conj(f0) * g0)

    middle = 0.5 * (lo + hi)
    scale = hi - middle
    return _toward_edge(integrand, middle, alpha, lo, rtol, scale, max_pieces) + _toward_edge(
        integrand, middle, beta, hi, rtol, scale, max_pieces
    )
