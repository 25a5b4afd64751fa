"""Independent oracles and the check suite behind ``sl_donoghue.py validate``."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from deficiency import OrthonormalDeficiencyBasis, deficiency_basis, weyl_solution
from donoghue import DonoghueContext, prepare, wronskian_matrices
from endpoints import DEFAULT_EPSILON
from krein import (
    GridFunction,
    apply_resolvent_direct,
    extension_coupling,
    grid_total,
    l2_norm,
)
from models.bessel import BesselFamily, bessel_donoghue_friedrichs, bessel_weyl_m
from models.regular import RegularFamily
from problem import ExtensionSpec, OneEndpoint, Separated, SLProblem
from utils.errors import NumericalError, ValidationFailure
from utils.ode import Solution, quadrature_inner_product

logger = logging.getLogger(__name__)

SPECTRAL_TERMS = 2000
KREIN_ZS = (1.0 + 1.0j, -2.0 + 0.5j, 2.0 - 1.0j)


def random_z(seed: int, count: int, im_min: float = 1e-3, im_max: float = 10.0, re_max: float = 5.0) -> list[complex]:
    """Seeded samples with im_min <= |Im z| <= im_max in both half-planes."""
    rng = np.random.default_rng(seed)
    magnitude = np.exp(rng.uniform(math.log(im_min), math.log(im_max), count))
    sign = np.where(rng.random(count) < 0.5, -1.0, 1.0)
    real = rng.uniform(-re_max, re_max, count)
    return [complex(x, s * y) for x, s, y in zip(real, sign, magnitude)]


def seeded_functions(problem: SLProblem, seed: int, count: int = 5) -> list:
    """Seeded smooth square-integrable f, vanishing like a power at finite endpoints."""
    rng = np.random.default_rng(seed)
    functions = []
    for _ in range(count):
        power = int(rng.integers(1, 3))
        omega = rng.uniform(0.0, 3.0)
        shift = rng.uniform(0.0, math.pi)
        weight = complex(rng.normal(), rng.normal())
        if problem.b_is_finite:
            a, b = problem.a, problem.b

            def f(x, power=power, omega=omega, shift=shift, weight=weight):
                x = np.asarray(x, dtype=float)
                return weight * ((x - a) * (b - x)) ** power * np.cos(omega * x + shift)

        else:
            a = problem.a
            rate = rng.uniform(1.5, 3.0)

            def f(x, power=power, omega=omega, shift=shift, weight=weight, rate=rate):
                x = np.asarray(x, dtype=float)
                return weight * (x - a) ** power * np.exp(-rate * (x - a)) * np.cos(omega * x + shift)

        functions.append(f)
    return functions


# ---------------------------------------------------------------------------
# oracles


def spectral_sum_donoghue(basis: OrthonormalDeficiencyBasis, z: complex, n_terms: int = SPECTRAL_TERMS) -> np.ndarray:
    """Friedrichs M(z) for -u'' on (0, pi) from the Dirichlet eigenfunction expansion."""
    # (v(0), v(pi)) of v1 = c1 u1 and v2 = c2 (u2 - mu u1)
    ends = np.array([[0.0, basis.c1], [basis.c2, -basis.c2 * basis.mu]], dtype=complex)
    n = np.arange(1, n_terms + 1, dtype=float)
    parity = (-1.0) ** n
    coefficients = (
        math.sqrt(2 / math.pi)
        * n[None, :]
        * (ends[:, :1] - parity[None, :] * ends[:, 1:])
        / (n[None, :] ** 2 - 1j)
    )
    weights = 1.0 / (n**2 - z)
    resolvent = np.einsum("jn,kn,n->jk", np.conj(coefficients), coefficients, weights)
    even = np.conj(ends[:, :1] - ends[:, 1:]) @ (ends[:, :1] - ends[:, 1:]).T
    odd = np.conj(ends[:, :1] + ends[:, 1:]) @ (ends[:, :1] + ends[:, 1:]).T
    tail = (2 / math.pi) * 0.5 * (even + odd) / (3.0 * n_terms**3)
    return z * np.eye(2) + (z**2 + 1) * (resolvent + tail)


def _grid_inner(problem: SLProblem, left: np.ndarray, right: np.ndarray, x: np.ndarray) -> complex:
    return grid_total(problem, x, np.conj(left) * right)


def _sampled(solution: Solution):
    """Values of a solution on x, zero outside its span."""

    def f(x):
        x = np.asarray(x, dtype=float)
        lo, hi = solution.span
        inside = (x >= lo) & (x <= hi)
        values = np.zeros(x.shape, dtype=complex)
        values[inside] = solution.evaluate(x[inside])[0]
        return values

    return f


def donoghue_by_resolvent(problem: SLProblem, spec: ExtensionSpec, z: complex, context: DonoghueContext) -> np.ndarray:
    """M(z) from the direct boundary value solve applied to the basis vectors."""
    rtol = context.rtol
    if isinstance(spec, OneEndpoint):
        psi_i = weyl_solution(problem, 1j, context.classification, rtol=rtol)
        scale = 1.0 / math.sqrt(psi_i.m0.imag)
        weyl = weyl_solution(problem, z, context.classification, rtol=rtol)
        psi_values = _sampled(psi_i.trace)
        vectors = [lambda x: scale * psi_values(x)]
        precomputed = {"weyl": weyl}
    else:
        v1, v2 = context.basis.v1, context.basis.v2
        vectors = [_sampled(v1), _sampled(v2)]
        at_z = deficiency_basis(problem, z, context.classification, rtol=rtol)
        precomputed = {"basis": at_z}
    images = [
        apply_resolvent_direct(problem, spec, z, v, context.classification, rtol=rtol, **precomputed) for v in vectors
    ]
    dim = len(vectors)
    entries = np.zeros((dim, dim), dtype=complex)
    for m in range(dim):
        for n in range(dim):
            x = images[n].x
            entries[m, n] = _grid_inner(problem, vectors[m](x), images[n].values, x)
    return z * np.eye(dim) + (z**2 + 1) * entries


def donoghue_one_lc_by_quadrature(
    problem: SLProblem, alpha: float, z: complex, rtol: float = 1e-10, ode_rtol: float = 1e-11
) -> complex:
    """Scalar M(z) with every inner product taken by quadrature instead of boundary data."""
    psi_i = weyl_solution(problem, 1j, rtol=ode_rtol).trace
    psi_z = weyl_solution(problem, z, rtol=ode_rtol).trace
    psi_conj = weyl_solution(problem, complex(z).conjugate(), rtol=ode_rtol)
    a, b = problem.a, problem.b
    norm_sq = quadrature_inner_product(problem, psi_i, psi_i, a, b, rtol).real
    overlap = quadrature_inner_product(problem, psi_i, psi_z, a, b, rtol)
    friedrichs = z + (z**2 + 1) / (norm_sq * (1j - z)) * (norm_sq - overlap)
    if alpha == 0.0:
        return friedrichs
    k = -math.cos(alpha) / math.sin(alpha) - psi_conj.m0.conjugate()
    left = quadrature_inner_product(problem, psi_conj.trace, psi_i, a, b, rtol)
    return friedrichs + (z**2 + 1) / (k * norm_sq) * left * overlap


def krein_identity_residual(
    problem: SLProblem, spec: ExtensionSpec, z: complex, f, classification=None, rtol: float = 1e-11
) -> float:
    """||(A - z)^{-1} f - (A_0 - z)^{-1} f - sum C e_j u_k|| / ||f|| on the solve grid."""
    if isinstance(spec, OneEndpoint):
        weyl = weyl_solution(problem, z, classification, rtol=rtol)
        coupling = extension_coupling(problem, spec, z, weyl=weyl)
        left = apply_resolvent_direct(problem, spec, z, f, classification, weyl=weyl, rtol=rtol)
        reference = apply_resolvent_direct(problem, OneEndpoint(0.0), z, f, classification, weyl=weyl, rtol=rtol)
    else:
        basis = deficiency_basis(problem, z, classification, rtol=rtol)
        coupling = extension_coupling(problem, spec, z, basis=basis, classification=classification)
        left = apply_resolvent_direct(problem, spec, z, f, classification, basis=basis, rtol=rtol)
        reference = apply_resolvent_direct(problem, Separated(0.0, 0.0), z, f, classification, basis=basis, rtol=rtol)
    x = left.x
    fx = np.asarray(f(x), dtype=complex)
    solutions = [s.evaluate(x)[0] for s in coupling.correction]
    moments = [grid_total(problem, x, u * fx) for u in solutions]
    correction = np.zeros_like(fx)
    for (j, k), value in np.ndenumerate(coupling.coefficients()):
        correction = correction + value * moments[j] * solutions[k]
    difference = GridFunction(x, left.values - reference.values - correction)
    return l2_norm(problem, difference) / l2_norm(problem, GridFunction(x, fx))


def dirichlet_primes(z: complex) -> dict:
    """Closed-form u_j~'(z, .) for -u'' on (0, pi)."""
    root = np.sqrt(complex(z))
    sine = np.sin(root * math.pi)
    cotangent = np.cos(root * math.pi) / sine
    return {
        "u1_prime_a": root / sine,
        "u1_prime_b": root * cotangent,
        "u2_prime_a": -root * cotangent,
        "u2_prime_b": -root / sine,
    }


# ---------------------------------------------------------------------------
# suite


@dataclass
class CheckResult:
    check: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def row(self) -> dict:
        return asdict(self)


def _check(name: str, value: float, tolerance: float, detail: str = "") -> CheckResult:
    passed = bool(np.isfinite(value) and value <= tolerance)
    return CheckResult(name, float(value), tolerance, passed, detail)


def _is_dirichlet_interval(problem: SLProblem) -> bool:
    family = problem.family
    return (
        isinstance(family, RegularFamily)
        and (family.p0, family.q0, family.r0) == (1.0, 0.0, 1.0)
        and problem.a == 0.0
        and abs(problem.b - math.pi) < 1e-15
    )


def run_suite(
    problem: SLProblem,
    spec: ExtensionSpec | dict | str,
    seed: int = 0,
    z_count: int = 100,
    function_count: int = 5,
    rtol: float = 1e-11,
    epsilon: float = DEFAULT_EPSILON,
) -> list[CheckResult]:
    context = prepare(problem, spec, rtol=rtol, epsilon=epsilon)
    spec = context.spec
    results = []

    def guarded(name, compute, tolerance):
        try:
            value, detail = compute()
        except NumericalError as e:
            results.append(CheckResult(name, math.nan, tolerance, False, f"{type(e).__name__}: {e.message}"))
            return
        results.append(_check(name, value, tolerance, detail))

    def normalization():
        if isinstance(spec, OneEndpoint):
            psi = weyl_solution(problem, 1j, context.classification, rtol=rtol, epsilon=epsilon)
            value, derivative = psi.boundary_data()
            return abs(value - 1.0) + abs(derivative - psi.m0), "psi~(i, a) = 1, psi~'(i, a) = m0(i)"
        matrices = wronskian_matrices(context.basis, context.basis.at_i)
        residual = np.linalg.norm(-1j * np.eye(2) - matrices.W - 1j * np.eye(2))
        return float(residual), "M(i) = iI from boundary data"

    def herglotz():
        worst, worst_sym = -math.inf, 0.0
        for w in random_z(seed, z_count, im_min=1e-3):
            matrix = context.evaluate(w)
            worst = max(worst, -matrix.herglotz_margin())
            worst_sym = max(worst_sym, matrix.symmetry_residual(context.evaluate(w.conjugate())))
        return worst, f"max symmetry residual {worst_sym:.2e}"

    guarded("normalization", normalization, 1e-10)
    guarded("herglotz_bound", herglotz, 1e-8)

    if isinstance(spec, OneEndpoint):

        def weyl_norm():
            psi = weyl_solution(problem, 1j, context.classification, rtol=rtol, epsilon=epsilon)
            norm_sq = quadrature_inner_product(problem, psi.trace, psi.trace, problem.a, problem.b).real
            value, _ = psi.boundary_data()
            return abs(norm_sq - psi.m0.imag) / psi.m0.imag, f"psi~(a) - 1 = {abs(value - 1):.2e}"

        guarded("weyl_norm_identity", weyl_norm, 1e-7)

        def quadrature_entry():
            w = 1.0 + 1.0j
            direct = context.evaluate(w).entries[0, 0]
            by_quadrature = donoghue_one_lc_by_quadrature(problem, spec.alpha, w, ode_rtol=rtol)
            return abs(by_quadrature - direct), "quadrature vs boundary data at z = 1+1i"

        guarded("quadrature_entry", quadrature_entry, 1e-6)
    else:

        def gram():
            v = (context.basis.v1, context.basis.v2)
            gram = np.array(
                [[quadrature_inner_product(problem, vj, vk, problem.a, problem.b) for vk in v] for vj in v]
            )
            return float(np.max(np.abs(gram - np.eye(2)))), "quadrature Gram matrix of v1, v2"

        def wronskian_constancy():
            basis = deficiency_basis(problem, 1.0 + 1.0j, context.classification, rtol=rtol, epsilon=epsilon)
            return basis.wronskian_residual(), ""

        guarded("gram_identity", gram, 1e-7)
        guarded("wronskian_constancy", wronskian_constancy, 1e-8)

    if not spec.is_friedrichs():

        def krein():
            functions = seeded_functions(problem, seed, function_count)
            worst = max(
                krein_identity_residual(problem, spec, w, f, context.classification, rtol=rtol)
                for w in KREIN_ZS
                for f in functions
            )
            return worst, f"{function_count} seeded functions at {len(KREIN_ZS)} points"

        guarded("krein_identity", krein, 1e-6)

    if problem.b_is_finite:

        def resolvent_entry():
            w = 1.0 + 1.0j
            direct = context.evaluate(w).entries
            by_resolvent = donoghue_by_resolvent(problem, spec, w, context)
            return float(np.max(np.abs(by_resolvent - direct))), "grid resolvent at z = 1+1i"

        guarded("resolvent_entry", resolvent_entry, 1e-5)

    if isinstance(problem.family, BesselFamily) and not problem.b_is_finite:
        params = problem.family.params
        zs = [0.5j + 0.5, 2j, -1 + 1j, 3 - 2j]

        def bessel_weyl():
            worst = max(
                abs(weyl_solution(problem, w, context.classification, rtol=rtol).m0 - bessel_weyl_m(params, w))
                / abs(bessel_weyl_m(params, w))
                for w in zs
            )
            return worst, "numerical vs closed-form m0"

        guarded("bessel_weyl_m", bessel_weyl, 1e-6)
        if isinstance(spec, OneEndpoint) and spec.alpha == 0.0:

            def bessel_friedrichs():
                worst = max(abs(context.evaluate(w).entries[0, 0] - bessel_donoghue_friedrichs(params, w)) for w in zs)
                return worst, "numerical vs closed-form Friedrichs M"

            guarded("bessel_donoghue", bessel_friedrichs, 1e-7)

    if _is_dirichlet_interval(problem) and isinstance(spec, Separated) and spec.is_friedrichs():

        def spectral():
            worst = max(
                float(np.max(np.abs(context.evaluate(w).entries - spectral_sum_donoghue(context.basis, w))))
                for w in (2j, 1 + 1j, -3 + 0.5j)
            )
            return worst, f"eigenfunction expansion, {SPECTRAL_TERMS} terms"

        guarded("spectral_sum", spectral, 1e-6)

    for result in results:
        logger.debug("%s: %.3e (tol %.1e) %s", result.check, result.value, result.tolerance, result.passed)
    return results


def require_passed(results: list[CheckResult]):
    failed = [r.check for r in results if not r.passed]
    if failed:
        raise ValidationFailure(f"Failed checks: {', '.join(failed)}.")
