"""Donoghue m-functions M(z) = z I + (z^2 + 1) P (A - z)^{-1} P on N_i.

Entries are (v_m, M v_n) in the basis psi(i)/||psi(i)|| (one limit-circle
endpoint) or {v1(i), v2(i)} (two). Every inner product is reduced to
boundary data through the Green identity, so no quadrature enters.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from deficiency import (
    DeficiencyBasis,
    OrthonormalDeficiencyBasis,
    deficiency_basis,
    orthonormal_basis,
    require_nonreal,
    weyl_m,
)
from endpoints import DEFAULT_EPSILON, classify
from krein import krein_matrix, krein_von_neumann_spec
from problem import (
    EndpointClassification,
    ExtensionSpec,
    OneEndpoint,
    SLProblem,
    check_admissible,
    spec_from_dict,
)
from utils.errors import DegenerateDenominator, NumericalError
from utils.linalg import adjoint, imag_part

logger = logging.getLogger(__name__)

DENOMINATOR_GUARD = 1e-12


def herglotz_bound(z: complex) -> float:
    """Lower bound for the spectrum of Im M(z) / Im z."""
    modulus = abs(z) ** 2
    return 2.0 / ((modulus + 1) + math.sqrt((modulus - 1) ** 2 + 4 * z.real**2))


@dataclass(frozen=True)
class DonoghueMatrix:
    z: complex
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def normalized_imag(self) -> np.ndarray:
        return imag_part(self.entries) / self.z.imag

    def herglotz_margin(self) -> float:
        smallest = float(np.min(np.linalg.eigvalsh(self.normalized_imag())))
        return smallest - herglotz_bound(self.z)

    def symmetry_residual(self, conjugate: DonoghueMatrix) -> float:
        """||M(conj z) - M(z)^*||."""
        return float(np.linalg.norm(conjugate.entries - adjoint(self.entries)))

    def row(self) -> dict:
        row = {"z_re": self.z.real, "z_im": self.z.imag}
        for (m, n), value in np.ndenumerate(self.entries):
            row[f"M{m + 1}{n + 1}_re"] = value.real
            row[f"M{m + 1}{n + 1}_im"] = value.imag
        return row


def _fixed_point(z: complex, dim: int) -> DonoghueMatrix | None:
    if z == 1j or z == -1j:
        return DonoghueMatrix(z, z * np.eye(dim, dtype=complex))
    return None


# ---------------------------------------------------------------------------
# one limit-circle endpoint


def one_lc_entry(alpha: float, m_z: complex, m_i: complex, m_minus_i: complex, z: complex) -> complex:
    """Scalar Donoghue m-function of T_alpha from Weyl m-function values."""
    if z == 1j or z == -1j:
        return complex(z)
    norm_sq = m_i.imag
    friedrichs = -1j + (m_z - m_minus_i) / norm_sq
    if alpha == 0.0:
        return friedrichs
    denominator = math.cos(alpha) / math.sin(alpha) + m_z
    if abs(denominator) < DENOMINATOR_GUARD:
        raise DegenerateDenominator(f"cot(alpha) + m0(z) = {denominator:.3e} at z = {z}.")
    return friedrichs - (m_z - m_minus_i) * (m_z - m_i) / (norm_sq * denominator)


def donoghue_one_lc(
    problem: SLProblem,
    spec: OneEndpoint,
    z: complex,
    m_i: complex | None = None,
    classification: EndpointClassification | None = None,
    rtol: float = 1e-11,
    epsilon: float = DEFAULT_EPSILON,
) -> DonoghueMatrix:
    z = complex(z)
    fixed = _fixed_point(z, 1)
    if fixed is not None:
        return fixed
    z = require_nonreal(z)
    if m_i is None:
        m_i = weyl_m(problem, 1j, classification=classification, rtol=rtol, epsilon=epsilon)
    m_z = weyl_m(problem, z, classification=classification, rtol=rtol, epsilon=epsilon)
    entry = one_lc_entry(spec.alpha, m_z, m_i, m_i.conjugate(), z)
    return DonoghueMatrix(z, np.array([[entry]], dtype=complex))


# ---------------------------------------------------------------------------
# two limit-circle endpoints


@dataclass(frozen=True)
class WronskianMatrices:
    """W[j, k] = W(v_j(-i), v_k(z))|_a^b, WKr[j, k] = W(v_j(-i), u_k(z))|_a^b,
    overlaps[j, n] = (u_j(conj z), v_n(i))."""

    z: complex
    W: np.ndarray
    WKr: np.ndarray
    overlaps: np.ndarray


def _primes(basis: DeficiencyBasis, conjugate: bool = False) -> tuple[complex, complex, complex, complex]:
    values = (basis.u1_prime_a, basis.u1_prime_b, basis.u2_prime_a, basis.u2_prime_b)
    return tuple(v.conjugate() for v in values) if conjugate else values


def _bracket(at_w, at_z) -> np.ndarray:
    """U[l, k] = W(u_l(w), u_k(z))|_a^b from boundary data."""
    w1a, w1b, w2a, w2b = at_w
    z1a, z1b, z2a, z2b = at_z
    return np.array(
        [
            [z1b - w1b, z2b + w1a],
            [-w2b - z1a, w2a - z2a],
        ],
        dtype=complex,
    )


def wronskian_matrices(basis: OrthonormalDeficiencyBasis, at_z: DeficiencyBasis) -> WronskianMatrices:
    z = at_z.z
    mixing = basis.mixing
    at_z_primes = _primes(at_z)
    kr = mixing.T @ _bracket(_primes(basis.at_i, conjugate=True), at_z_primes)
    kr_at_i = mixing.T @ _bracket(_primes(basis.at_i), at_z_primes)
    return WronskianMatrices(
        z=z,
        W=kr @ mixing,
        WKr=kr,
        overlaps=-kr_at_i.T / (z - 1j),
    )


def donoghue_two_lc(
    problem: SLProblem,
    spec: ExtensionSpec,
    z: complex,
    basis: OrthonormalDeficiencyBasis | None = None,
    classification: EndpointClassification | None = None,
    rtol: float = 1e-11,
    epsilon: float = DEFAULT_EPSILON,
) -> DonoghueMatrix:
    z = complex(z)
    fixed = _fixed_point(z, 2)
    if fixed is not None:
        return fixed
    z = require_nonreal(z)
    if basis is None:
        basis = orthonormal_basis(problem, classification, rtol=rtol, epsilon=epsilon)
    at_z = deficiency_basis(problem, z, basis.classification, rtol=rtol, epsilon=epsilon)
    matrices = wronskian_matrices(basis, at_z)
    entries = -1j * np.eye(2) - matrices.W
    if not spec.is_friedrichs():
        coefficients = krein_matrix(problem, spec, z, basis=at_z).coefficients()
        entries = entries + (1j - z) * matrices.WKr @ coefficients.T @ matrices.overlaps
    return DonoghueMatrix(z, entries)


# ---------------------------------------------------------------------------
# dispatch and scans


@dataclass
class DonoghueContext:
    """Per-problem data shared read-only across a z-grid."""

    problem: SLProblem
    spec: ExtensionSpec
    classification: EndpointClassification
    basis: OrthonormalDeficiencyBasis | None = field(default=None, repr=False)
    m_i: complex | None = None
    rtol: float = 1e-11
    epsilon: float = DEFAULT_EPSILON

    def evaluate(self, z: complex) -> DonoghueMatrix:
        tolerances = {"rtol": self.rtol, "epsilon": self.epsilon}
        if isinstance(self.spec, OneEndpoint):
            return donoghue_one_lc(self.problem, self.spec, z, self.m_i, self.classification, **tolerances)
        return donoghue_two_lc(self.problem, self.spec, z, self.basis, self.classification, **tolerances)


def resolve_spec(problem: SLProblem, spec: ExtensionSpec | dict | str, rtol: float = 1e-11) -> ExtensionSpec:
    """Accepts spec objects, their dicts, and the "krein_von_neumann" kind."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    if isinstance(spec, dict):
        if spec.get("kind") == "krein_von_neumann":
            return krein_von_neumann_spec(problem, rtol)
        return spec_from_dict(spec)
    return spec


def prepare(
    problem: SLProblem,
    spec: ExtensionSpec | dict | str,
    classification: EndpointClassification | None = None,
    rtol: float = 1e-11,
    epsilon: float = DEFAULT_EPSILON,
) -> DonoghueContext:
    """Classify, resolve and admit the spec, and build the z-independent data once."""
    if classification is None:
        classification = classify(problem)
    spec = resolve_spec(problem, spec, rtol)
    check_admissible(spec, classification)
    tolerances = {"rtol": rtol, "epsilon": epsilon}
    if isinstance(spec, OneEndpoint):
        m_i = weyl_m(problem, 1j, classification=classification, **tolerances)
        return DonoghueContext(problem, spec, classification, m_i=m_i, **tolerances)
    basis = orthonormal_basis(problem, classification, **tolerances)
    return DonoghueContext(problem, spec, classification, basis=basis, **tolerances)


def donoghue(
    problem: SLProblem,
    spec: ExtensionSpec | dict | str,
    z: complex,
    context: DonoghueContext | None = None,
) -> DonoghueMatrix:
    if context is None:
        context = prepare(problem, spec)
    return context.evaluate(z)


@dataclass
class ScanRow:
    z: complex
    matrix: DonoghueMatrix | None = None
    herglotz_margin: float = math.nan
    sym_residual: float = math.nan
    error: str = ""

    def row(self) -> dict:
        row = self.matrix.row() if self.matrix is not None else {"z_re": self.z.real, "z_im": self.z.imag}
        row.update(herglotz_margin=self.herglotz_margin, sym_residual=self.sym_residual, error=self.error)
        return row


def _scan_one(context: DonoghueContext, z: complex) -> ScanRow:
    try:
        matrix = context.evaluate(z)
        conjugate = context.evaluate(z.conjugate())
    except NumericalError as e:
        logger.warning("z = %s failed: %s", z, e.message)
        return ScanRow(z=z, error=f"{type(e).__name__}: {e.message}")
    return ScanRow(
        z=z,
        matrix=matrix,
        herglotz_margin=matrix.herglotz_margin(),
        sym_residual=matrix.symmetry_residual(conjugate),
    )


def scan(
    problem: SLProblem,
    spec: ExtensionSpec | dict | str,
    zs,
    threads: int | None = None,
    context: DonoghueContext | None = None,
    progress: bool = True,
) -> list[ScanRow]:
    """M(z) over a grid; rows come back in grid order."""
    if context is None:
        context = prepare(problem, spec)
    if threads is None:
        threads = int(os.getenv("SLDONOGHUE_THREADS", "1"))
    zs = [require_nonreal(z) for z in zs]
    rows = []
    worst = math.inf
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        results = executor.map(lambda z: _scan_one(context, z), zs)
        bar = tqdm(results, total=len(zs), desc="Donoghue", disable=not progress)
        for row in bar:
            rows.append(row)
            if not row.error:
                worst = min(worst, row.herglotz_margin)
                bar.set_postfix({"worst margin": f"{worst:.2e}"})
    return rows


@dataclass
class HerglotzRow:
    z: complex
    min_eigenvalue: float
    bound: float
    margin: float
    passed: bool
    sym_residual: float = math.nan


def herglotz_report(samples: list[DonoghueMatrix], tol: float = 1e-8) -> list[HerglotzRow]:
    """Herglotz lower bound per sample; symmetry residual when conj(z) is also sampled."""
    by_z = {s.z: s for s in samples}
    rows = []
    for sample in samples:
        smallest = float(np.min(np.linalg.eigvalsh(sample.normalized_imag())))
        bound = herglotz_bound(sample.z)
        partner = by_z.get(sample.z.conjugate())
        rows.append(
            HerglotzRow(
                z=sample.z,
                min_eigenvalue=smallest,
                bound=bound,
                margin=smallest - bound,
                passed=smallest - bound >= -tol,
                sym_residual=sample.symmetry_residual(partner) if partner is not None else math.nan,
            )
        )
    return rows
