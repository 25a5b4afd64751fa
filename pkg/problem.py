"""Problem definition, extension parametrizations and endpoint records.

The differential expression is tau u = r^{-1} [-(p u')' + q u] on (a, b).
A right endpoint at infinity is ``math.inf``; code branches on
``problem.b_is_finite`` and never on a large sentinel.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, ClassVar, Literal, Protocol

import numpy as np
from scipy import integrate

from utils.errors import (
    ConfigError,
    InadmissibleExtension,
    NonIntegrable,
    NonPositiveCoefficient,
    NotUnimodular,
)

logger = logging.getLogger(__name__)

Endpoint = Literal["a", "b"]
Coefficient = Callable[[Any], Any]

DET_TOLERANCE = 1e-12


class EndpointKind(str, Enum):
    REGULAR = "regular"
    SINGULAR = "singular"
    INFINITE = "infinite"


class Classification(str, Enum):
    LIMIT_CIRCLE = "limit-circle"
    LIMIT_POINT = "limit-point"


class CoefficientFamily(Protocol):
    tag: str

    def endpoint_kind(self, problem: SLProblem, endpoint: Endpoint) -> EndpointKind: ...

    def analytic_classification(
        self, problem: SLProblem, endpoint: Endpoint
    ) -> Classification | None: ...

    def closed_form_pair(self, problem: SLProblem, endpoint: Endpoint, lam0: float): ...

    def tail_moments(
        self, problem: SLProblem, endpoint: Endpoint, lam0: float, x0: float
    ) -> tuple[float, float, float] | None: ...

    def liouville(self, problem: SLProblem, x: float) -> float | None: ...

    def describe(self) -> dict: ...


@dataclass(frozen=True)
class SLProblem:
    p: Coefficient
    q: Coefficient
    r: Coefficient
    a: float
    b: float
    family: CoefficientFamily
    name: str = ""

    def __post_init__(self):
        if not math.isfinite(self.a):
            raise ConfigError("Left endpoint a must be finite.")
        if not self.b > self.a:
            raise ConfigError(f"Empty interval ({self.a}, {self.b}).")

    @property
    def b_is_finite(self) -> bool:
        return math.isfinite(self.b)

    @property
    def scale(self) -> float:
        return self.b - self.a if self.b_is_finite else 1.0

    @property
    def anchor(self) -> float:
        if self.b_is_finite:
            return 0.5 * (self.a + self.b)
        return self.a + self.scale

    def endpoint_value(self, endpoint: Endpoint) -> float:
        return self.a if endpoint == "a" else self.b

    def kind(self, endpoint: Endpoint) -> EndpointKind:
        return self.family.endpoint_kind(self, endpoint)

    def describe(self) -> dict:
        return {"a": self.a, "b": "inf" if not self.b_is_finite else self.b, **self.family.describe()}


@dataclass
class ValidationReport:
    valid: bool
    intervals: list[tuple[float, float]]
    integrals: dict[str, list[float]]
    flags: list[str] = field(default_factory=list)


def _probe_intervals(problem: SLProblem, depth: int) -> list[tuple[float, float]]:
    c = problem.anchor
    half = c - problem.a
    intervals = [(problem.a + half * 2.0 ** (-k), c) for k in range(1, depth + 1)]
    if problem.b_is_finite:
        intervals += [(c, problem.b - half * 2.0 ** (-k)) for k in range(1, depth + 1)]
    else:
        intervals += [(c, c + problem.scale * 2.0**k) for k in range(depth)]
    return intervals


def validate_problem(problem: SLProblem, depth: int = 6, n_points: int = 33) -> ValidationReport:
    """Probe local integrability of 1/p, |q| and r and positivity of p and r."""
    intervals = _probe_intervals(problem, depth)
    integrands = {
        "inv_p": lambda x: 1.0 / problem.p(x),
        "abs_q": lambda x: abs(problem.q(x)),
        "r": lambda x: problem.r(x),
    }
    integrals = {name: [] for name in integrands}
    flags = []
    for lo, hi in intervals:
        xs = np.linspace(lo, hi, n_points)
        p_values = np.asarray(problem.p(xs), dtype=float)
        r_values = np.asarray(problem.r(xs), dtype=float)
        if np.any(p_values <= 0) or np.any(r_values <= 0):
            raise NonPositiveCoefficient(
                f"p or r is not positive on the probe interval [{lo:.6g}, {hi:.6g}]."
            )
        if not np.all(np.isfinite(np.asarray(problem.q(xs), dtype=float))):
            raise NonIntegrable(f"q is not finite on the probe interval [{lo:.6g}, {hi:.6g}].")
        for name, integrand in integrands.items():
            with warnings.catch_warnings():
                warnings.simplefilter("error", integrate.IntegrationWarning)
                try:
                    value, abserr = integrate.quad(integrand, lo, hi, limit=200)
                except integrate.IntegrationWarning as e:
                    raise NonIntegrable(
                        f"Quadrature of {name} on [{lo:.6g}, {hi:.6g}] diverges: {e}"
                    ) from e
            if not math.isfinite(value):
                raise NonIntegrable(f"Quadrature of {name} on [{lo:.6g}, {hi:.6g}] is not finite.")
            if abserr > 1e-6 * max(1.0, abs(value)):
                flags.append(f"{name} on [{lo:.6g}, {hi:.6g}]: abserr {abserr:.2e}")
            integrals[name].append(value)
    logger.debug("validated %s on %d probe intervals", problem.name, len(intervals))
    return ValidationReport(valid=True, intervals=intervals, integrals=integrals, flags=flags)


def _check_angle(name: str, value: float, upper: float):
    if not (0.0 <= value < upper) or not math.isfinite(value):
        raise ConfigError(f"{name} = {value} is outside [0, {upper:.6g}).")


@dataclass(frozen=True)
class Separated:
    alpha: float
    beta: float
    kind: ClassVar[str] = "separated"

    def __post_init__(self):
        _check_angle("alpha", self.alpha, math.pi)
        _check_angle("beta", self.beta, math.pi)

    def is_friedrichs(self) -> bool:
        return self.alpha == 0.0 and self.beta == 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class Coupled:
    phi: float
    R: tuple[tuple[float, float], tuple[float, float]]
    kind: ClassVar[str] = "coupled"

    def __post_init__(self):
        _check_angle("phi", self.phi, 2.0 * math.pi)
        (r11, r12), (r21, r22) = self.R
        det = r11 * r22 - r12 * r21
        if abs(det - 1.0) > DET_TOLERANCE:
            raise NotUnimodular(f"det(R) = {det!r}, expected 1.")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.R, dtype=float)

    def is_friedrichs(self) -> bool:
        return False

    def to_dict(self) -> dict:
        return {"kind": self.kind, "phi": self.phi, "R": [list(row) for row in self.R]}


@dataclass(frozen=True)
class OneEndpoint:
    alpha: float
    kind: ClassVar[str] = "one_endpoint"

    def __post_init__(self):
        _check_angle("alpha", self.alpha, math.pi)

    def is_friedrichs(self) -> bool:
        return self.alpha == 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "alpha": self.alpha}


ExtensionSpec = Separated | Coupled | OneEndpoint


def make_coupled(phi: float, R) -> Coupled:
    R = tuple(tuple(float(v) for v in row) for row in R)
    if len(R) != 2 or any(len(row) != 2 for row in R):
        raise ConfigError("R must be a 2x2 matrix.")
    return Coupled(phi=float(phi), R=R)


def spec_from_dict(data: dict) -> ExtensionSpec:
    kind = data.get("kind")
    if kind == Separated.kind:
        return Separated(alpha=float(data["alpha"]), beta=float(data["beta"]))
    if kind == Coupled.kind:
        return make_coupled(data["phi"], data["R"])
    if kind == OneEndpoint.kind:
        return OneEndpoint(alpha=float(data["alpha"]))
    raise ConfigError(f"Unknown extension kind {kind!r}.")


@dataclass(frozen=True)
class EndpointClassification:
    at_a: Classification
    at_b: Classification
    evidence: dict = field(default_factory=dict, compare=False)

    @property
    def deficiency_index(self) -> int:
        return sum(c == Classification.LIMIT_CIRCLE for c in (self.at_a, self.at_b))

    def to_dict(self) -> dict:
        return {
            "a": self.at_a.value,
            "b": self.at_b.value,
            "deficiency_index": self.deficiency_index,
            "t_min_self_adjoint": self.deficiency_index == 0,
        }


def check_admissible(spec: ExtensionSpec, classification: EndpointClassification):
    n = classification.deficiency_index
    if isinstance(spec, OneEndpoint):
        if n != 1 or classification.at_a != Classification.LIMIT_CIRCLE:
            raise InadmissibleExtension(
                "OneEndpoint needs limit circle at a and limit point at b "
                f"(got a: {classification.at_a.value}, b: {classification.at_b.value})."
            )
    elif n != 2:
        raise InadmissibleExtension(
            f"{spec.kind} boundary conditions need two limit-circle endpoints, found {n}."
        )
