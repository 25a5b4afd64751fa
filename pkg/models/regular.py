"""Regular coefficient family: constants or user callables on a finite or half-infinite interval."""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from problem import Classification, EndpointKind, SLProblem
from utils.errors import ConfigError


def _constant(value: float) -> Callable:
    def coefficient(x):
        return np.full(np.shape(x), value, dtype=float) if np.ndim(x) else float(value)

    return coefficient


@dataclass(frozen=True)
class RegularFamily:
    p0: float | None = 1.0
    q0: float | None = 0.0
    r0: float | None = 1.0
    tag: str = "regular"

    @property
    def constant(self) -> bool:
        return None not in (self.p0, self.q0, self.r0)

    def endpoint_kind(self, problem, endpoint):
        if endpoint == "b" and not problem.b_is_finite:
            return EndpointKind.INFINITE
        return EndpointKind.REGULAR

    def analytic_classification(self, problem, endpoint):
        if self.endpoint_kind(problem, endpoint) == EndpointKind.REGULAR:
            return Classification.LIMIT_CIRCLE
        # q bounded below with constant p, r
        return Classification.LIMIT_POINT if self.constant else None

    def closed_form_pair(self, problem, endpoint, lam0):
        return None

    def tail_moments(self, problem, endpoint, lam0, x0):
        return None

    def liouville(self, problem, x):
        if self.constant:
            return math.sqrt(self.r0 / self.p0) * x
        return None

    def describe(self) -> dict:
        return {"family": self.tag, "p": self.p0, "q": self.q0, "r": self.r0}


def regular_problem(
    a: float = 0.0,
    b: float = math.pi,
    p: float | Callable = 1.0,
    q: float | Callable = 0.0,
    r: float | Callable = 1.0,
    name: str = "",
) -> SLProblem:
    """Constant coefficients become vectorized evaluators; callables pass through."""
    if not math.isfinite(a):
        raise ConfigError("A regular problem needs a finite left endpoint.")
    values = {}
    coefficients = {}
    for key, given in (("p", p), ("q", q), ("r", r)):
        if callable(given):
            values[key] = None
            coefficients[key] = given
        else:
            values[key] = float(given)
            coefficients[key] = _constant(float(given))
    if values["p"] is not None and values["p"] <= 0 or values["r"] is not None and values["r"] <= 0:
        raise ConfigError("p and r must be positive.")
    family = RegularFamily(p0=values["p"], q0=values["q"], r0=values["r"])
    return SLProblem(
        p=coefficients["p"],
        q=coefficients["q"],
        r=coefficients["r"],
        a=float(a),
        b=float(b),
        family=family,
        name=name or f"regular(a={a:g}, b={b:g})",
    )
