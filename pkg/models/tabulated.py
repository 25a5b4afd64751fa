"""Coefficients read from a CSV table (columns x, p, q, r) and cubic-interpolated."""

from dataclasses import dataclass, field

import pandas as pd
from scipy.interpolate import CubicSpline

from problem import Classification, EndpointKind, SLProblem
from utils.errors import ConfigError, NonPositiveCoefficient

COLUMNS = ["x", "p", "q", "r"]


def load_table(path: str) -> pd.DataFrame:
    df = pd.read_csv(path)
    missing = [c for c in COLUMNS if c not in df.columns]
    if missing:
        raise ConfigError(f"Coefficient table {path} is missing columns {missing}.")
    df = df[COLUMNS].dropna().sort_values("x").drop_duplicates("x").reset_index(drop=True)
    if len(df) < 4:
        raise ConfigError(f"Coefficient table {path} needs at least 4 rows, found {len(df)}.")
    return df


@dataclass(frozen=True)
class TabulatedFamily:
    table: pd.DataFrame = field(repr=False, compare=False)
    source: str = ""
    tag: str = "tabulated"

    def __post_init__(self):
        if (self.table["p"] <= 0).any() or (self.table["r"] <= 0).any():
            raise NonPositiveCoefficient("Tabulated p or r is not positive.")

    def spline(self, column: str) -> CubicSpline:
        return CubicSpline(self.table["x"].to_numpy(), self.table[column].to_numpy())

    def endpoint_kind(self, problem, endpoint):
        return EndpointKind.REGULAR

    def analytic_classification(self, problem, endpoint):
        return Classification.LIMIT_CIRCLE

    def closed_form_pair(self, problem, endpoint, lam0):
        return None

    def tail_moments(self, problem, endpoint, lam0, x0):
        return None

    def liouville(self, problem, x):
        return None

    def describe(self) -> dict:
        return {"family": self.tag, "table": self.source, "rows": len(self.table)}


def tabulated_problem(table: pd.DataFrame | str, name: str = "") -> SLProblem:
    source = table if isinstance(table, str) else ""
    if isinstance(table, str):
        table = load_table(table)
    family = TabulatedFamily(table=table, source=source)
    splines = {column: family.spline(column) for column in ("p", "q", "r")}
    x = table["x"].to_numpy()
    return SLProblem(
        p=lambda t: splines["p"](t),
        q=lambda t: splines["q"](t),
        r=lambda t: splines["r"](t),
        a=float(x[0]),
        b=float(x[-1]),
        family=family,
        name=name or f"tabulated({source or 'inline'})",
    )
