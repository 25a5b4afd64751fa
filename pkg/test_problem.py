import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st

from models.bessel import BesselParams, bessel_problem
from models.regular import regular_problem
from models.tabulated import load_table, tabulated_problem
from problem import (
    Classification,
    Coupled,
    EndpointClassification,
    EndpointKind,
    OneEndpoint,
    Separated,
    check_admissible,
    make_coupled,
    spec_from_dict,
    validate_problem,
)
from utils.errors import (
    ConfigError,
    InadmissibleExtension,
    NonPositiveCoefficient,
    NotUnimodular,
)

angles = st.floats(min_value=0.0, max_value=math.pi, exclude_max=True, allow_nan=False)
phases = st.floats(min_value=0.0, max_value=2 * math.pi, exclude_max=True, allow_nan=False)
entries = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


@given(angles, angles)
def test_separated_round_trip(alpha, beta):
    spec = Separated(alpha, beta)
    assert spec_from_dict(spec.to_dict()) == spec


@given(angles)
def test_one_endpoint_round_trip(alpha):
    spec = OneEndpoint(alpha)
    assert spec_from_dict(spec.to_dict()) == spec


@given(phases, entries.filter(lambda v: abs(v) > 1e-3), entries)
def test_coupled_round_trip(phi, r11, r12):
    spec = make_coupled(phi, [[r11, r12], [0.0, 1.0 / r11]])
    assert spec_from_dict(spec.to_dict()) == spec


def test_friedrichs_flags():
    assert Separated(0.0, 0.0).is_friedrichs()
    assert not Separated(0.0, 0.5).is_friedrichs()
    assert OneEndpoint(0.0).is_friedrichs()
    assert not Coupled(0.0, ((1.0, 0.0), (0.0, 1.0))).is_friedrichs()


def test_coupled_needs_unit_determinant():
    with pytest.raises(NotUnimodular):
        make_coupled(0.0, [[2.0, 0.0], [0.0, 1.0]])


@pytest.mark.parametrize("bad", [-0.1, math.pi, 7.0, math.nan])
def test_angles_outside_range(bad):
    with pytest.raises(ConfigError):
        Separated(bad, 0.0)


def test_unknown_kind():
    with pytest.raises(ConfigError):
        spec_from_dict({"kind": "periodic"})


def test_admissibility():
    one = EndpointClassification(Classification.LIMIT_CIRCLE, Classification.LIMIT_POINT)
    two = EndpointClassification(Classification.LIMIT_CIRCLE, Classification.LIMIT_CIRCLE)
    check_admissible(OneEndpoint(0.3), one)
    check_admissible(Separated(0.3, 0.1), two)
    with pytest.raises(InadmissibleExtension):
        check_admissible(Separated(0.0, 0.0), one)
    with pytest.raises(InadmissibleExtension):
        check_admissible(OneEndpoint(0.0), two)


def test_infinite_b_is_math_inf():
    problem = bessel_problem(BesselParams(0.0, 0.0, 0.5))
    assert problem.b == math.inf
    assert not problem.b_is_finite
    assert problem.kind("a") == EndpointKind.SINGULAR
    assert problem.kind("b") == EndpointKind.INFINITE


def test_validate_regular_problem():
    report = validate_problem(regular_problem())
    assert report.valid
    assert len(report.intervals) == len(report.integrals["r"])


def test_validate_bessel_problem():
    report = validate_problem(bessel_problem(BesselParams(0.5, -0.5, 0.25, 2.0)))
    assert report.valid
    assert all(math.isfinite(v) for v in report.integrals["abs_q"])


def test_validate_rejects_sign_change():
    problem = regular_problem(p=lambda x: np.cos(x) + 0.0 * x)
    with pytest.raises(NonPositiveCoefficient):
        validate_problem(problem)


def test_regular_problem_rejects_nonpositive_weight():
    with pytest.raises(ConfigError):
        regular_problem(r=0.0)


@pytest.mark.parametrize("delta, nu, gamma", [(-1.0, 0.0, 0.5), (0.0, 1.0, 0.5), (0.0, 0.0, -0.1)])
def test_bessel_parameter_ranges(delta, nu, gamma):
    with pytest.raises(ConfigError):
        BesselParams(delta, nu, gamma)


def _constant_table(n=40):
    x = np.linspace(0.0, math.pi, n)
    return pd.DataFrame({"x": x, "p": 1.0, "q": 0.0, "r": 1.0})


def test_tabulated_constant_coefficients(tmp_path):
    path = tmp_path / "coefficients.csv"
    _constant_table().sample(frac=1.0, random_state=0).to_csv(path, index=False)
    table = load_table(str(path))
    assert table["x"].is_monotonic_increasing
    problem = tabulated_problem(str(path))
    assert problem.a == 0.0
    assert problem.b == pytest.approx(math.pi)
    xs = np.linspace(0.1, 3.0, 7)
    assert np.allclose(problem.p(xs), 1.0)
    assert np.allclose(problem.q(xs), 0.0)


def test_tabulated_table_checks(tmp_path):
    path = tmp_path / "short.csv"
    _constant_table(3).to_csv(path, index=False)
    with pytest.raises(ConfigError):
        load_table(str(path))
    bad = _constant_table()
    bad.loc[3, "r"] = -1.0
    with pytest.raises(NonPositiveCoefficient):
        tabulated_problem(bad)
