import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deficiency import deficiency_basis
from krein import (
    apply_resolvent_direct,
    coupled_primeness,
    extension_coupling,
    k_alpha,
    krein_matrix,
    krein_von_neumann_coupling,
    krein_von_neumann_matrix,
    krein_von_neumann_spec,
    one_endpoint_coupling,
    one_endpoint_primeness,
    separated_pair_primeness,
    separated_primeness,
    unit_eigenspace,
)
from models.bessel import BesselParams, bessel_krein_vn_matrix, bessel_problem, bessel_weyl_m
from models.regular import regular_problem
from problem import Coupled, OneEndpoint, Separated, make_coupled
from utils.errors import ConfigError, FriedrichsReference, OutOfRange
from validation import krein_identity_residual, seeded_functions

UNIT = ((1.0, 0.0), (0.0, 1.0))
SHEAR = ((1.0, 1.0), (0.0, 1.0))


@pytest.fixture(scope="module")
def interval():
    return regular_problem()


def test_separated_primeness():
    assert separated_primeness(0.0, 0.0, UNIT) == 0.0
    assert separated_primeness(math.pi / 2, 0.0, UNIT) == pytest.approx(-1.0)
    assert separated_primeness(0.0, 0.0, SHEAR) == pytest.approx(1.0)


def test_coupled_primeness():
    assert coupled_primeness(0.3, SHEAR, 0.3, SHEAR) == pytest.approx(0.0, abs=1e-12)
    assert unit_eigenspace(0.3, SHEAR, 0.3, SHEAR).shape == (2, 2)
    assert coupled_primeness(0.0, UNIT, math.pi, UNIT) == pytest.approx(4.0)
    assert unit_eigenspace(0.0, UNIT, math.pi, UNIT).shape == (2, 0)


def test_pair_primeness():
    assert separated_pair_primeness(0.1, 0.2, 0.3, 0.4)
    assert not separated_pair_primeness(0.1, 0.2, 0.1, 0.4)
    assert one_endpoint_primeness(0.0, 0.5)
    assert not one_endpoint_primeness(0.5, 0.5)


def test_k_alpha_closed_form():
    params = BesselParams(0.0, 0.0, 0.5)
    problem = bessel_problem(params)
    alpha = math.pi / 3
    expected = -math.cos(alpha) / math.sin(alpha) - bessel_weyl_m(params, 2j)
    assert k_alpha(problem, alpha, 2j) == pytest.approx(expected, rel=1e-6)
    with pytest.raises(ConfigError):
        k_alpha(problem, 0.0, 2j)


def test_friedrichs_has_no_coupling(interval):
    with pytest.raises(FriedrichsReference):
        krein_matrix(interval, Separated(0.0, 0.0), 1j)
    with pytest.raises(FriedrichsReference):
        one_endpoint_coupling(bessel_problem(BesselParams(0.0, 0.0, 0.5)), OneEndpoint(0.0), 1j)
    with pytest.raises(ConfigError):
        krein_matrix(interval, OneEndpoint(0.5), 1j)


def test_separated_coupling_shapes(interval):
    basis = deficiency_basis(interval, 1 + 1j)
    scalar = extension_coupling(interval, Separated(0.0, math.pi / 3), 1 + 1j, basis=basis)
    assert scalar.kind == "scalar"
    assert scalar.value == pytest.approx(1 / math.tan(math.pi / 3) + basis.u1_prime_b)
    assert scalar.coefficients().shape == (2, 2)
    matrix = extension_coupling(interval, Separated(math.pi / 4, math.pi / 3), 1 + 1j, basis=basis)
    assert matrix.kind == "matrix"
    assert np.allclose(matrix.coefficients() @ matrix.value, np.eye(2))


def test_bessel_krein_von_neumann_closed_form():
    R = bessel_krein_vn_matrix(BesselParams(0.0, 0.0, 0.5, 1.0))
    assert np.allclose(R, [[1.0, 1.0], [0.0, 1.0]], atol=1e-12)


@settings(deadline=None)
@given(
    st.floats(min_value=0.2, max_value=5.0),
    st.floats(min_value=-0.5, max_value=2.0),
    st.floats(min_value=-1.0, max_value=0.5),
    st.floats(min_value=0.1, max_value=0.9),
)
def test_bessel_krein_von_neumann_is_unimodular(b, delta, nu, gamma):
    R = bessel_krein_vn_matrix(BesselParams(delta, nu, gamma, b))
    assert np.linalg.det(R) == pytest.approx(1.0, rel=1e-9)


def test_krein_von_neumann_matrix_numeric():
    problem = bessel_problem(BesselParams(0.0, 0.0, 0.5, 1.0))
    assert np.allclose(krein_von_neumann_matrix(problem), [[1.0, 1.0], [0.0, 1.0]], atol=1e-6)


def test_krein_von_neumann_matrix_regular(interval):
    spec = krein_von_neumann_spec(interval)
    assert spec.phi == 0.0
    assert np.allclose(spec.matrix, [[1.0, math.pi], [0.0, 1.0]], atol=1e-8)


@pytest.mark.parametrize("z", [2j, 1 + 1j, -3 - 0.5j])
def test_krein_von_neumann_coupling_matches_coupled(interval, z):
    basis = deficiency_basis(interval, z)
    direct = krein_von_neumann_coupling(interval, z, basis=basis)
    via_spec = krein_matrix(interval, krein_von_neumann_spec(interval), z, basis=basis)
    assert np.allclose(direct.value, via_spec.value, atol=1e-8)


def test_krein_von_neumann_near_zero(interval):
    with pytest.raises(OutOfRange):
        krein_von_neumann_coupling(interval, 1e-4j)


def test_rank_one_coupled_coupling(interval):
    spec = make_coupled(0.0, [[2.0, 0.0], [1.0, 0.5]])
    coupling = extension_coupling(interval, spec, 1j)
    assert coupling.kind == "scalar"
    assert coupling.weights == (1.0, 0.5)


@pytest.mark.parametrize(
    "spec",
    [
        Separated(math.pi / 4, math.pi / 3),
        Coupled(math.pi / 3, SHEAR),
        Separated(0.0, math.pi / 2),
        make_coupled(0.0, [[2.0, 0.0], [1.0, 0.5]]),
        "krein_von_neumann",
    ],
)
@pytest.mark.parametrize("z", [1.5 + 0.8j, -2 + 0.5j, 2 - 1j])
@pytest.mark.parametrize("index", range(5))
def test_krein_identity_regular(interval, spec, z, index):
    if spec == "krein_von_neumann":
        spec = krein_von_neumann_spec(interval)
    f = seeded_functions(interval, seed=11, count=5)[index]
    assert krein_identity_residual(interval, spec, z, f) <= 1e-6


@pytest.mark.parametrize("alpha", [math.pi / 4, 2.0])
@pytest.mark.parametrize("z", [1 + 1j, -1 + 0.5j, 2 - 1j])
@pytest.mark.parametrize("index", range(5))
def test_krein_identity_one_endpoint(alpha, z, index):
    problem = bessel_problem(BesselParams(0.0, 0.0, 0.5))
    f = seeded_functions(problem, seed=3, count=5)[index]
    assert krein_identity_residual(problem, OneEndpoint(alpha), z, f) <= 1e-5


@pytest.mark.parametrize("z", [1 + 1j, -2 + 0.5j])
def test_dirichlet_resolvent_of_constant(interval, z):
    result = apply_resolvent_direct(interval, Separated(0.0, 0.0), z, lambda x: np.ones_like(x, dtype=complex))
    k = cmath.sqrt(z)
    exact = -1 / z + np.cos(k * (result.x - math.pi / 2)) / (z * cmath.cos(k * math.pi / 2))
    assert np.allclose(result.values, exact, atol=1e-5)
