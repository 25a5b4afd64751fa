import cmath
import math

import numpy as np
import pytest

from deficiency import (
    _liouville_green_start,
    deficiency_basis,
    orthonormal_basis,
    require_nonreal,
    weyl_m,
    weyl_solution,
)
from models.bessel import BesselParams, bessel_fundamental, bessel_problem, bessel_weyl_m, bessel_weyl_psi
from models.regular import regular_problem
from utils.errors import ConfigError, InadmissibleExtension, NoDecaySeparation
from utils.ode import quadrature_inner_product
from validation import dirichlet_primes

BESSEL_Z = [2j, 1 + 1j, -1 + 0.5j, 3 - 2j]


@pytest.fixture(scope="module")
def interval():
    return regular_problem()


@pytest.mark.parametrize("gamma", [0.0, 0.5])
@pytest.mark.parametrize("z", BESSEL_Z)
def test_weyl_m_matches_closed_form(gamma, z):
    params = BesselParams(0.0, 0.0, gamma)
    m0 = weyl_m(bessel_problem(params), z)
    assert abs(m0 - bessel_weyl_m(params, z)) <= 1e-6 * abs(bessel_weyl_m(params, z))


@pytest.mark.slow
@pytest.mark.parametrize("gamma", [0.0, 0.25, 0.5, 0.75])
@pytest.mark.parametrize("delta, nu", [(0.0, 0.0), (0.5, -0.5), (1.0, 0.5)])
def test_weyl_m_sweep(gamma, delta, nu):
    params = BesselParams(delta, nu, gamma)
    problem = bessel_problem(params)
    rng = np.random.default_rng(7)
    radius = rng.uniform(0.5, 4.0, 12)
    angle = rng.uniform(0.1, math.pi - 0.1, 12) * np.where(np.arange(12) % 2, 1.0, -1.0)
    for z in radius * np.exp(1j * angle):
        expected = bessel_weyl_m(params, complex(z))
        assert abs(weyl_m(problem, complex(z)) - expected) <= 1e-6 * abs(expected)


def test_weyl_solution_normalization():
    problem = bessel_problem(BesselParams(0.0, 0.0, 0.5))
    psi = weyl_solution(problem, 1j)
    value, derivative = psi.boundary_data()
    assert value == pytest.approx(1.0, abs=1e-9)
    assert derivative == pytest.approx(psi.m0, rel=1e-9)
    # Im m0(i) = ||psi(i)||^2
    norm_sq = quadrature_inner_product(problem, psi.trace, psi.trace, problem.a, problem.b).real
    assert norm_sq == pytest.approx(psi.m0.imag, rel=1e-7)


def test_weyl_m_is_herglotz_symmetric():
    problem = bessel_problem(BesselParams(0.5, -0.5, 0.25))
    upper = weyl_m(problem, 1.5 + 0.7j)
    lower = weyl_m(problem, 1.5 - 0.7j)
    assert upper.imag > 0
    assert lower == pytest.approx(upper.conjugate(), rel=1e-8)


def test_weyl_needs_one_limit_circle_endpoint(interval):
    with pytest.raises(InadmissibleExtension):
        weyl_solution(interval, 1j)


def test_decay_separation_guard():
    problem = bessel_problem(BesselParams(0.0, 0.0, 0.0))
    with pytest.raises(NoDecaySeparation):
        weyl_solution(problem, 25.0 + 1e-5j, anchor_cap=8.0)


@pytest.mark.parametrize("gamma, rel", [(0.5, 1e-8), (0.0, 1e-5)])
@pytest.mark.parametrize("z", [1.725 + 0.00146j, 2.259 - 0.00136j, 25.0 + 1e-5j])
def test_weyl_m_near_continuous_spectrum(gamma, rel, z):
    params = BesselParams(0.0, 0.0, gamma)
    psi = weyl_solution(bessel_problem(params), z)
    expected = bessel_weyl_m(params, z)
    assert abs(psi.m0 - expected) <= rel * abs(expected)
    assert psi.anchor - 1.0 <= 1024.0


def test_liouville_green_start_is_exact_without_potential():
    problem = bessel_problem(BesselParams(0.0, 0.0, 0.5))
    z = 4.0 - 0.01j
    value, quasi = _liouville_green_start(problem, z, 40.0)
    root = cmath.sqrt(z)
    assert root.imag < 0
    assert quasi / value == pytest.approx(-1j * root, rel=1e-12)


@pytest.mark.parametrize("z", [0.5, 1e-8j])
def test_real_axis_rejected(z):
    with pytest.raises(ConfigError):
        require_nonreal(z)


@pytest.mark.parametrize("z", [2j, 1 + 1j, -3 + 0.5j])
def test_basis_primes_match_closed_form(interval, z):
    basis = deficiency_basis(interval, z)
    expected = dirichlet_primes(z)
    for name, value in expected.items():
        assert getattr(basis, name) == pytest.approx(value, rel=1e-8)
    assert basis.wronskian_residual() < 1e-8


def test_basis_boundary_values(interval):
    basis = deficiency_basis(interval, 1 + 1j)
    u1_a, _ = basis.u1.evaluate(0.0)
    u1_b, _ = basis.u1.evaluate(math.pi)
    u2_a, _ = basis.u2.evaluate(0.0)
    u2_b, _ = basis.u2.evaluate(math.pi)
    assert (u1_a, u1_b, u2_a, u2_b) == pytest.approx((0.0, 1.0, 1.0, 0.0), abs=1e-8)
    assert basis.prime(2, "a") == basis.u2_prime_a


@pytest.mark.parametrize(
    "problem",
    [
        regular_problem(),
        regular_problem(0.0, 2.0, p=1.5, q=0.3, r=0.5),
        bessel_problem(BesselParams(0.0, 0.0, 0.5, 1.0)),
        bessel_problem(BesselParams(0.5, -0.5, 0.0, 2.0)),
    ],
)
def test_orthonormal_basis_gram(problem):
    basis = orthonormal_basis(problem)
    v = (basis.v1, basis.v2)
    gram = np.array([[quadrature_inner_product(problem, f, g, problem.a, problem.b) for g in v] for f in v])
    assert np.allclose(gram, np.eye(2), atol=1e-7)
    norms = basis.norms_from_boundary_data()
    u1_sq = quadrature_inner_product(problem, basis.at_i.u1, basis.at_i.u1, problem.a, problem.b).real
    u1_u2 = quadrature_inner_product(problem, basis.at_i.u1, basis.at_i.u2, problem.a, problem.b)
    assert norms["u1_norm_sq"] == pytest.approx(u1_sq, rel=1e-7)
    assert norms["u1_u2"] == pytest.approx(u1_u2.real, rel=1e-7, abs=1e-9)


def test_continuation_keeps_frozen_constants(interval):
    basis = orthonormal_basis(interval)
    v1, v2 = basis.continuation(2 + 1j)
    assert v1.z == 2 + 1j
    assert v2.evaluate(0.0)[0] == pytest.approx(basis.c2, rel=1e-9)
    assert v2.evaluate(math.pi)[0] == pytest.approx(-basis.c2 * basis.mu, rel=1e-9)


@pytest.mark.parametrize("gamma", [0.0, 0.5])
def test_weyl_solution_matches_hankel_form(gamma):
    params = BesselParams(0.0, 0.0, gamma)
    z = -1 + 2j
    x = 0.8
    phi, phi_quasi, theta, theta_quasi = bessel_fundamental(params, z, x)
    m0 = bessel_weyl_m(params, z)
    psi, psi_quasi = bessel_weyl_psi(params, z, x)
    assert psi == pytest.approx(theta + m0 * phi, rel=1e-7)
    assert psi_quasi == pytest.approx(theta_quasi + m0 * phi_quasi, rel=1e-7)
    numeric = weyl_solution(bessel_problem(params), z).trace.evaluate(x)
    assert numeric[0] == pytest.approx(psi, rel=1e-6)
