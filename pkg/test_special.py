import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from utils.branch import arg_cut, log_cut, power_cut, require_off_cut, sqrt_cut
from utils.errors import DomainTooLarge, OnCutZ, PoleOrder, SingularK
from utils.linalg import det2, imag_part, inv2, mat2
from utils.special import bessel_j, bessel_kernel

upper_half = st.builds(
    complex,
    st.floats(min_value=-8.0, max_value=8.0, allow_nan=False),
    st.floats(min_value=0.05, max_value=8.0, allow_nan=False),
)
orders = st.floats(min_value=0.0, max_value=1.95, allow_nan=False).filter(lambda v: abs(v - round(v)) > 1e-3)


def test_log_branch():
    assert log_cut(-1j) == pytest.approx(1.5j * math.pi)
    assert log_cut(1j) == pytest.approx(0.5j * math.pi)
    assert log_cut(-1.0 + 1e-300j) == pytest.approx(1j * math.pi)


def test_arg_range():
    for z in (1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j):
        assert 0 < arg_cut(z) < 2 * math.pi


@given(
    st.builds(
        complex,
        st.floats(min_value=-10, max_value=10, allow_nan=False),
        st.floats(min_value=1e-3, max_value=10, allow_nan=False),
    ),
    st.booleans(),
)
def test_sqrt_has_nonnegative_imaginary_part(z, lower):
    z = z.conjugate() if lower else z
    root = sqrt_cut(z)
    assert root.imag >= 0
    assert root * root == pytest.approx(z, rel=1e-12)


def test_power_cut_matches_definition():
    z = -2.0 - 0.5j
    assert power_cut(z, 0.3) == pytest.approx(cmath.exp(0.3 * log_cut(z)))
    assert power_cut(z, 0.0) == 1.0


@pytest.mark.parametrize("z", [0.0, 2.0])
def test_off_cut(z):
    with pytest.raises(OnCutZ):
        require_off_cut(z)


@given(orders, upper_half)
def test_bessel_j_against_scipy(order, w):
    value, derivative, error = bessel_j(order, w)
    assert value == pytest.approx(special.jv(order, w), rel=1e-9, abs=1e-11)
    assert derivative == pytest.approx(special.jvp(order, w), rel=1e-9, abs=1e-11)
    assert error < 1e-6


@given(orders, upper_half)
def test_kernel_against_scipy(order, w):
    kernel = bessel_kernel(order, w)
    assert kernel.Y == pytest.approx(special.yv(order, w), rel=1e-8, abs=1e-10)
    assert kernel.H1 == pytest.approx(special.hankel1(order, w), rel=1e-8, abs=1e-10)


@given(orders, upper_half)
def test_kernel_wronskian(order, w):
    kernel = bessel_kernel(order, w)
    assert kernel.J * kernel.dY - kernel.dJ * kernel.Y == pytest.approx(2 / (math.pi * w), rel=1e-8)


@pytest.mark.parametrize("n", [0, 1])
def test_integer_orders(n):
    w = 1.3 + 0.7j
    kernel = bessel_kernel(float(n), w)
    assert kernel.Y == pytest.approx(special.yv(n, w), rel=1e-10)
    assert kernel.dY == pytest.approx(special.yvp(n, w), rel=1e-10)


def test_near_integer_order():
    w = 0.8 + 0.4j
    assert bessel_kernel(1e-8, w).Y == pytest.approx(special.yv(0, w), rel=1e-6)
    with pytest.raises(PoleOrder):
        bessel_kernel(1e-8, w, allow_limit=False)


def test_kernel_radius():
    with pytest.raises(DomainTooLarge):
        bessel_kernel(0.5, 31.0 + 1j)


def test_inverse_and_guard():
    m = mat2(2.0, 1.0j, 0.5, 3.0)
    assert np.allclose(inv2(m) @ m, np.eye(2))
    assert det2(m) == pytest.approx(6.0 - 0.5j)
    with pytest.raises(SingularK):
        inv2(mat2(1.0, 2.0, 2.0, 4.0))


def test_imag_part_is_hermitian():
    m = mat2(1 + 2j, 3 - 1j, 0.5j, -2 + 0.25j)
    h = imag_part(m)
    assert np.allclose(h, np.conj(h).T)
