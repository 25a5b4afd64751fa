import math

import numpy as np
import pytest

import donoghue as donoghue_module
from deficiency import orthonormal_basis, weyl_solution
from donoghue import (
    DonoghueMatrix,
    donoghue,
    donoghue_two_lc,
    herglotz_bound,
    herglotz_report,
    one_lc_entry,
    prepare,
    scan,
    wronskian_matrices,
)
from models.bessel import (
    BesselParams,
    bessel_donoghue_alpha,
    bessel_donoghue_friedrichs,
    bessel_problem,
)
from models.regular import regular_problem
from problem import Coupled, OneEndpoint, Separated
from utils.errors import ConfigError, InadmissibleExtension, NoDecaySeparation
from validation import (
    donoghue_by_resolvent,
    donoghue_one_lc_by_quadrature,
    random_z,
    require_passed,
    run_suite,
    spectral_sum_donoghue,
)

ORACLE_Z = [2j, 1 + 1j, -3 + 0.5j]
HALF = BesselParams(0.0, 0.0, 0.5)


@pytest.fixture(scope="module")
def interval():
    return regular_problem()


@pytest.fixture(scope="module")
def dirichlet(interval):
    return prepare(interval, Separated(0.0, 0.0))


def test_herglotz_bound_values():
    assert herglotz_bound(1j) == pytest.approx(1.0)
    assert herglotz_bound(2j) == pytest.approx(0.25)
    assert herglotz_bound(-1j) == pytest.approx(1.0)


@pytest.mark.parametrize("alpha", [0.0, 0.7])
def test_one_lc_entry_fixed_points(alpha):
    m_i = 0.3 + 1.2j
    assert one_lc_entry(alpha, m_i, m_i, m_i.conjugate(), 1j) == 1j
    assert one_lc_entry(alpha, m_i.conjugate(), m_i, m_i.conjugate(), -1j) == -1j


def test_bessel_friedrichs_spot_value():
    assert bessel_donoghue_friedrichs(HALF, 2j) == pytest.approx((1 - math.sqrt(2)) + 1j * math.sqrt(2), rel=1e-12)


@pytest.mark.parametrize("gamma", [0.0, 0.5])
@pytest.mark.parametrize("z", [2j, 1 + 1j, -1 + 0.5j, 3 - 2j])
def test_friedrichs_matches_closed_form(gamma, z):
    params = BesselParams(0.0, 0.0, gamma)
    context = prepare(bessel_problem(params), OneEndpoint(0.0))
    entry = context.evaluate(z).entries[0, 0]
    assert entry == pytest.approx(bessel_donoghue_friedrichs(params, z), abs=1e-7)


@pytest.mark.parametrize("alpha", [math.pi / 4, 2.0])
def test_alpha_matches_closed_form(alpha):
    context = prepare(bessel_problem(HALF), OneEndpoint(alpha))
    for z in (2j, 1 - 1j):
        assert context.evaluate(z).entries[0, 0] == pytest.approx(bessel_donoghue_alpha(HALF, alpha, z), abs=1e-6)


def test_one_lc_fixed_point_at_i():
    matrix = donoghue(bessel_problem(HALF), OneEndpoint(0.3), 1j)
    assert matrix.entries[0, 0] == 1j
    assert matrix.dim == 1


def test_one_lc_quadrature_agrees():
    problem = bessel_problem(HALF)
    context = prepare(problem, OneEndpoint(math.pi / 4))
    direct = context.evaluate(1 + 1j).entries[0, 0]
    assert donoghue_one_lc_by_quadrature(problem, math.pi / 4, 1 + 1j) == pytest.approx(direct, abs=1e-6)


@pytest.mark.parametrize("z", ORACLE_Z)
def test_two_lc_against_eigenfunction_expansion(dirichlet, z):
    numeric = dirichlet.evaluate(z).entries
    assert np.allclose(numeric, spectral_sum_donoghue(dirichlet.basis, z), atol=1e-6)


def test_two_lc_normalization_at_i(interval):
    basis = orthonormal_basis(interval)
    matrices = wronskian_matrices(basis, basis.at_i)
    assert np.allclose(-1j * np.eye(2) - matrices.W, 1j * np.eye(2), atol=1e-10)
    assert donoghue_two_lc(interval, Separated(0.3, 0.4), 1j, basis).entries[0, 0] == 1j


@pytest.mark.parametrize(
    "spec",
    [Separated(0.0, 0.0), Separated(math.pi / 4, math.pi / 3), Coupled(math.pi / 3, ((1.0, 1.0), (0.0, 1.0)))],
)
def test_two_lc_is_herglotz(interval, spec):
    context = prepare(interval, spec)
    for z in random_z(5, 12):
        matrix = context.evaluate(z)
        assert matrix.herglotz_margin() >= -1e-8
        assert matrix.symmetry_residual(context.evaluate(z.conjugate())) <= 1e-8


def test_one_lc_is_herglotz():
    context = prepare(bessel_problem(HALF), OneEndpoint(1.1))
    for z in random_z(9, 12):
        matrix = context.evaluate(z)
        assert matrix.herglotz_margin() >= -1e-8
        assert matrix.symmetry_residual(context.evaluate(z.conjugate())) <= 1e-8


def test_one_lc_near_continuous_spectrum():
    context = prepare(bessel_problem(HALF), OneEndpoint(math.pi / 4))
    near = [z for z in random_z(0, 100) if abs(z.imag) < 0.05]
    assert len(near) >= 10
    for z in near:
        matrix = context.evaluate(z)
        assert matrix.herglotz_margin() >= -1e-8
        assert matrix.symmetry_residual(context.evaluate(z.conjugate())) <= 1e-8
        assert matrix.entries[0, 0] == pytest.approx(bessel_donoghue_alpha(HALF, math.pi / 4, z), rel=1e-6, abs=1e-7)


@pytest.mark.parametrize("spec", [Separated(0.0, 0.0), Separated(math.pi / 4, math.pi / 3)])
def test_resolvent_oracle(interval, spec):
    context = prepare(interval, spec)
    direct = context.evaluate(1 + 1j).entries
    assert np.allclose(donoghue_by_resolvent(interval, spec, 1 + 1j, context), direct, atol=1e-5)


def test_krein_von_neumann_by_name(interval):
    context = prepare(interval, "krein_von_neumann")
    assert isinstance(context.spec, Coupled)
    matrix = context.evaluate(2j)
    assert matrix.herglotz_margin() >= -1e-8


def test_admissibility_is_checked(interval):
    with pytest.raises(InadmissibleExtension):
        prepare(interval, OneEndpoint(0.5))
    with pytest.raises(InadmissibleExtension):
        prepare(bessel_problem(HALF), Separated(0.0, 0.0))


def test_scan_keeps_grid_order(interval):
    zs = random_z(1, 8, im_min=0.1)
    context = prepare(interval, Separated(math.pi / 4, math.pi / 3))
    serial = scan(interval, None, zs, threads=1, context=context, progress=False)
    parallel = scan(interval, None, zs, threads=4, context=context, progress=False)
    assert [row.z for row in parallel] == zs
    for a, b in zip(serial, parallel):
        assert not a.error
        assert np.array_equal(a.matrix.entries, b.matrix.entries)
        assert a.herglotz_margin >= -1e-8
    assert set(serial[0].row()) >= {"z_re", "z_im", "M11_re", "M22_im", "herglotz_margin", "error"}


def test_scan_reports_failures_per_row(monkeypatch):
    problem = bessel_problem(HALF)
    context = prepare(problem, OneEndpoint(0.0))
    original = donoghue_module.weyl_m

    def weyl_m(problem, z, **kwargs):
        if z.real > 20:
            raise NoDecaySeparation(f"m0({z}) not settled.")
        return original(problem, z, **kwargs)

    monkeypatch.setattr(donoghue_module, "weyl_m", weyl_m)
    rows = scan(problem, None, [2j, 25.0 + 1e-5j], context=context, progress=False)
    assert not rows[0].error
    assert rows[1].error.startswith("NoDecaySeparation")
    assert math.isnan(rows[1].row()["herglotz_margin"])


def test_scan_rejects_real_points(interval):
    with pytest.raises(ConfigError):
        scan(interval, Separated(0.0, 0.0), [1.0], progress=False)


def test_herglotz_report_pairs_conjugates():
    samples = [
        DonoghueMatrix(2j, np.array([[2j]])),
        DonoghueMatrix(-2j, np.array([[-2j]])),
        DonoghueMatrix(1 + 1j, np.array([[0.1 + 0.01j]])),
    ]
    rows = herglotz_report(samples)
    assert rows[0].passed and rows[0].sym_residual == pytest.approx(0.0)
    assert not rows[2].passed
    assert math.isnan(rows[2].sym_residual)


def test_suite_on_dirichlet_interval(interval):
    results = run_suite(interval, Separated(0.0, 0.0), z_count=20)
    names = {r.check for r in results}
    assert {"normalization", "herglotz_bound", "gram_identity", "spectral_sum", "resolvent_entry"} <= names
    require_passed(results)


@pytest.mark.slow
@pytest.mark.parametrize("gamma", [0.0, 0.25, 0.5, 0.75])
@pytest.mark.parametrize("alpha", [0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4])
def test_bessel_sweep(gamma, alpha):
    params = BesselParams(0.0, 0.0, gamma)
    context = prepare(bessel_problem(params), OneEndpoint(alpha))
    for z in random_z(17, 20, im_min=0.2):
        entry = context.evaluate(z).entries[0, 0]
        assert entry == pytest.approx(bessel_donoghue_alpha(params, alpha, z), rel=1e-6, abs=1e-7)


@pytest.mark.slow
@pytest.mark.parametrize("delta, nu, gamma", [(0.0, 0.0, 0.5), (0.0, 0.0, 0.25)])
def test_finite_bessel_suite(delta, nu, gamma):
    problem = bessel_problem(BesselParams(delta, nu, gamma, 1.0))
    for spec in (Separated(0.0, 0.0), Separated(math.pi / 4, math.pi / 3), "krein_von_neumann"):
        require_passed(run_suite(problem, spec, z_count=30, function_count=1))


SWEEP_SPECS = [
    ("interval", Separated(0.0, 0.0)),
    ("interval", Separated(0.0, math.pi / 2)),
    ("interval", Separated(math.pi / 2, 0.0)),
    ("interval", Separated(math.pi / 4, math.pi / 3)),
    ("interval", Coupled(0.0, ((1.0, 0.0), (0.0, 1.0)))),
    ("interval", Coupled(math.pi / 3, ((1.0, 1.0), (0.0, 1.0)))),
    ("half_line", OneEndpoint(0.0)),
    ("half_line", OneEndpoint(math.pi / 4)),
]


@pytest.mark.slow
@pytest.mark.parametrize("where, spec", SWEEP_SPECS)
def test_normalization_and_herglotz_sweep(interval, where, spec):
    problem = interval if where == "interval" else bessel_problem(HALF)
    context = prepare(problem, spec)
    if isinstance(spec, OneEndpoint):
        value, _ = weyl_solution(problem, 1j, context.classification).boundary_data()
        assert value == pytest.approx(1.0, abs=1e-10)
    else:
        matrices = wronskian_matrices(context.basis, context.basis.at_i)
        assert np.allclose(-1j * np.eye(2) - matrices.W, 1j * np.eye(2), atol=1e-10)
    for z in random_z(0, 100):
        matrix = context.evaluate(z)
        assert matrix.herglotz_margin() >= -1e-8, z
        assert matrix.symmetry_residual(context.evaluate(z.conjugate())) <= 1e-8, z
