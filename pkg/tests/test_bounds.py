import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diskode import EquationSpec, HypothesisError, PowerSeries, PreconditionError, solve_fan, solve_ray
from diskode.bounds import (
    C0,
    MajorantProblem,
    bloch_growth_bound,
    bloch_inner_integral,
    check_majorant_hypotheses,
    comparison_check,
    comparison_equation,
    constant_majorant,
    derivative_growth_bound,
    growth_bound,
    growth_constant_base,
    herold_majorant,
    hinf_growth_bound,
    integrated_weight,
    kernel_H,
    kernel_L,
    volterra_kernels,
    volterra_series_bound,
    within_bound,
)
from diskode.bounds.report import HYPOTHESES_UNMET, BoundReport
from diskode.harness import get_entry

ANGLES4 = 2 * np.pi * np.arange(4) / 4


def _sols(name, r_max=0.999, angles=ANGLES4):
    e = get_entry(name)
    eq = e.equation()
    return eq, solve_fan(eq, angles, 0.0, r_max, e.init, 1e-10)


@pytest.fixture(scope="module")
def rot():
    return _sols("rot_nonlinear")


@pytest.fixture(scope="module")
def expo():
    return _sols("exp_nonlinear")


def test_within_bound_slack():
    assert within_bound(1.0 + 5e-7, 1.0)
    assert not within_bound(1.0 + 2e-6, 1.0)
    assert within_bound(5e-10, 0.0)


def test_report_statuses():
    r = BoundReport.evaluate("x", [0, 1], [1, 2], [1, 1.5])
    assert r.status == "fail" and r.margin_min == pytest.approx(-0.5)
    assert BoundReport.evaluate("x", [0], [1], [2]).passed


# -- comparison -------------------------------------------------------------


def _herold():
    mp, A = get_entry("herold_pair").majorant()
    eq = comparison_equation(A, mp.n0, "herold")
    v = solve_ray(eq, 0.0, 0.0, 0.99, (1.0,), 1e-10, report_n=100)
    traj = herold_majorant(mp, 0.99, 1e-10, report_n=100)
    return mp, A, v, traj


def test_herold_pair_passes_both_orders():
    mp, A, v, traj = _herold()
    reports = comparison_check(v, traj, mp, A)
    assert [r.bound_id for r in reports] == ["comparison_j0", "comparison_j1"]
    assert all(r.passed for r in reports)
    i = int(np.argmin(np.abs(reports[0].r - 0.9)))
    assert reports[0].lhs[i] == pytest.approx(math.exp(0.9 * math.sqrt(2)), abs=1e-6)
    assert reports[0].rhs[i] == pytest.approx(2 * math.exp(0.9), abs=1e-6)


def test_majorant_closed_forms():
    # u'' = u with u(0) = 1, u'(0) = 0 is cosh
    mp = MajorantProblem(2, 2.0, (constant_majorant(1.0), constant_majorant(0.0)), (1.0, 0.0))
    traj = herold_majorant(mp, 0.9)
    assert np.max(np.abs(traj.u[:, 0] - np.cosh(traj.x))) < 1e-9
    assert np.max(np.abs(traj.u[:, 2] - np.cosh(traj.x))) < 1e-9


def test_perturbed_majorant_flips_to_unmet():
    mp, A, v, traj = _herold()
    bad = MajorantProblem(1, 2.0, (constant_majorant(0.999),), (1.0,))
    hyp = check_majorant_hypotheses(bad, A, [1.0], np.linspace(0, 0.99, 11))
    assert not hyp.ok and hyp.worst_ratio > 1
    reports = comparison_check(v, herold_majorant(bad, 0.99, report_n=100), bad, A)
    assert all(r.status == HYPOTHESES_UNMET for r in reports)


def test_majorant_rejects_small_n0():
    with pytest.raises(HypothesisError):
        MajorantProblem(1, 1.0, (constant_majorant(1.0),), (1.0,))


# -- growth -----------------------------------------------------------------


@pytest.mark.parametrize("eps", [0.1, 0.5])
def test_growth_and_derivative_bounds_pass(rot, expo, eps):
    for eq, sols in (rot, expo):
        for sol in sols:
            assert growth_bound(eq, sol, eps).passed
            assert all(r.passed for r in derivative_growth_bound(eq, sol, eps))


def test_growth_rhs_nondecreasing_and_eps_monotone(expo):
    eq, sols = expo
    for sol in sols:
        a = growth_bound(eq, sol, 0.1)
        b = growth_bound(eq, sol, 0.5)
        assert np.all(np.diff(a.rhs) >= 0)
        assert np.all(b.rhs > a.rhs)


def test_growth_needs_equal_exponents_and_nonzero_coefficients():
    eq = get_entry("volterra_k1").equation()
    sol = solve_ray(eq, 0.0, 0.0, 0.5, (1.0,))
    with pytest.raises(HypothesisError):
        growth_bound(eq, sol, 0.1)
    zero = EquationSpec(1, (2, 2), (PowerSeries.constant(0.0),))
    with pytest.raises(PreconditionError):
        growth_constant_base(zero, 0j, (1.0,))


@pytest.mark.parametrize("s", [0.0, 0.5])
def test_hinf_bound_passes(rot, s):
    eq, sols = rot
    for sol in sols:
        assert hinf_growth_bound(eq, sol, s).passed


def test_integrated_weight_closed_form():
    assert integrated_weight(0.5, 0.0, np.array([0.5]))[0] == pytest.approx(math.pi / 6, abs=1e-12)
    assert integrated_weight(0.0, 0.1, np.array([0.6]))[0] == pytest.approx(0.5, abs=1e-14)


def test_bloch_inner_integral_closed_form():
    v = bloch_inner_integral(2.0, 1, 0.0, 0.5)[0]
    assert v == pytest.approx(1.5 * math.log(1.5) + 0.5 * math.log(0.5), abs=1e-12)


def test_bloch_coeff_reports():
    eq, sols = _sols("bloch_coeff", angles=[0.0, math.pi])
    for sol in sols:
        pre, asym = bloch_growth_bound(eq, sol, M=2.0)
        assert pre.passed and asym.passed
        assert asym.r[0] >= C0 and asym.metadata["C_fit"] > 0


@given(st.floats(0.0, 0.9), st.floats(0.0, 0.95))
def test_growth_rhs_grows_with_r(s, nu):
    r = np.linspace(nu, 0.99, 12)
    w = integrated_weight(s, nu, r)
    assert np.all(np.diff(w) >= 0) and w[0] == pytest.approx(0.0, abs=1e-15)


# -- volterra ---------------------------------------------------------------


@pytest.fixture(scope="module")
def vk1():
    e = get_entry("volterra_k1")
    eq = e.equation()
    grid = [round(0.05 * i, 10) for i in range(1, 19)]
    vb, reps = volterra_series_bound(eq, 0.0, e.init, grid, tol=1e-10)
    return eq, e.init, grid, vb, reps


def test_volterra_kernels_closed_form(vk1):
    eq, init, *_ = vk1
    assert volterra_kernels(eq, 0.0, init, 0.5, 0.2) == pytest.approx((1.5, 0.25), abs=1e-15)


def test_volterra_iterates_closed_form(vk1):
    _, _, grid, vb, _ = vk1
    i = grid.index(0.5)
    assert vb.H[0][i] == pytest.approx(1.5, abs=1e-8)
    assert vb.H[1][i] == pytest.approx(0.1875, abs=1e-8)
    assert vb.H[2][i] == pytest.approx(0.0078125, abs=1e-8)
    assert vb.partial_sums[2][i] == pytest.approx(1.6953125, abs=1e-8)


def test_volterra_reports_and_monotonicity(vk1):
    _, _, _, vb, reps = vk1
    assert vb.converged and all(r.passed for r in reps)
    assert np.all(np.diff(vb.partial_sums, axis=0) >= 0)
    start = int(math.ceil(np.max(vb.T)))
    assert np.all(np.diff(vb.tail[start:], axis=0) < 0)


def test_volterra_k1_shortcut(vk1):
    # for k = 1 the kernel does not depend on s, so H_{i+1}(r) = L(r) int_0^r H_i
    eq, init, grid, vb, _ = vk1
    r = np.asarray(grid)
    L = np.array([kernel_L(eq, 0.0, x, 0.0) for x in r]).ravel()
    # H_1 = L(r) * 1.5 r and H_2 = L(r) * int_0^r (3/4) s^2 ds exactly
    assert np.max(np.abs(vb.H[1] - L * 1.5 * r)) < 1e-9
    assert np.max(np.abs(vb.H[2] - L * 0.25 * r**3)) < 1e-9


def test_zero_equation_gives_taylor_polynomial():
    eq = EquationSpec(2, (2, 2, 2), (PowerSeries.constant(0.0), PowerSeries.constant(0.0)), "zero")
    grid = [0.1, 0.3, 0.5, 0.7]
    vb, reps = volterra_series_bound(eq, 0.0, (1.0, 2.0), grid)
    assert np.all(vb.partial_sums[-1] == 0)
    assert np.allclose(vb.f_bound, 1 + 2 * np.asarray(grid), atol=1e-12)


def test_kernel_H_at_origin(vk1):
    eq, init, *_ = vk1
    assert kernel_H(eq, 0.0, init, np.array([0.0]))[0] == pytest.approx(1.5)


def test_c0_constant():
    assert C0 == pytest.approx(0.4621171573, abs=1e-10)


def test_hinf_exponential_factor_closed_form(rot):
    eq, _ = rot
    sol = solve_ray(eq, 0.0, 0.0, 0.5, get_entry("rot_nonlinear").init, report_n=11)
    rep = hinf_growth_bound(eq, sol, 0.5, coefficient_norms=[0.5])
    assert math.exp(rep.metadata["exponent"][-1]) == pytest.approx(math.exp(math.pi / 3), abs=1e-6)
    assert math.exp(math.pi / 3) == pytest.approx(2.8497, abs=1e-4)
    # s = 0: exponent is n_c n_0 (r - nu)
    rep0 = hinf_growth_bound(eq, sol, 0.0, coefficient_norms=[0.5])
    assert rep0.metadata["exponent"][-1] == pytest.approx(2 * 0.5, abs=1e-12)


def test_majorant_spot_values():
    mp = MajorantProblem(1, 2.0, (constant_majorant(1.0),), (1.0,))
    traj = herold_majorant(mp, 0.9, report_n=10)
    assert traj.u[-1, 0] == pytest.approx(math.exp(0.9), abs=1e-8)
    mp2 = MajorantProblem(2, 2.0, (constant_majorant(1.0), constant_majorant(0.0)), (1.0, 0.0))
    traj2 = herold_majorant(mp2, 0.5, report_n=6)
    assert traj2.u[-1, 0] == pytest.approx(1.1276260, abs=1e-7)
    flat = herold_majorant(MajorantProblem(1, 2.0, (constant_majorant(0.0),), (3.0,)), 0.9)
    assert np.allclose(flat.u[:, 0], 3.0)


def test_negative_majorant_coefficient_rejected():
    from diskode import DomainError

    mp = MajorantProblem(1, 2.0, (constant_majorant(-1.0),), (1.0,))
    with pytest.raises(DomainError):
        herold_majorant(mp, 0.9)


@pytest.mark.parametrize("c", [0.25, 0.5])
def test_degenerate_young_split(c):
    eq = EquationSpec(1, (2, 2), (PowerSeries.constant(c),))
    H, L = volterra_kernels(eq, 0.0, (1.0,), 0.4, 0.1)
    assert H == pytest.approx(2 * c)
    assert L == pytest.approx(0.4)


def test_bloch_rhs_continuous_as_M_shrinks():
    e = get_entry("rot_nonlinear")
    eq = e.equation()
    sol = solve_ray(eq, 0.0, 0.0, 0.9, e.init, report_n=10)
    ratios = []
    for M in (1e-2, 1e-4, 1e-6):
        pre, _ = bloch_growth_bound(eq, sol, M=M)
        sup = np.asarray(pre.metadata["sup_factor"])
        ratios.append(np.max(np.abs(pre.rhs / (pre.metadata["C"] * sup) - 1)))
    assert ratios[-1] < ratios[0] and ratios[-1] < 1e-4
