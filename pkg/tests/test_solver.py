import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diskode import (
    DomainError,
    EquationSpec,
    PowerSeries,
    extract_top_derivative,
    solve_fan,
    solve_ray,
)
from diskode.harness import get_entry

ANGLES8 = 2 * np.pi * np.arange(8) / 8


def _eq(name):
    e = get_entry(name)
    return e.equation(), e.init, e.closed_form


@pytest.mark.parametrize("name", ["cos_linear", "exp_nonlinear", "rot_nonlinear", "volterra_k1", "herold_pair"])
def test_fan_matches_closed_form(name):
    eq, init, exact = _eq(name)
    for sol in solve_fan(eq, ANGLES8, 0.0, 0.9, init, 1e-10):
        assert sol.ok
        ref = exact(sol.z)
        for j in range(eq.k + 1):
            assert np.max(np.abs(sol.values[:, j] - ref[j])) < 1e-8


def test_single_ray_fan_equals_solve_ray():
    eq, init, _ = _eq("exp_nonlinear")
    a = solve_fan(eq, [0.3], 0.0, 0.9, init)[0]
    b = solve_ray(eq, 0.3, 0.0, 0.9, init)
    assert np.array_equal(a.values, b.values) and np.array_equal(a.r, b.r)


def test_threaded_fan_identical_to_sequential():
    eq, init, _ = _eq("rot_nonlinear")
    a = solve_fan(eq, ANGLES8, 0.0, 0.9, init, threads=1)
    b = solve_fan(eq, ANGLES8, 0.0, 0.9, init, threads=4)
    for x, y in zip(a, b):
        assert np.array_equal(x.values, y.values)


def test_empty_fan():
    eq, init, _ = _eq("exp_nonlinear")
    assert solve_fan(eq, [], 0.0, 0.9, init) == []


def test_failing_ray_does_not_stop_siblings():
    eq, _, _ = _eq("exp_nonlinear")
    sols = solve_fan(eq, [0.0, 1.0], 0.0, 0.9, lambda th: (1.0,) if th == 0 else (1.0, 2.0))
    assert sols[0].ok
    assert sols[1].truncated and "DomainError" in sols[1].error


def test_report_grid_and_exact_samples():
    eq, init, exact = _eq("cos_linear")
    sol = solve_ray(eq, 0.0, 0.0, 0.9, init, report_n=10, extra_radii=[0.55])
    r, _ = sol.report()
    assert np.allclose(r, np.linspace(0, 0.9, 10))
    assert 0.55 in sol.r
    assert sol.at(0.55) == pytest.approx(math.cos(0.55), abs=1e-10)


def test_dense_output_between_steps():
    eq, init, exact = _eq("exp_nonlinear")
    sol = solve_ray(eq, 1.0, 0.0, 0.9, init)
    rr = np.linspace(0.013, 0.887, 57)
    z = rr * np.exp(1j)
    assert np.max(np.abs(sol.dense(rr, 0) - np.exp(z))) < 1e-7
    assert np.max(np.abs(sol.dense(rr, 1) - np.exp(z))) < 1e-7
    with pytest.raises(DomainError):
        sol.dense([0.95])


def test_nonzero_start_radius():
    eq, _, exact = _eq("exp_nonlinear")
    z0 = 0.3 * np.exp(0.5j)
    sol = solve_ray(eq, 0.5, 0.3, 0.9, (np.exp(z0),))
    assert np.max(np.abs(sol.values[:, 0] - np.exp(sol.z))) < 1e-8


def test_extract_top_derivative():
    eq, _, _ = _eq("exp_nonlinear")
    assert extract_top_derivative(eq, 0.0, [1.0]).value == pytest.approx(1.0)
    lin, _, _ = _eq("cos_linear")
    assert extract_top_derivative(lin, 0.0, [2.0, 0.0]).value == pytest.approx(-2.0)
    # the sheet nearest the previous value is chosen
    assert extract_top_derivative(eq, 0.0, [1.0], prev_top=-0.9).value == pytest.approx(-1.0)


def test_fractional_exponents_stay_on_tracked_branch():
    eq = EquationSpec(1, (1.5, 2.5), (PowerSeries.constant(1.0),), "frac")
    sol = solve_ray(eq, 0.7, 0.0, 0.9, (1.0 + 0.5j,), 1e-10)
    assert sol.ok
    assert np.max(sol.residuals()) < 1e-8
    assert np.all(np.abs(np.diff(sol.branch_phase)) < math.pi)


def test_blow_up_truncates():
    # f' = f^2 with f(0) = 2 blows up at r = 1/2 on the positive axis
    eq = EquationSpec(1, (2, 1), (PowerSeries.constant(-1.0),), "riccati")
    sol = solve_ray(eq, 0.0, 0.0, 0.9, (2.0,))
    assert sol.truncated and not sol.ok
    assert 0.45 < sol.last_good_r < 0.5
    assert sol.error


def test_invalid_arguments():
    eq, init, _ = _eq("exp_nonlinear")
    with pytest.raises(DomainError):
        solve_ray(eq, 0.0, 0.0, 1.0, init)
    with pytest.raises(DomainError):
        solve_ray(eq, 0.0, 0.0, 0.9, (1.0, 2.0))
    with pytest.raises(DomainError):
        EquationSpec(1, (2,), (PowerSeries.constant(1),))
    with pytest.raises(DomainError):
        EquationSpec(1, (2, -1), (PowerSeries.constant(1),))


@pytest.mark.parametrize("name", ["cos_linear", "exp_nonlinear", "rot_nonlinear", "volterra_k1", "bloch_coeff", "small_norm_qk"])
def test_residual_invariant_on_every_step(name):
    eq, init, _ = _eq(name)
    tol = 1e-10
    for sol in solve_fan(eq, ANGLES8[::2], 0.0, 0.99, init, tol):
        assert sol.r.size == sol.n_accepted + 1
        assert np.max(sol.residuals()) <= 100 * tol


@pytest.mark.parametrize("name", ["exp_nonlinear", "rot_nonlinear", "volterra_k1", "cos_linear"])
def test_step_halving(name):
    eq, init, _ = _eq(name)
    for tol in (1e-6, 1e-8):
        a = solve_ray(eq, 0.4, 0.0, 0.95, init, tol)
        b = solve_ray(eq, 0.4, 0.0, 0.95, init, tol / 2)
        ra, va = a.report()
        rb, vb = b.report()
        assert np.array_equal(ra, rb)
        scale = np.maximum(1.0, np.abs(va[:, 0]))
        assert np.all(np.abs(va[:, 0] - vb[:, 0]) <= tol * scale)


@given(
    st.complex_numbers(max_magnitude=3),
    st.complex_numbers(max_magnitude=3),
    st.floats(0, 2 * math.pi),
)
def test_linear_superposition(alpha, beta, theta):
    eq = EquationSpec(2, (1, 1, 1), (PowerSeries([1.0, 0.5]), PowerSeries([0.0, 0.3j])), "lin")
    u0, v0 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    tol = 1e-10
    su = solve_ray(eq, theta, 0.0, 0.9, u0, tol)
    sv = solve_ray(eq, theta, 0.0, 0.9, v0, tol)
    sw = solve_ray(eq, theta, 0.0, 0.9, alpha * u0 + beta * v0, tol)
    r, w = sw.report()
    combo = alpha * su.report()[1] + beta * sv.report()[1]
    scale = max(1.0, abs(alpha) + abs(beta))
    assert np.max(np.abs(w - combo)) <= 10 * tol * scale


def test_json_roundtrip_fields():
    eq, init, _ = _eq("exp_nonlinear")
    d = solve_ray(eq, 0.0, 0.0, 0.5, init, report_n=5).to_json()
    assert d["truncated"] is False and len(d["r"]) == len(d["values_re"])
