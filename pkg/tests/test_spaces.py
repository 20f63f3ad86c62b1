import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diskode import (
    DomainError,
    KernelWeight,
    PowerSeries,
    bers_norm,
    bloch_type_norm,
    default_a_grid,
    disk_quadrature,
    qk_seminorm,
    weighted_hardy_norm,
)

GRID = disk_quadrature(0.99, 32, 32)
Z = PowerSeries.monomial(1, degree=4)


def test_bers_norm_of_z():
    grid = disk_quadrature(1 - 1e-4, 64, 64)
    assert bers_norm(Z, 1.0, grid).value == pytest.approx(2 / (3 * math.sqrt(3)), abs=1e-6)


def test_bloch_norm_of_log_moderate_degree():
    # truncation keeps the sup below 2 by an amount that shrinks with degree
    grid = disk_quadrature(1 - 1e-3, 64, 64)
    v = bloch_type_norm(PowerSeries.log_one_minus(4096), 1.0, grid).value
    assert 1.99 < v <= 2.0 + 1e-12


def test_qk_constant_kernel():
    grid = disk_quadrature(1 - 1e-7, 64, 64)
    for form in ("green", "one_minus_phi_sq"):
        v = qk_seminorm(Z, KernelWeight.constant(1.0), [0j], grid, form)
        assert v.value == pytest.approx(1.0, abs=1e-6)


def test_qk_green_linear_kernel():
    grid = disk_quadrature(1 - 1e-4, 64, 64)
    v = qk_seminorm(Z, KernelWeight.power(1.0), [0j], grid, "green")
    assert v.value == pytest.approx(0.5, abs=1e-4)


def test_qk_one_minus_phi_sq_linear_kernel():
    # int (1 - |z|^2) dsigma = 1/2 over the unit disk
    grid = disk_quadrature(1 - 1e-7, 64, 64)
    v = qk_seminorm(Z, KernelWeight.power(1.0), [0j], grid)
    assert v.value == pytest.approx(0.5, abs=1e-6)


def test_hardy_norm_of_constant():
    f = PowerSeries.constant(3.0)
    v = weighted_hardy_norm(f, 0.0, 2.0, [0.1, 0.5, 0.9])
    assert v.value == pytest.approx(3.0, rel=1e-12)


def test_hardy_norm_of_z_is_sup_of_weighted_radius():
    r = np.linspace(0.01, 0.99, 99)
    v = weighted_hardy_norm(Z, 1.0, 2.0, r)
    assert v.value == pytest.approx(np.max((1 - r**2) * r), rel=1e-12)


def test_rejects_bad_exponents():
    with pytest.raises(DomainError):
        bloch_type_norm(Z, 0.0, GRID)
    with pytest.raises(DomainError):
        bers_norm(Z, -1.0, GRID)
    with pytest.raises(DomainError):
        qk_seminorm(Z, KernelWeight.power(1), [1.0 + 0j], GRID)


@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=100))
def test_norms_are_absolutely_homogeneous(lam):
    f = PowerSeries([0.3, 1.0, -0.5j, 0.25])
    g = lam * f
    for fn in (lambda h: bloch_type_norm(h, 1.0, GRID), lambda h: bers_norm(h, 0.5, GRID)):
        assert fn(g).value == pytest.approx(abs(lam) * fn(f).value, rel=1e-10)
    h1 = weighted_hardy_norm(f, 0.5, 2.0, [0.2, 0.6, 0.9]).value
    assert weighted_hardy_norm(g, 0.5, 2.0, [0.2, 0.6, 0.9]).value == pytest.approx(abs(lam) * h1, rel=1e-10)
    K = KernelWeight.power(0.5)
    a = default_a_grid((0.5,), 4)
    q1 = qk_seminorm(f, K, a, GRID).seminorm
    assert qk_seminorm(g, K, a, GRID).seminorm == pytest.approx(abs(lam) * q1, rel=1e-10)


def test_values_nondecreasing_in_r_max():
    f = PowerSeries.log_one_minus(256)
    K = KernelWeight.power(0.5)
    prev = None
    for r in (0.5, 0.8, 0.9, 0.99):
        g = disk_quadrature(r, 32, 32)
        cur = (bloch_type_norm(f, 1.0, g).value, bers_norm(f, 1.0, g).value)
        if prev is not None:
            assert all(c >= p - 1e-12 for c, p in zip(cur, prev))
        prev = cur


@given(st.floats(0.05, 0.95), st.floats(1.05, 3.0))
def test_weight_inequality_between_exponents(s1, s2):
    w = 1 - np.abs(GRID.nodes) ** 2
    assert np.all(w**s2 <= w**s1)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_bers_of_derivative_matches_bloch_derivative_term(s):
    f = PowerSeries([0.7, 1.0, 0.5, -0.25j, 0.1])
    bloch = bloch_type_norm(f, s, GRID).value - abs(f.coefficients[0])
    assert bers_norm(f.derivative(), s, GRID).value == pytest.approx(bloch, rel=1e-14)


def test_default_a_grid_shape():
    a = default_a_grid()
    assert a.size == 81 and a[0] == 0
