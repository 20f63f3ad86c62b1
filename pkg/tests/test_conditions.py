import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diskode import DomainError, EquationSpec, HypothesisError, KernelWeight, PowerSeries
from diskode.conditions import (
    ConditionCheckConfig,
    check_hypotheses,
    classify_slope,
    membership_scan,
    trend_slope,
    weight_exponent,
    weight_values,
)
from diskode.spaces import default_a_grid
from diskode.harness import get_entry

K_HALF = KernelWeight.power(0.5)


def _small(a=1e-3):
    return EquationSpec(2, (2, 2, 2), (PowerSeries.constant(a), PowerSeries.constant(a)), "small")


def test_weight_exponents():
    eq = _small()
    beta = ConditionCheckConfig(1.0, K_HALF)
    alpha = ConditionCheckConfig(1.0, K_HALF, mode="thm_alpha", c=1.25)
    assert weight_exponent(eq, 1, beta) == 2.0
    assert weight_exponent(eq, 0, beta) == 2.0
    assert weight_exponent(eq, 0, alpha) == pytest.approx(1.5)


@given(st.lists(st.complex_numbers(max_magnitude=0.99), min_size=1, max_size=20))
def test_weight_for_top_coefficient_is_one_minus_r2_to_nk(zs):
    eq = _small()
    cfg = ConditionCheckConfig(1.0, K_HALF)
    z = np.array([v if abs(v) < 1 else v * 0.99 / abs(v) for v in zs])
    direct = (1 - np.abs(z) ** 2) ** eq.exponents[-1]
    assert np.max(np.abs(weight_values(eq, eq.k - 1, cfg, z) - direct)) < 1e-12


def test_small_coefficients_pass_thm_beta():
    v = check_hypotheses(_small(), ConditionCheckConfig(0.01, KernelWeight.power(2.0)))
    assert v.passed
    assert v.kernel.value == pytest.approx(0.5)


def test_alpha_mode_flags_growing_sup():
    eq = EquationSpec(1, (2, 2), (PowerSeries.constant(1.0),))
    cfg = ConditionCheckConfig(10.0, K_HALF, mode="thm_alpha", c=1.25)
    v = check_hypotheses(eq, cfg)
    assert not v.passed
    assert "growing" in v.coefficients[0].note


def test_constant_kernel_fails_thm_beta():
    assert not check_hypotheses(_small(), ConditionCheckConfig(1.0, KernelWeight.constant())).passed


def test_pattern_requirement():
    lin = get_entry("cos_linear").equation()
    with pytest.raises(HypothesisError):
        check_hypotheses(lin, ConditionCheckConfig(1.0, K_HALF))


def test_config_validation():
    with pytest.raises(DomainError):
        ConditionCheckConfig(0.0, K_HALF)
    with pytest.raises(DomainError):
        ConditionCheckConfig(1.0, K_HALF, mode="thm_alpha", c=1.6)
    with pytest.raises(DomainError):
        ConditionCheckConfig(1.0, K_HALF, r_max_sequence=(0.9, 0.5))


@given(st.floats(1e-4, 10.0), st.floats(1.0, 100.0))
def test_threshold_monotonicity(tau, factor):
    eq = _small(0.05)
    lo = check_hypotheses(eq, ConditionCheckConfig(tau, K_HALF, r_max_sequence=(0.9, 0.99), radial_n=16, angular_n=16))
    hi = check_hypotheses(eq, ConditionCheckConfig(tau * factor, K_HALF, r_max_sequence=(0.9, 0.99), radial_n=16, angular_n=16))
    if lo.passed:
        assert hi.passed


def test_slope_classification():
    assert classify_slope(0.01) == "bounded-looking"
    assert classify_slope(0.3) == "inconclusive"
    assert classify_slope(1.0) == "growing"
    r = np.array([0.9, 0.99, 0.999])
    assert trend_slope(r, 1 / (1 - r)) == pytest.approx(1.0)
    assert trend_slope(r, np.zeros(3)) == 0.0


def test_scan_of_rotation_matches_bessel_oracle():
    # |f'|^2 = exp(-sqrt2 r sin(theta)) / 2; the disk integral is R I_1(sqrt2 R) / sqrt2
    from scipy.special import iv

    e = get_entry("rot_nonlinear")
    seq = (0.5, 0.9, 0.99)
    scan = membership_scan(e.equation(), KernelWeight.constant(), [0j], seq, e.init, n_rays=64, radial_n=32)
    R = np.asarray(seq)
    assert np.allclose(scan.values, R * iv(1, math.sqrt(2) * R) / math.sqrt(2), atol=1e-10)


def test_scan_of_zero_solution():
    eq = _small()
    scan = membership_scan(eq, K_HALF, default_a_grid((0.5,), 4), (0.9, 0.99), (0.0, 0.0), n_rays=8, radial_n=8)
    assert np.all(scan.values == 0) and scan.classification == "bounded-looking"


def test_scan_values_nondecreasing():
    e = get_entry("exp_nonlinear")
    scan = membership_scan(e.equation(), K_HALF, default_a_grid((0.5, 0.9), 8), (0.5, 0.7, 0.9, 0.99), e.init,
                           n_rays=32, radial_n=16)
    assert np.all(np.diff(scan.values) >= 0)
    assert scan.to_json()["note"] == "empirical"


def test_scan_rejects_bad_sequence():
    e = get_entry("exp_nonlinear")
    with pytest.raises(DomainError):
        membership_scan(e.equation(), K_HALF, [0j], (0.9, 0.5), e.init)
