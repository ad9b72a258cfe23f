import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from ccscen.divergence import (
    CHI2,
    ToleranceRule,
    appendix_b_delta,
    chi2_epsilon_prime,
    epsilon_prime_inverse,
    select_delta,
)
from ccscen.errors import DomainError, UnattainableError, ZeroToleranceError


def _eps_prime_oracle(eps, lam):
    # largest x with x + sqrt(lam x (1 - x)) ... solved by bisection on the defining inequality
    lo, hi = 0.0, eps
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid + math.sqrt(lam * mid * (1 - mid)) <= eps:
            lo = mid
        else:
            hi = mid
    return lo


@pytest.mark.parametrize("eps,lam", [(0.05, 1.8307), (0.1, 0.5), (0.05, 10.0), (0.4, 1e-4), (0.05, 37.9161)])
def test_epsilon_prime_matches_defining_equation(eps, lam):
    val = chi2_epsilon_prime(eps, lam)
    assert val > 0
    assert_allclose(val, _eps_prime_oracle(eps, lam), rtol=1e-9)


def test_epsilon_prime_zero_radius_is_identity():
    assert_allclose(chi2_epsilon_prime(0.07, 0.0), 0.07, rtol=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-4, 0.49), st.floats(1e-6, 100.0))
def test_epsilon_prime_inverse_roundtrip(eps, lam):
    x = chi2_epsilon_prime(eps, lam)
    assert_allclose(epsilon_prime_inverse(x, lam), eps, rtol=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-4, 0.49), st.floats(1e-6, 100.0))
def test_epsilon_prime_monotone(eps, lam):
    assert chi2_epsilon_prime(eps, lam * 1.1) <= chi2_epsilon_prime(eps, lam)
    assert chi2_epsilon_prime(min(eps * 1.01, 0.4999), lam) >= chi2_epsilon_prime(eps, lam)


def test_epsilon_prime_inverse_unattainable():
    with pytest.raises(UnattainableError):
        epsilon_prime_inverse(0.49, 5.0)


def test_epsilon_prime_domain():
    with pytest.raises(DomainError):
        chi2_epsilon_prime(0.5, 1.0)
    with pytest.raises(DomainError):
        chi2_epsilon_prime(0.1, -1.0)


@pytest.mark.parametrize("eps,D", [(0.05, 5.2383), (0.1, 1.0), (0.5, 0.01)])
def test_appendix_b_delta_solves_its_quadratic(eps, D):
    d = appendix_b_delta(eps, D)
    # delta is the root of (eps - delta)^2 = D delta
    assert_allclose((eps - d) ** 2, D * d, rtol=1e-10)
    assert 0 < d < eps


def test_select_delta_rules():
    lam = 5.2383
    assert select_delta(0.05, lam, "closed-form") == chi2_epsilon_prime(0.05, lam)
    assert select_delta(0.05, lam, ToleranceRule.APPENDIX_B_BOUND) == appendix_b_delta(0.05, lam)
    assert_allclose(select_delta(0.05, lam, "closed-form"), 4.6857e-4, rtol=1e-4)


def test_select_delta_infinite_bound():
    with pytest.raises(ZeroToleranceError):
        select_delta(0.05, math.inf, "closed-form")
    with pytest.raises(ZeroToleranceError):
        select_delta(0.05, math.inf, "appendix-b")


def test_rule_parse_rejects_unknown():
    with pytest.raises(DomainError):
        ToleranceRule.parse("nope")


def test_chi2_kind():
    assert CHI2.second_derivative_at_one == 2.0


def test_closed_form_reference_values():
    lam = 18.307038 / 80
    assert abs(chi2_epsilon_prime(0.05, lam) - 0.007832) < 1e-5
    # clamp never activates: the value stays positive for large radii
    assert 0 < chi2_epsilon_prime(0.05, 10.0) < 3e-4
    assert select_delta(0.05, 0.0, "closed-form") == 0.05
    assert select_delta(0.05, 0.0, "appendix-b") == 0.05


def test_inverse_residual():
    v = epsilon_prime_inverse(0.01, 0.1)
    assert abs(chi2_epsilon_prime(v, 0.1) - 0.01) < 1e-10
    assert chi2_epsilon_prime(v, 0.1) >= 0.01 - 1e-15


def test_appendix_b_grid_guarantee():
    for eps in (0.01, 0.05, 0.2, 0.6):
        for D in (0.0, 1e-3, 0.25714, 5.2383, 40.0):
            d = appendix_b_delta(eps, D)
            assert d <= eps
            assert d + math.sqrt(d * D) <= eps + 1e-12
