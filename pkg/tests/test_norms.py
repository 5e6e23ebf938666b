import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superadiabatic.errors import UsageError
from superadiabatic.norms import (
    beta_function,
    check_integration_inequality,
    check_product_inequality,
    elliptic_theta3_jet,
    estimate_norm,
    model_norm,
)
from superadiabatic.theta import PolePairModel, RationalTerm


@pytest.fixture(scope="module")
def unit_pole():
    return PolePairModel(gamma=1.0, t_r=0.0, t_c=1.0)


# -- beta ----------------------------------------------------------------------


def test_beta_values():
    assert beta_function(1.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert beta_function(2.0, 3.0) == pytest.approx(1.0 / 12.0, rel=1e-13)
    with pytest.raises(UsageError):
        beta_function(-1.0, 2.0)


@pytest.mark.parametrize("n", [10, 50])
def test_beta_sum_identity(n):
    total = sum(beta_function(k, n - k) for k in range(1, n))
    assert total <= 4.0 / (n - 1)


def test_beta_against_quadrature_oracle():
    # B(a,b) = int_0^1 u^(b-1) (1-u)^(a-1) du, by high-order quadrature
    from scipy.integrate import quad

    for a, b in [(0.5, 1.7), (3.2, 0.9), (6.0, 6.0)]:
        val, _ = quad(lambda u: u ** (b - 1) * (1 - u) ** (a - 1), 0, 1,
                      epsabs=1e-14, epsrel=1e-13)
        assert beta_function(a, b) == pytest.approx(val, rel=1e-11)


# -- the estimator ---------------------------------------------------------------


def test_pole_pair_norm_attained_and_stable(unit_pole):
    vals = [estimate_norm(unit_pole.theta_prime_jet, (0.0, 0.0), 1.0, 1.0, K, 1).value
            for K in (0, 10, 40, 120)]
    assert vals[0] == pytest.approx(2.0, rel=1e-13)
    assert all(v == pytest.approx(2.0, rel=1e-12) for v in vals)
    # monotone non-decreasing in the order cap
    assert all(b >= a * (1 - 1e-14) for a, b in zip(vals, vals[1:]))


def test_constant_function_norm():
    m = PolePairModel(gamma=0.0, t_c=1.0)
    fn = lambda t, order, prec: m.theta_prime_jet(t, order, prec) + 3.0
    est = estimate_norm(fn, (0.0, 0.0), 1.0, 0.7, 20, 1)
    assert est.value == pytest.approx(3.0 * 0.7, rel=1e-14)
    assert est.argmax_k == 0


def test_theta3_divergence_vs_stabilization():
    caps = (20, 60, 120, 240)
    low = [estimate_norm(elliptic_theta3_jet, (0, 0), 0.5, 1.0, K, 1).value
           for K in caps]
    assert low[-1] > 2.0 * low[0]  # grows without bound for alpha < 1
    high = [estimate_norm(elliptic_theta3_jet, (0, 0), 1.0, 1.0, K, 1).value
            for K in caps]
    assert max(high) - min(high) < 1e-12  # stabilizes for alpha >= 1


def test_pointwise_bound_tautology(unit_pole):
    # |f^(k)(t)| <= Gamma(alpha+k)/t_c^(alpha+k) * estimate, by construction
    est = estimate_norm(unit_pole.theta_prime_jet, (-0.3, 0.3), 1.0, 1.0, 30, 9)
    jet = unit_pole.theta_prime_jet(0.1, 30)
    for k in range(31):
        lhs = abs(jet.coefficient(k)) * math.exp(math.lgamma(k + 1))
        log_rhs = math.lgamma(1 + k) - (1 + k) * math.log(1.0) + math.log(est.value)
        assert math.log(max(lhs, 1e-300)) <= log_rhs + 1e-9


# -- inequality checks ------------------------------------------------------------


_coef = st.floats(-1.5, 1.5, allow_subnormal=False).map(
    lambda x: 0.0 if abs(x) < 1e-6 else x  # avoid pure-underflow artifacts
)
rationals = st.lists(_coef, min_size=1, max_size=4)


def _rational_model(num):
    # analytic on the unit strip: num(t) / (1 + t^2/4)
    return RationalTerm(num=tuple(num), den=(1.0, 0.0, 0.25))


@settings(max_examples=100, deadline=None)
@given(rationals, rationals)
def test_product_inequality_random_rationals(nf, ng):
    f = _rational_model(nf)
    g = _rational_model(ng)
    rep = check_product_inequality(f.jet, g.jet, 0.8, 1.1, 0.9, (-0.4, 0.4),
                                   order_cap=24, grid_density=5)
    assert rep.holds


@settings(max_examples=100, deadline=None)
@given(rationals)
def test_integration_inequality_random_rationals(nf):
    f = _rational_model(nf)
    rep = check_integration_inequality(f.jet, 0.0, 1.6, 0.9, (-0.4, 0.4),
                                       order_cap=24, grid_density=5)
    assert rep.holds


def test_product_inequality_pole_pair(unit_pole):
    f = unit_pole.theta_prime_jet
    rep = check_product_inequality(f, f, 1.0, 1.0, 1.0, (-0.5, 0.5), 40, 9)
    assert rep.holds
    assert rep.slack >= 1.0 - 1e-12


def test_product_inequality_zero_factor(unit_pole):
    zero = PolePairModel(gamma=0.0, t_c=1.0).theta_prime_jet
    rep = check_product_inequality(unit_pole.theta_prime_jet, zero, 1.0, 1.0,
                                   1.0, (-0.5, 0.5), 20, 5)
    assert rep.lhs == 0.0
    assert rep.holds


def test_increase_alpha_reduction(unit_pole):
    # with g = 1: ||f||_{a+b} <= t_c^b Gamma(a)/Gamma(a+b) ||f||_a
    a, b, t_c = 1.0, 0.7, 1.0
    interval = (-0.5, 0.5)
    f = unit_pole.theta_prime_jet
    lhs = estimate_norm(f, interval, a + b, t_c, 40, 9).value
    rhs = (t_c**b * math.exp(math.lgamma(a) - math.lgamma(a + b))
           * estimate_norm(f, interval, a, t_c, 40, 9).value)
    assert lhs <= rhs * (1 + 1e-12)


def test_integration_inequality_simplified_case():
    # alpha > 2 and |t - s| <= t_c: factor is alpha - 1
    m = PolePairModel(gamma=0.7, t_c=1.0)
    fpp = lambda t, order, prec: m.theta_prime_jet(t, order + 2, prec).derivative().derivative()
    rep = check_integration_inequality(fpp, 0.0, 3.0, 1.0, (-0.9, 0.9), 30, 9)
    assert rep.holds
    assert rep.details["factor"] == pytest.approx(2.0 * 0.9 / 1.0)


def test_integration_inequality_theta_second_derivative(unit_pole):
    fpp = lambda t, order, prec: unit_pole.theta_prime_jet(t, order + 1, prec).derivative()
    rep = check_integration_inequality(fpp, 0.0, 2.0, 1.0, (-0.5, 0.5), 40, 9)
    assert rep.holds
    assert rep.slack >= 1.0


def test_integration_inequality_zero_function():
    zero = PolePairModel(gamma=0.0, t_c=1.0).theta_prime_jet
    rep = check_integration_inequality(zero, 0.0, 1.5, 1.0, (-0.5, 0.5), 10, 3)
    assert rep.lhs == 0.0 and rep.holds


def test_derivative_shift_invariant(unit_pole):
    f = unit_pole.theta_prime_jet
    fp = lambda t, order, prec: f(t, order + 1, prec).derivative()
    n_shift = estimate_norm(fp, (-0.5, 0.5), 2.0, 1.0, 40, 9).value
    n_base = estimate_norm(f, (-0.5, 0.5), 1.0, 1.0, 41, 9).value
    assert n_shift <= n_base * (1 + 1e-12)


def test_report_serializes(unit_pole):
    import json

    f = unit_pole.theta_prime_jet
    rep = check_product_inequality(f, f, 1.0, 1.0, 1.0, (-0.1, 0.1), 10, 3)
    doc = json.loads(rep.to_json())
    assert {"lhs", "rhs", "holds", "slack", "details"} <= set(doc)


def test_assumption1_norms_finite():
    from superadiabatic.theta import AlgebraicTerm

    term = AlgebraicTerm(z0=1j, alpha=1 / 3, prefactor=0.15)
    m = PolePairModel(gamma=1.0, t_c=1.0, remainder=(term,), alpha=1 / 3)
    whole = model_norm(m, (-0.4, 0.4), 1.0, 1.0, order_cap=50)
    assert math.isfinite(whole.value)
    rem = estimate_norm(lambda t, k, p: term.jet(t, k, p), (-0.4, 0.4),
                        1 / 3, 1.0, 50, 9)
    assert math.isfinite(rem.value)
