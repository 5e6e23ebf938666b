import math

import numpy as np
import pytest

from superadiabatic.darboux import (
    AlgebraicSingularity,
    asymptotic_agreement_report,
    check_radius,
    geometric_jet,
    geometric_singularity,
    inverse_sqrt_jet,
    inverse_sqrt_singularity,
    pole_pair_singularities,
    predict_coefficient,
    true_coefficients,
)
from superadiabatic.errors import AssumptionError, UsageError
from superadiabatic.jets import EXTENDED, Jet, jet_exp, jet_pow


def test_geometric_prediction_exact():
    # worked sign check: 1/(1-z) = (z-1)^(-1) * (-1) predicts exactly 1
    for n in (1, 5, 40):
        assert predict_coefficient(geometric_singularity(), n) == pytest.approx(1.0)
    rep = asymptotic_agreement_report(geometric_jet, geometric_singularity(),
                                      range(20, 201, 20))
    assert max(r.relative_error for r in rep.rows) < 1e-12


def test_inverse_sqrt_rate():
    rep = asymptotic_agreement_report(inverse_sqrt_jet, inverse_sqrt_singularity(),
                                      range(20, 201, 5))
    # n * e_n ~ 1/8; log-log slope -1
    assert 0.05 <= rep.min_scaled_error and rep.max_scaled_error <= 20.0
    assert abs(rep.loglog_slope + 1.0) <= 0.3


def test_true_coefficients_exponential():
    fn = lambda t, order, prec: jet_exp(Jet.variable(0.0, order, prec))
    c = true_coefficients(fn, 12)
    want = [1 / math.factorial(k) for k in range(13)]
    assert np.allclose(c.real, want, rtol=1e-12)


def test_true_coefficients_pole_pair_closed_form():
    from superadiabatic.theta import PolePairModel

    m = PolePairModel(gamma=1.0, t_r=0.0, t_c=1.0)
    fn = lambda t, order, prec: m.theta_prime_jet(0.0, order, prec)
    c = true_coefficients(fn, 9)
    ks = np.arange(10)
    want = 2.0 * np.where(ks % 4 == 0, 1.0, np.where(ks % 4 == 2, -1.0, 0.0))
    assert np.allclose(c.real, want, atol=1e-13)


def test_conjugate_pair_prediction_real():
    sings = pole_pair_singularities(0.8, 0.1, 1.2)
    for n in (3, 10, 31):
        assert abs(predict_coefficient(sings, n).imag) < 1e-15


def test_pole_pair_prediction_matches_jets():
    from superadiabatic.theta import PolePairModel

    m = PolePairModel(gamma=0.6, t_r=0.0, t_c=1.0)
    fn = lambda t, order, prec: m.theta_prime_jet(0.0, order, prec)
    rep = asymptotic_agreement_report(fn, pole_pair_singularities(0.6, 0.0, 1.0),
                                      range(6, 60, 6))
    assert max(r.relative_error for r in rep.rows) < 1e-12


def test_landau_zener_theta_prime_residual_rate():
    """Prediction with only the pole term leaves the alpha = 1/3 corrections:
    the relative error must decay like n^(alpha-1) = n^(-2/3)."""
    from superadiabatic.reparam import ReparametrizedModel, landau_zener

    model = ReparametrizedModel(landau_zener(1.0))
    sd = model.primary
    sings = pole_pair_singularities(sd.gamma, sd.t_r, sd.t_c)

    def fn(t, order, prec):
        return model.theta_prime_jet(0.0, order, prec)

    ns = np.array(range(8, 49, 4))
    rep = asymptotic_agreement_report(fn, sings, ns, precision="double")
    errs = np.array([r.relative_error for r in rep.rows])
    slope = np.polyfit(np.log(ns), np.log(errs), 1)[0]
    assert abs(slope + 2.0 / 3.0) < 0.25
    # the pole term itself is the right leading order: errors decay
    assert np.all(np.diff(errs) < 0) and errs[-1] < 0.5 * errs[0] and errs[-1] < 0.2


def test_multiple_singularities_at_one_location():
    # f(z) = (1-z)^(-1/2) + 1/(1-z): both contributions at z = 1 add
    def fn(t, order, prec):
        return inverse_sqrt_jet(t, order, prec) + geometric_jet(t, order, prec)

    sings = inverse_sqrt_singularity() + geometric_singularity()
    rep = asymptotic_agreement_report(fn, sings, range(20, 120, 10))
    assert max(r.relative_error for r in rep.rows) < 0.01
    assert rep.max_scaled_error <= 20.0


def test_gamma_pole_orders_rejected():
    with pytest.raises(AssumptionError):
        AlgebraicSingularity(location=1.0 + 0j, order_alpha=0.0, strength=1.0)
    with pytest.raises(AssumptionError):
        AlgebraicSingularity(location=1.0 + 0j, order_alpha=-2.0, strength=1.0)


def test_check_radius():
    sings = [AlgebraicSingularity(location=2.0 + 0j, order_alpha=0.5, strength=1.0)]
    check_radius(sings, 2.0)
    with pytest.raises(AssumptionError):
        check_radius(sings, 1.0)


def test_n_zero_rejected():
    with pytest.raises(UsageError):
        predict_coefficient(geometric_singularity(), 0)


def test_negative_alpha_singularity():
    # f = (1-z)^(1/2): alpha = -1/2, coefficients ~ n^(-3/2)
    def fn(t, order, prec):
        c = np.empty(order + 1, dtype=np.complex128)
        c[0] = 1.0
        for k in range(1, order + 1):
            c[k] = c[k - 1] * (k - 1.5) / k
        jet = Jet(0.0, c)
        return jet.to_extended() if prec != "double" else jet

    # (1-z)^(1/2) = (z-1)^(1/2) * g, g(0) = conj branch: g = -i
    sings = [AlgebraicSingularity(location=1.0 + 0j, order_alpha=-0.5, strength=-1j)]
    rep = asymptotic_agreement_report(fn, sings, range(20, 200, 20))
    assert rep.max_scaled_error <= 20.0
    assert abs(rep.loglog_slope + 1.0) <= 0.3
