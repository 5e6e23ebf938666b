"""Finite-order estimators of the factorial-weighted norms

    ||f||_(I,alpha,t_c) = sup_{t in I} sup_{k>=0} |f^(k)(t)| t_c^(alpha+k) / Gamma(alpha+k)

and numeric verification of their calculus (derivative shift, product
inequality with the Beta-function constant, antiderivative inequality).

The double sup is truncated to a grid in t and orders k <= K_max, so every
estimate is a lower bound of the true norm.  Downstream bound checks use
the estimate on the right-hand side of inequalities, making them necessary
conditions; reports carry the attained (t*, k*) so stabilization in K_max
can be judged.  Magnitudes are handled in log space: k! against
Gamma(alpha+k) stays finite here for orders in the hundreds.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import quad

from .errors import UsageError
from .jets import DOUBLE, Jet

_NEG_INF = float("-inf")


def beta_function(a: float, b: float) -> float:
    """Euler Beta via log-gamma; relative error at the 1e-15 level."""
    if a <= 0 or b <= 0:
        raise UsageError("beta_function needs positive arguments")
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def log_beta(a: float, b: float) -> float:
    if a <= 0 or b <= 0:
        raise UsageError("log_beta needs positive arguments")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


@dataclass
class NormEstimate:
    alpha: float
    t_c: float
    interval: tuple
    order_cap: int
    grid_points: int
    value: float
    log_value: float
    argmax_t: float
    argmax_k: int
    per_order_log: list  # sup over the grid of the log weight, per k

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _grid(interval, density):
    a, b = interval
    if a == b:
        return np.array([a])
    return np.linspace(a, b, density)


def estimate_norm(jet_fn, interval, alpha: float, t_c: float,
                  order_cap: int = 60, grid_density: int = 33,
                  precision: str = DOUBLE) -> NormEstimate:
    """Truncated double sup of |f^(k)(t)| t_c^(alpha+k)/Gamma(alpha+k).

    jet_fn(t, order, precision) must return the Jet of f at t.
    """
    if alpha <= 0 or t_c <= 0:
        raise UsageError("alpha and t_c must be positive")
    if order_cap < 0:
        raise UsageError("order_cap must be non-negative")
    ts = _grid(interval, grid_density)
    ks = np.arange(order_cap + 1)
    # log of t_c^(alpha+k) k! / Gamma(alpha+k)
    log_weight = (
        (alpha + ks) * math.log(t_c)
        + np.array([math.lgamma(k + 1) - math.lgamma(alpha + k) for k in ks])
    )
    best = _NEG_INF
    arg_t, arg_k = float(ts[0]), 0
    per_order = np.full(order_cap + 1, _NEG_INF)
    for t in ts:
        jet = jet_fn(float(t), order_cap, precision)
        mags = np.abs(jet.coefficients())
        with np.errstate(divide="ignore"):
            logs = np.where(mags > 0.0, np.log(np.maximum(mags, 1e-320)), _NEG_INF)
        scores = logs + log_weight
        per_order = np.maximum(per_order, scores)
        k_star = int(np.argmax(scores))
        if scores[k_star] > best:
            best = float(scores[k_star])
            arg_t, arg_k = float(t), k_star
    return NormEstimate(
        alpha=alpha,
        t_c=t_c,
        interval=(float(interval[0]), float(interval[1])),
        order_cap=order_cap,
        grid_points=len(ts),
        value=math.exp(best) if best > _NEG_INF else 0.0,
        log_value=best,
        argmax_t=arg_t,
        argmax_k=arg_k,
        per_order_log=[float(v) for v in per_order],
    )


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    holds: bool
    slack: float               # rhs / lhs (inf when lhs = 0)
    details: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def check_product_inequality(jet_f, jet_g, alpha: float, beta: float,
                             t_c: float, interval, order_cap: int = 40,
                             grid_density: int = 17,
                             precision: str = DOUBLE) -> InequalityReport:
    """||fg||_(alpha+beta) <= B(alpha, beta) ||f||_alpha ||g||_beta.

    The left side is a truncated sup (an under-estimate), so a reported
    violation is a real violation.
    """

    def prod_fn(t, order, prec):
        return jet_f(t, order, prec) * jet_g(t, order, prec)

    lhs = estimate_norm(prod_fn, interval, alpha + beta, t_c, order_cap,
                        grid_density, precision)
    nf = estimate_norm(jet_f, interval, alpha, t_c, order_cap, grid_density, precision)
    ng = estimate_norm(jet_g, interval, beta, t_c, order_cap, grid_density, precision)
    rhs = beta_function(alpha, beta) * nf.value * ng.value
    holds = lhs.value <= rhs * (1.0 + 1e-12)
    return InequalityReport(
        name="product",
        lhs=lhs.value,
        rhs=rhs,
        holds=holds,
        slack=rhs / lhs.value if lhs.value > 0 else math.inf,
        details={
            "alpha": alpha, "beta": beta, "t_c": t_c,
            "norm_f": nf.value, "norm_g": ng.value,
            "beta_constant": beta_function(alpha, beta),
            "lhs_argmax": [lhs.argmax_t, lhs.argmax_k],
        },
    )


def check_integration_inequality(jet_f, s_anchor: float, alpha: float,
                                 t_c: float, interval, order_cap: int = 40,
                                 grid_density: int = 17,
                                 precision: str = DOUBLE) -> InequalityReport:
    """|| int_s^t f ||_(alpha-1) <= max{(alpha-1) max|t-s|/t_c, 1} ||f||_alpha
    for alpha > 1 (with |t-s| <= t_c and alpha > 2 the factor is alpha-1).

    The antiderivative's jets are the jets of f shifted one order up, with
    the definite integral from the anchor as constant term (adaptive
    quadrature stitching).
    """
    if alpha <= 1:
        raise UsageError("the antiderivative inequality needs alpha > 1")

    def anti_fn(t, order, prec):
        base = jet_f(t, max(order - 1, 0), prec)
        if t == s_anchor:
            const = 0.0
        else:
            re, _ = quad(lambda u: jet_f(u, 0, DOUBLE).value.real, s_anchor, t,
                         epsabs=1e-14, epsrel=1e-12, limit=200)
            im, _ = quad(lambda u: jet_f(u, 0, DOUBLE).value.imag, s_anchor, t,
                         epsabs=1e-14, epsrel=1e-12, limit=200)
            const = complex(re, im)
        return base.antiderivative(const)

    lhs = estimate_norm(anti_fn, interval, alpha - 1.0, t_c, order_cap,
                        grid_density, precision)
    nf = estimate_norm(jet_f, interval, alpha, t_c, order_cap, grid_density, precision)
    span = max(abs(interval[0] - s_anchor), abs(interval[1] - s_anchor))
    factor = max((alpha - 1.0) * span / t_c, 1.0)
    rhs = factor * nf.value
    holds = lhs.value <= rhs * (1.0 + 1e-12)
    return InequalityReport(
        name="integration",
        lhs=lhs.value,
        rhs=rhs,
        holds=holds,
        slack=rhs / lhs.value if lhs.value > 0 else math.inf,
        details={
            "alpha": alpha, "t_c": t_c, "anchor": s_anchor,
            "factor": factor, "norm_f": nf.value,
            "lhs_argmax": [lhs.argmax_t, lhs.argmax_k],
        },
    )


def model_norm(model, interval, alpha: float, t_c: float,
               order_cap: int = 60, grid_density: int = 33,
               precision: str = DOUBLE) -> NormEstimate:
    """Norm estimate of theta' for any model with theta_prime_jet."""
    return estimate_norm(model.theta_prime_jet, interval, alpha, t_c,
                         order_cap, grid_density, precision)


def elliptic_theta3_jet(t: float, order: int, precision: str = DOUBLE) -> Jet:
    """Jet at 0 of theta_3(z) = sum z^(n^2); only valid at t = 0.

    The coefficient pattern (1 at square indices) makes the norm estimate
    diverge with the order cap for alpha < 1 and stabilize for alpha >= 1,
    the signature of a natural-boundary function.
    """
    if t != 0.0:
        raise UsageError("theta_3 jet implemented at the origin only")
    coefficients = np.zeros(order + 1, dtype=np.complex128)
    k = 0
    while k * k <= order:
        coefficients[k * k] = 1.0
        k += 1
    jet = Jet(0.0, coefficients)
    if precision != DOUBLE:
        jet = jet.to_extended()
    return jet
