"""Late-Taylor-coefficient asymptotics from boundary singularities.

For f analytic on |z| < R with finitely many algebraic singularities
(z - z_j)^(-alpha_j) g_j(z - z_j) on the circle, the n-th Taylor
coefficient at 0 satisfies

    f^(n)(0)/n! = sum_j e^{-i pi alpha_j} (g_j(0)/Gamma(alpha_j))
                  n^(alpha_j - 1) / z_j^(n + alpha_j) * (1 + O(1/n)).

Strengths g_j(0) are taken relative to the principal branch of
(z - z_j)^(-alpha_j); with the branch cut pointing radially outward the
prefactor e^{-i pi alpha_j} then reproduces e.g. 1/(1-z) = (z-1)^(-1)*(-1)
with prediction exactly 1 (the worked sign check in the tests).  Only the
leading g_j(0) term is predicted; the O(1/n) remainder is what the
agreement report measures.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma

from .errors import AssumptionError, UsageError
from .jets import DOUBLE, EXTENDED, Jet


@dataclass(frozen=True)
class AlgebraicSingularity:
    location: complex          # z_j on |z| = R
    order_alpha: float         # alpha_j, not in {0, -1, -2, ...}
    strength: complex          # g_j(0), principal branch convention

    def __post_init__(self):
        a = self.order_alpha
        if a <= 0 and abs(a - round(a)) < 1e-12:
            raise AssumptionError(
                f"alpha={a} hits a pole of Gamma; not an admissible order"
            )


def check_radius(singularities, radius: float, tol: float = 1e-10):
    for s in singularities:
        if abs(abs(s.location) - radius) > tol * radius:
            raise AssumptionError(
                f"singularity {s.location} not on the circle |z|={radius}"
            )


def predict_coefficient(singularities, n: int) -> complex:
    """Leading-order prediction of f^(n)(0)/n!."""
    if n < 1:
        raise UsageError("coefficient asymptotics need n >= 1")
    total = 0.0 + 0.0j
    for s in singularities:
        a = s.order_alpha
        g = _gamma(a)
        if not np.isfinite(g) or g == 0.0:
            raise AssumptionError(f"Gamma(alpha) not finite at alpha={a}")
        # n^(a-1) / z^(n+a) in log space; principal branch for z^(n+a)
        logz = cmath.log(s.location)
        expo = (a - 1.0) * math.log(n) - (n + a) * logz
        total += cmath.exp(-1j * math.pi * a + expo) * s.strength / g
    return total


def true_coefficients(jet_fn, max_n: int, precision: str = EXTENDED) -> np.ndarray:
    """Taylor coefficients of f at 0 up to order max_n, read off one jet."""
    jet = jet_fn(0.0, max_n, precision)
    return jet.coefficients()


@dataclass
class DarbouxRow:
    n: int
    true: complex
    predicted: complex
    relative_error: float


@dataclass
class DarbouxReport:
    rows: list
    fitted_rate_constant: float   # c in e_n ~ c/n
    loglog_slope: float           # slope of log e_n vs log n (about -1)
    fit_residual: float
    max_scaled_error: float       # max over rows of n * e_n
    min_scaled_error: float


def asymptotic_agreement_report(jet_fn, singularities, n_values,
                                precision: str = EXTENDED) -> DarbouxReport:
    """Tabulate e_n = |true - predicted| / |predicted| and fit e_n ~ c/n."""
    n_values = sorted(int(n) for n in n_values)
    coeffs = true_coefficients(jet_fn, max(n_values), precision)
    rows = []
    for n in n_values:
        pred = predict_coefficient(singularities, n)
        tru = complex(coeffs[n])
        denom = abs(pred)
        e = abs(tru - pred) / denom if denom > 0 else math.inf
        rows.append(DarbouxRow(n=n, true=tru, predicted=pred, relative_error=e))
    errs = np.array([r.relative_error for r in rows])
    ns = np.array([r.n for r in rows], dtype=float)
    good = errs > 0
    if good.sum() >= 2:
        slope, intercept = np.polyfit(np.log(ns[good]), np.log(errs[good]), 1)
        fit = np.exp(intercept + slope * np.log(ns[good]))
        residual = float(np.max(np.abs(np.log(errs[good]) - np.log(fit))))
        c = float(np.exp(intercept))  # e_n ~ c * n^slope, c at n = 1
    else:
        slope, residual, c = 0.0, 0.0, 0.0
    scaled = ns * errs
    return DarbouxReport(
        rows=rows,
        fitted_rate_constant=c,
        loglog_slope=float(slope),
        fit_residual=residual,
        max_scaled_error=float(np.max(scaled)),
        min_scaled_error=float(np.min(scaled)),
    )


# -- closed-form jet generators for the bundled test functions --------------


def geometric_jet(t: float, order: int, precision: str = DOUBLE) -> Jet:
    """f(z) = 1/(1-z) at 0: all coefficients 1."""
    if t != 0.0:
        raise UsageError("bundled Darboux functions expand at the origin")
    jet = Jet(0.0, np.ones(order + 1, dtype=np.complex128))
    return jet.to_extended() if precision != DOUBLE else jet


def inverse_sqrt_jet(t: float, order: int, precision: str = DOUBLE) -> Jet:
    """f(z) = (1-z)^(-1/2) at 0: central-binomial coefficients, built by
    the stable ratio recurrence c_k = c_{k-1} (k - 1/2)/k."""
    if t != 0.0:
        raise UsageError("bundled Darboux functions expand at the origin")
    c = np.empty(order + 1, dtype=np.complex128)
    c[0] = 1.0
    for k in range(1, order + 1):
        c[k] = c[k - 1] * (k - 0.5) / k
    jet = Jet(0.0, c)
    return jet.to_extended() if precision != DOUBLE else jet


def geometric_singularity() -> list:
    return [AlgebraicSingularity(location=1.0 + 0.0j, order_alpha=1.0,
                                 strength=-1.0 + 0.0j)]


def inverse_sqrt_singularity() -> list:
    # (1-z)^(-1/2) = (z-1)^(-1/2) * g with g(0) = i on the principal branch
    return [AlgebraicSingularity(location=1.0 + 0.0j, order_alpha=0.5,
                                 strength=1j)]


def pole_pair_singularities(gamma: float, t_r: float, t_c: float) -> list:
    """theta'_0 viewed from t = 0: conjugate simple poles with strengths
    -/+ i gamma at t_r +/- i t_c (only valid as Darboux data when
    |t_r + i t_c| is the convergence radius)."""
    up = complex(t_r, t_c)
    return [
        AlgebraicSingularity(location=up, order_alpha=1.0, strength=-1j * gamma),
        AlgebraicSingularity(location=up.conjugate(), order_alpha=1.0,
                             strength=1j * gamma),
    ]
