"""Evaluable models of the adiabatic coupling function theta'(t).

The central model is a conjugate pair of first-order poles at
t_r +/- i*t_c with residues -/+ i*gamma, optionally plus a remainder
built from a small library of closed forms with exact jets (rational
functions and algebraic branch terms (t - z0)^(-a) * h(t - z0) with h a
polynomial).  Remainder terms are automatically symmetrized with their
complex-conjugate partner so that theta' stays real on the real axis.

The mixing angle theta itself is recovered from one configurable anchor,
theta(anchor_t) = anchor_value (default theta(t_r) = 0), plus the
closed-form arctan antiderivative of the pole part and adaptive
quadrature for the remainder.  The anchor is a pure phase convention:
all bounds and asymptotics only involve theta'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.integrate import quad

from .ddcore import CD, DD, as_cd_scalar, cd_pow, dd_atan
from .errors import DomainError, NumericError, UsageError
from .jets import DOUBLE, EXTENDED, Jet, jet_pow

_QUAD_EPS = 1e-12


# -- remainder term library ---------------------------------------------


@dataclass(frozen=True)
class AlgebraicTerm:
    """prefactor * (t - z0)^(-alpha) * h(t - z0), plus conjugate partner.

    h is a polynomial given by ascending coefficients.  The conjugate
    partner (conjugated prefactor, z0, h) is always added, which makes
    the sum real-valued on the real axis.
    """

    z0: complex
    alpha: float
    prefactor: complex = 1.0
    h: tuple = (1.0,)

    def _half_jet(self, t: float, order: int, precision: str) -> Jet:
        u = Jet.variable(t, order, precision) - self.z0
        w = jet_pow(u, -self.alpha) * self.prefactor
        if len(self.h) > 1 or self.h[0] != 1.0:
            acc = Jet.constant(t, self.h[-1], order, precision)
            for c in self.h[-2::-1]:
                acc = acc * u + c
            w = w * acc
        return w

    def jet(self, t: float, order: int, precision: str = DOUBLE) -> Jet:
        w = self._half_jet(t, order, precision)
        return w + w.conj()

    def value(self, t: float) -> float:
        return self.jet(t, 0).value.real


@dataclass(frozen=True)
class RationalTerm:
    """num(t)/den(t) with real coefficients (ascending order)."""

    num: tuple
    den: tuple = (1.0,)

    def jet(self, t: float, order: int, precision: str = DOUBLE) -> Jet:
        u = Jet.variable(t, order, precision)

        def poly(coeffs):
            acc = Jet.constant(t, coeffs[-1], order, precision)
            for c in coeffs[-2::-1]:
                acc = acc * u + c
            return acc

        top = poly(self.num)
        if len(self.den) == 1 and self.den[0] == 1.0:
            return top
        return top / poly(self.den)

    def value(self, t: float) -> float:
        return self.jet(t, 0).value.real


# -- models --------------------------------------------------------------


@dataclass(frozen=True)
class PolePairModel:
    """Conjugate first-order poles at t_r +/- i t_c plus optional remainder.

    Without remainder, theta'(t) = i*gamma*(1/(t - t_r + i t_c)
    - 1/(t - t_r - i t_c)) = 2*gamma*t_c/((t - t_r)^2 + t_c^2), and
    theta(t) = 2*gamma*arctan((t - t_r)/t_c) relative to the anchor.
    """

    gamma: float
    t_r: float = 0.0
    t_c: float = 1.0
    remainder: tuple = ()
    alpha: float = 0.5
    domain: tuple = (-np.inf, np.inf)
    anchor_t: float | None = None  # defaults to t_r
    anchor_value: float = 0.0

    def __post_init__(self):
        if self.t_c <= 0:
            raise UsageError("t_c must be positive")

    @property
    def _anchor(self) -> float:
        return self.t_r if self.anchor_t is None else self.anchor_t

    def _check_domain(self, t: float):
        lo, hi = self.domain
        if not (lo <= t <= hi):
            raise DomainError(f"t={t} outside model domain {self.domain}")

    def theta_prime_jet(self, t: float, order: int, precision: str = DOUBLE) -> Jet:
        """Jet of theta' at t.  Pole-part coefficients are exact real
        closed forms: c_k = -2*gamma*(-1)^k * Im (t - t_r + i t_c)^(-k-1)."""
        self._check_domain(t)
        u = t - self.t_r
        if precision == EXTENDED:
            w = as_cd_scalar(complex(u, self.t_c))
            p = 1.0 / w  # (u + i t_c)^-1
            coeffs = CD.zeros(order + 1)
            sign = -2.0 * self.gamma
            acc = p
            for k in range(order + 1):
                coeffs[k] = CD(acc.im * sign, DD.zeros(()))
                if k < order:
                    acc = acc * p
                    sign = -sign
            out = Jet(t, coeffs)
        else:
            p = 1.0 / complex(u, self.t_c)
            ks = np.arange(order + 1)
            powers = p ** (ks + 1)
            coeffs = (-2.0 * self.gamma) * ((-1.0) ** ks) * powers.imag
            out = Jet(t, coeffs.astype(np.complex128))
        for term in self.remainder:
            out = out + term.jet(t, order, precision)
        return out

    def theta_angle(self, t: float) -> float:
        self._check_domain(t)
        base = 2.0 * self.gamma * (
            math.atan((t - self.t_r) / self.t_c)
            - math.atan((self._anchor - self.t_r) / self.t_c)
        )
        if self.remainder:
            base += _remainder_integral(self.remainder, self._anchor, t)
        return self.anchor_value + base

    def theta_angle_extended(self, t: float) -> DD:
        """theta(t) as a dd scalar; remainder part (if any) only to double."""
        self._check_domain(t)
        tt = as_cd_scalar(t).re
        arg1 = (tt - self.t_r) / as_cd_scalar(self.t_c).re
        arg0 = (as_cd_scalar(self._anchor).re - self.t_r) / as_cd_scalar(self.t_c).re
        base = (dd_atan(arg1) - dd_atan(arg0)) * (2.0 * self.gamma)
        extra = 0.0
        if self.remainder:
            extra = _remainder_integral(self.remainder, self._anchor, t)
        return base + (self.anchor_value + extra)

    def hamiltonian(self, t: float) -> np.ndarray:
        th = self.theta_angle(t)
        c, s = math.cos(th), math.sin(th)
        return 0.5 * np.array([[c, s], [s, -c]])

    def singularity(self):
        from .reparam import SingularityData

        return SingularityData(
            t0=complex(self.t_r, self.t_c),
            t_r=self.t_r,
            t_c=self.t_c,
            gamma=self.gamma,
            alpha=self.alpha,
            radius=abs(complex(self.t_r, self.t_c)) if self.t_r else self.t_c,
        )


def _remainder_integral(terms, a: float, b: float) -> float:
    if a == b:
        return 0.0
    total = 0.0
    for term in terms:
        val, err = quad(term.value, a, b, epsabs=1e-14, epsrel=_QUAD_EPS, limit=200)
        if err > 1e-8 * max(1.0, abs(val)):
            raise NumericError(f"remainder quadrature did not converge (err={err})")
        total += val
    return total


@dataclass(frozen=True)
class RawAnalyticModel:
    """User-supplied jet generator, for test functions with known jets."""

    jet_fn: object  # callable (t, order, precision) -> Jet
    theta_fn: object = None  # optional callable t -> theta(t)
    domain: tuple = (-np.inf, np.inf)
    name: str = "raw"

    def theta_prime_jet(self, t: float, order: int, precision: str = DOUBLE) -> Jet:
        lo, hi = self.domain
        if not (lo <= t <= hi):
            raise DomainError(f"t={t} outside model domain {self.domain}")
        return self.jet_fn(t, order, precision)

    def theta_angle(self, t: float) -> float:
        if self.theta_fn is None:
            raise UsageError("this raw model does not define theta(t)")
        return self.theta_fn(t)

    def hamiltonian(self, t: float) -> np.ndarray:
        th = self.theta_angle(t)
        c, s = math.cos(th), math.sin(th)
        return 0.5 * np.array([[c, s], [s, -c]])


# -- spec-facing operations ----------------------------------------------


def jet_of_theta_prime(model, t: float, order: int, precision: str = DOUBLE) -> Jet:
    if order < 0:
        raise UsageError("jet order must be non-negative")
    return model.theta_prime_jet(t, order, precision)


def theta_angle(model, t: float) -> float:
    return model.theta_angle(t)


def theta_angle_quadrature(model, t: float) -> float:
    """Independent route to theta(t): adaptive quadrature of theta' from
    the anchor.  Used as an oracle against the closed forms."""
    anchor = getattr(model, "_anchor", 0.0)
    anchor_value = getattr(model, "anchor_value", 0.0)
    if t == anchor:
        return anchor_value

    def integrand(s):
        return model.theta_prime_jet(s, 0).value.real

    val, err = quad(integrand, anchor, t, epsabs=1e-14, epsrel=_QUAD_EPS, limit=200)
    if err > 1e-8 * max(1.0, abs(val)):
        raise NumericError(f"theta quadrature did not converge (err={err})")
    return anchor_value + val


# -- JSON ingestion -------------------------------------------------------


def _term_from_json(spec: dict):
    kind = spec.get("type")
    if kind == "algebraic":
        z0 = spec["z0"]
        pf = spec.get("prefactor", [1.0, 0.0])
        return AlgebraicTerm(
            z0=complex(z0[0], z0[1]),
            alpha=float(spec["alpha"]),
            prefactor=complex(pf[0], pf[1]),
            h=tuple(spec.get("h", [1.0])),
        )
    if kind == "rational":
        return RationalTerm(num=tuple(spec["num"]), den=tuple(spec.get("den", [1.0])))
    raise UsageError(f"unknown remainder term type: {kind!r}")


def model_from_json(spec: dict):
    """Build a theta'(t) model from its JSON description."""
    kind = spec.get("type")
    if kind == "pole_pair":
        terms = tuple(_term_from_json(s) for s in spec.get("remainder", []))
        dom = spec.get("domain")
        return PolePairModel(
            gamma=float(spec["gamma"]),
            t_r=float(spec.get("t_r", 0.0)),
            t_c=float(spec["t_c"]),
            remainder=terms,
            alpha=float(spec.get("alpha", 0.5)),
            domain=tuple(dom) if dom else (-np.inf, np.inf),
            anchor_t=spec.get("anchor_t"),
            anchor_value=float(spec.get("anchor_value", 0.0)),
        )
    if kind in ("landau_zener", "rational_xz"):
        from .reparam import reparametrized_model_from_json

        return reparametrized_model_from_json(spec)
    raise UsageError(f"unknown model type: {kind!r}")
