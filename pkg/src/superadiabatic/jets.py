"""Truncated Taylor-jet arithmetic over complex scalars.

A jet holds the coefficients c_k = f^(k)(t)/k! of a smooth function at a
real base point, up to a fixed order.  Storing monomial-normalized
coefficients instead of raw derivatives keeps magnitudes tame at orders
around 100, where factorials would overflow; anything that needs raw
derivatives multiplies by k! at the boundary.

Two coefficient backends are supported and dispatched by container type:
plain ``numpy`` complex128 arrays ("double") and :class:`~.ddcore.CD`
double-double arrays ("extended", ~31 digits).  All operations are pure;
jets are treated as immutable values and are safe to share across threads.

Binary operations require equal base points and truncate to the shorter
operand (the recursion in :mod:`~superadiabatic.recursion` consumes one
order per derivative, so mixed orders are the normal state of affairs).
"""

from __future__ import annotations

import numbers

import numpy as np

from .ddcore import CD, DD, as_cd_scalar, cd_convolve, cd_exp, cd_pow
from .errors import UsageError

DOUBLE = "double"
EXTENDED = "extended"


def _is_dd(coeffs) -> bool:
    return isinstance(coeffs, CD)


def _zeros(n: int, like) -> np.ndarray | CD:
    if _is_dd(like):
        return CD.zeros(n)
    return np.zeros(n, dtype=np.complex128)


def _sum(vec):
    if isinstance(vec, CD):
        return vec.sum()
    return np.sum(vec)


def _lift_scalar(value, like):
    """Turn a python/np/dd scalar into a backend scalar matching `like`."""
    if _is_dd(like):
        return as_cd_scalar(value)
    if isinstance(value, CD):
        return complex(value.to_complex())
    if isinstance(value, DD):
        return complex(value.to_float())
    return np.complex128(value)


def _convolve(a, b, out_len: int):
    """Cauchy product of coefficient containers, truncated to out_len."""
    if not _is_dd(a):
        return np.convolve(a, b)[:out_len]
    return cd_convolve(a, b, out_len)


class Jet:
    """Taylor coefficients of a function at a real base point."""

    __slots__ = ("base_point", "coeffs")

    def __init__(self, base_point: float, coeffs):
        if isinstance(coeffs, (list, tuple)):
            coeffs = np.asarray(coeffs, dtype=np.complex128)
        if isinstance(coeffs, np.ndarray) and coeffs.dtype != np.complex128:
            coeffs = coeffs.astype(np.complex128)
        self.base_point = float(base_point)
        self.coeffs = coeffs

    # -- construction -------------------------------------------------
    @classmethod
    def constant(cls, base_point: float, value, order: int, precision: str = DOUBLE) -> "Jet":
        if precision == EXTENDED:
            c = CD.zeros(order + 1)
            c[0] = as_cd_scalar(value)
        else:
            c = np.zeros(order + 1, dtype=np.complex128)
            c[0] = complex(value)
        return cls(base_point, c)

    @classmethod
    def variable(cls, base_point: float, order: int, precision: str = DOUBLE) -> "Jet":
        """Jet of f(t) = t at the base point."""
        out = cls.constant(base_point, base_point, order, precision)
        if order >= 1:
            if precision == EXTENDED:
                out.coeffs[1] = as_cd_scalar(1.0)
            else:
                out.coeffs[1] = 1.0
        return out

    # -- basic properties ----------------------------------------------
    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_extended(self) -> bool:
        return _is_dd(self.coeffs)

    def coefficient(self, k: int) -> complex:
        c = self.coeffs[k]
        return complex(c.to_complex()) if isinstance(c, CD) else complex(c)

    @property
    def value(self) -> complex:
        return self.coefficient(0)

    def coefficients(self) -> np.ndarray:
        """All coefficients as complex128 (rounded if extended)."""
        if self.is_extended:
            return np.atleast_1d(self.coeffs.to_complex())
        return np.asarray(self.coeffs)

    def derivative_value(self, k: int) -> complex:
        """Raw derivative f^(k)(t) = k! * c_k (double precision)."""
        from math import lgamma

        ck = self.coefficient(k)
        if ck == 0:
            return 0.0 + 0.0j
        return ck * np.exp(lgamma(k + 1))

    # -- arithmetic ----------------------------------------------------
    def _check_compatible(self, other: "Jet"):
        if self.base_point != other.base_point:
            raise UsageError(
                f"jet base points differ: {self.base_point} vs {other.base_point}"
            )
        if self.is_extended != other.is_extended:
            raise UsageError("cannot mix double and extended jets")

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check_compatible(other)
            n = min(len(self.coeffs), len(other.coeffs))
            return Jet(self.base_point, self.coeffs[:n] + other.coeffs[:n])
        if isinstance(other, (numbers.Complex, DD, CD)):
            out = self.coeffs.copy()
            out[0] = out[0] + _lift_scalar(other, self.coeffs)
            return Jet(self.base_point, out)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.base_point, -self.coeffs)

    def __sub__(self, other):
        if isinstance(other, Jet):
            self._check_compatible(other)
            n = min(len(self.coeffs), len(other.coeffs))
            return Jet(self.base_point, self.coeffs[:n] - other.coeffs[:n])
        if isinstance(other, (numbers.Complex, DD, CD)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check_compatible(other)
            n = min(len(self.coeffs), len(other.coeffs))
            return Jet(self.base_point, _convolve(self.coeffs, other.coeffs, n))
        if isinstance(other, (numbers.Complex, DD, CD)):
            return Jet(self.base_point, self.coeffs * _lift_scalar(other, self.coeffs))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return jet_div(self, other)
        if isinstance(other, (numbers.Complex, DD, CD)):
            return self * (1.0 / _lift_scalar(other, self.coeffs))
        return NotImplemented

    # -- calculus -------------------------------------------------------
    def derivative(self) -> "Jet":
        if self.order < 1:
            raise UsageError("cannot differentiate an order-0 jet")
        k = np.arange(1.0, self.order + 1)
        return Jet(self.base_point, self.coeffs[1:] * k)

    def antiderivative(self, constant=0.0) -> "Jet":
        n = len(self.coeffs)
        out = _zeros(n + 1, self.coeffs)
        out[0] = _lift_scalar(constant, self.coeffs)
        out[1:] = self.coeffs * (1.0 / np.arange(1.0, n + 1))
        return Jet(self.base_point, out)

    # -- misc -----------------------------------------------------------
    def conj(self) -> "Jet":
        """Jet of the conjugated function (valid because t is real)."""
        return Jet(self.base_point, self.coeffs.conj())

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.base_point, self.coeffs[: order + 1])

    def evaluate(self, dt) -> complex:
        """Evaluate the truncated polynomial at base_point + dt (double)."""
        c = self.coefficients()
        acc = 0.0 + 0.0j
        for k in range(len(c) - 1, -1, -1):
            acc = acc * dt + c[k]
        return acc

    def to_double(self) -> "Jet":
        if not self.is_extended:
            return self
        return Jet(self.base_point, self.coefficients())

    def to_extended(self) -> "Jet":
        if self.is_extended:
            return self
        return Jet(self.base_point, CD.from_complex(self.coeffs))

    def max_abs_coefficient(self) -> float:
        c = self.coefficients()
        return float(np.max(np.abs(c))) if len(c) else 0.0

    def __repr__(self):
        kind = EXTENDED if self.is_extended else DOUBLE
        return f"Jet(t={self.base_point}, order={self.order}, {kind})"


# -- spec-facing functional aliases ------------------------------------


def jet_add(a: Jet, b: Jet) -> Jet:
    return a + b


def jet_mul(a: Jet, b: Jet) -> Jet:
    return a * b


def jet_derivative(a: Jet) -> Jet:
    return a.derivative()


def jet_antiderivative(a: Jet, constant=0.0) -> Jet:
    return a.antiderivative(constant)


# -- elementary functions of jets ---------------------------------------


def jet_div(a: Jet, b: Jet) -> Jet:
    """Cauchy division a/b; b must have a nonzero constant term."""
    a._check_compatible(b)
    n = min(len(a.coeffs), len(b.coeffs))
    ac, bc = a.coeffs[:n], b.coeffs[:n]
    b0 = bc[0]
    if abs(_lift_scalar(b0, np.zeros(1, complex))) == 0.0:
        raise UsageError("jet division by a jet with zero constant term")
    out = _zeros(n, ac)
    out[0] = ac[0] / b0
    for k in range(1, n):
        # c_k = (a_k - sum_{j<k} c_j b_{k-j}) / b_0
        acc = _sum(out[:k] * bc[k:0:-1])
        out[k] = (ac[k] - acc) / b0
    return Jet(a.base_point, out)


def jet_reciprocal(a: Jet) -> Jet:
    one = Jet.constant(a.base_point, 1.0, a.order, EXTENDED if a.is_extended else DOUBLE)
    return jet_div(one, a)


def jet_exp(a: Jet) -> Jet:
    """exp of a jet; seed exp(c_0) via mpmath for the extended backend."""
    n = len(a.coeffs)
    out = _zeros(n, a.coeffs)
    if a.is_extended:
        out[0] = cd_exp(as_cd_scalar(a.coeffs[0]))
    else:
        out[0] = np.exp(a.coeffs[0])
    ju = a.coeffs * np.arange(0.0, n)  # k * u_k
    for k in range(1, n):
        acc = _sum(ju[1 : k + 1] * out[k - 1 :: -1][:k])
        out[k] = acc * (1.0 / k)
    return Jet(a.base_point, out)


def jet_pow(a: Jet, p: float) -> Jet:
    """Principal-branch power a**p; a must have nonzero constant term."""
    n = len(a.coeffs)
    u0 = a.coeffs[0]
    if abs(_lift_scalar(u0, np.zeros(1, complex))) == 0.0:
        raise UsageError("jet power of a jet with zero constant term")
    out = _zeros(n, a.coeffs)
    if a.is_extended:
        out[0] = cd_pow(as_cd_scalar(u0), p)
    else:
        out[0] = np.power(np.complex128(u0), p)
    ju = a.coeffs * np.arange(0.0, n)  # k * u_k
    for k in range(1, n):
        s1 = _sum(ju[1 : k + 1] * out[k - 1 :: -1][:k])
        if k >= 2:
            jw = out[1:k] * np.arange(1.0, k)
            s2 = _sum(jw * a.coeffs[k - 1 : 0 : -1])
        else:
            s2 = _lift_scalar(0.0, a.coeffs)
        out[k] = (s1 * p - s2) / (u0 * float(k))
    return Jet(a.base_point, out)


def jet_sqrt(a: Jet) -> Jet:
    return jet_pow(a, 0.5)


def jet_cos_sin(theta: Jet) -> tuple[Jet, Jet]:
    """cos and sin jets of a real-valued jet via exp(i*theta)."""
    w = jet_exp(theta * 1j)
    wc = w.conj()
    return (w + wc) * 0.5, (w - wc) * (-0.5j)


def jet_abs2(a: Jet) -> Jet:
    """Jet of |f|^2 = f * conj(f) (f restricted to the real axis)."""
    return a * a.conj()


def jet_real(a: Jet) -> Jet:
    return (a + a.conj()) * 0.5


def taylor_shift(a: Jet, h: float) -> Jet:
    """Re-expand the truncated polynomial at base_point + h (double only)."""
    c = a.coefficients().copy()
    n = len(c)
    # synthetic Horner shift
    for i in range(n - 1):
        for k in range(n - 2, i - 1, -1):
            c[k] = c[k] + h * c[k + 1]
    return Jet(a.base_point + h, c)
