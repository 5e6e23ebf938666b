"""The superadiabatic coefficient recursion and its independent oracle.

Starting from x_1 = -(i/2) theta', the coefficient functions obey

    x_n = -i (z_{n-1}' - theta' y_{n-1})
    y_n = sum_{j=1}^{n-1} (-x_j x_{n-j} + y_j y_{n-j} + z_j z_{n-j})
    z_n = -i x_{n-1}'

together with the first integral y_n' = -theta' z_n.  Parity is exact:
x_n vanishes for even n, y_n and z_n for odd n.  Every quantity here is a
jet at one base point; each derivative in the ladder consumes one jet
order, so a seed of order K0 supports roughly n up to K0 minus a margin.

The linear integro-differential form

    -z_{n+2} = z_n'' + (theta')^2 z_n
               + theta'' ( int_anchor^t theta' z_n ds + y_n(anchor) )

is implemented as an independent route (:func:`oracle_z_next`) and used to
cross-check the nonlinear recursion.  The definite integral is accumulated
by Gauss-Legendre quadrature from the anchor (the jet's local
antiderivative alone would be limited to the disk of convergence).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .jets import DOUBLE, EXTENDED, Jet, jet_antiderivative
from .theta import jet_of_theta_prime

DEFAULT_MARGIN = 8


def default_seed_order(max_n: int) -> int:
    """2*N + 8: one order per derivative step, doubled to leave room for
    residual and oracle checks on the late jets."""
    return 2 * max_n + DEFAULT_MARGIN


@dataclass
class SuperadiabaticSequence:
    """Jets of (x_n, y_n, z_n) for n = 1..max_n at one base point."""

    base_point: float
    max_n: int
    x: list  # index 0 unused; x[n] is a Jet
    y: list
    z: list
    y_at_anchor: np.ndarray  # y_n(anchor), index 0 unused
    anchor: float
    theta_prime: Jet
    precision: str

    def parity_defect(self) -> float:
        """Max |coefficient| over components that parity says vanish."""
        worst = 0.0
        for n in range(1, self.max_n + 1):
            if n % 2 == 0:
                worst = max(worst, self.x[n].max_abs_coefficient())
            else:
                worst = max(worst, self.y[n].max_abs_coefficient())
                worst = max(worst, self.z[n].max_abs_coefficient())
        return worst


def _recursion_ladder(theta_jet: Jet, max_n: int):
    """Run the raw recursion from a seed jet of theta'."""
    x = [None] * (max_n + 1)
    y = [None] * (max_n + 1)
    z = [None] * (max_n + 1)
    x[1] = theta_jet * (-0.5j)
    zero = theta_jet * 0.0
    y[1] = zero
    z[1] = zero
    for n in range(2, max_n + 1):
        x[n] = (z[n - 1].derivative() - theta_jet * y[n - 1]) * (-1j)
        acc = None
        for j in range(1, n):
            term = (y[j] * y[n - j] + z[j] * z[n - j]) - x[j] * x[n - j]
            acc = term if acc is None else acc + term
        y[n] = acc
        z[n] = x[n - 1].derivative() * (-1j)
    return x, y, z


def build_sequence(
    model,
    t: float,
    max_n: int,
    seed_order: int | None = None,
    precision: str = DOUBLE,
    anchor: float | None = None,
    with_anchor_values: bool = True,
) -> SuperadiabaticSequence:
    """Build the jet sequence at base point t.

    seed_order defaults to 2*max_n + 8.  Anything below max_n + 4 cannot
    complete the derivative ladder with usable room and is rejected.
    """
    if max_n < 1:
        raise UsageError("max_n must be >= 1")
    if seed_order is None:
        seed_order = default_seed_order(max_n)
    if seed_order < max_n + 4:
        raise UsageError(
            f"seed order {seed_order} insufficient for max_n={max_n}; "
            f"need at least {max_n + 4}"
        )
    if anchor is None:
        anchor = getattr(model, "t_r", None)
        if anchor is None:
            anchor = getattr(model, "anchor_t", 0.0) or 0.0
    theta_jet = jet_of_theta_prime(model, t, seed_order, precision)
    x, y, z = _recursion_ladder(theta_jet, max_n)

    y_anchor = np.zeros(max_n + 1)
    if with_anchor_values:
        if t == anchor:
            for n in range(1, max_n + 1):
                y_anchor[n] = y[n].value.real
        else:
            th0 = jet_of_theta_prime(model, anchor, max_n + 4, precision)
            _, y0, _ = _recursion_ladder(th0, max_n)
            for n in range(1, max_n + 1):
                y_anchor[n] = y0[n].value.real

    return SuperadiabaticSequence(
        base_point=t,
        max_n=max_n,
        x=x,
        y=y,
        z=z,
        y_at_anchor=y_anchor,
        anchor=anchor,
        theta_prime=theta_jet,
        precision=precision,
    )


# -- the integro-differential oracle --------------------------------------

_GAUSS_NODES = 48


def _gauss_legendre(a: float, b: float, n: int = _GAUSS_NODES):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (nodes + 1.0), half * weights


def oracle_z_next(model, seq: SuperadiabaticSequence, n: int) -> Jet:
    """z_{n+2} via the linear integro-differential route.

    Requires even n with n + 2 <= max_n worth of seed accuracy; uses the
    anchor values y_n stored in the sequence.  The definite integral of
    theta' z_n from the anchor to t runs in double precision (it is an
    O(1)-conditioned additive term), the jets in the sequence's own
    precision.
    """
    if n % 2 != 0:
        raise UsageError("the z-recursion oracle needs even n (z_n = 0 for odd n)")
    if n > seq.max_n:
        raise UsageError(f"sequence holds n <= {seq.max_n}, requested {n}")
    if seq.y_at_anchor is None or len(seq.y_at_anchor) <= n:
        raise UsageError("sequence lacks anchor values for the oracle")

    t = seq.base_point
    th = seq.theta_prime
    zn = seq.z[n]
    zpp = zn.derivative().derivative()
    theta_pp = th.derivative()

    # definite integral int_anchor^t theta'(s) z_n(s) ds, by quadrature
    # with per-node value-only ladders
    definite = 0.0
    if t != seq.anchor:
        nodes, weights = _gauss_legendre(seq.anchor, t)
        vals = np.empty(len(nodes))
        for i, s in enumerate(nodes):
            th_s = jet_of_theta_prime(model, float(s), n + 4, DOUBLE)
            _, _, z_s = _recursion_ladder(th_s, n)
            vals[i] = (th_s.value * z_s[n].value).real
        definite = float(np.dot(weights, vals))

    # y_n(t) = y_n(anchor) - int_anchor^t theta' z_n, so the inhomogeneity
    # theta''*y_n enters with the anchor value subtracted from the integral
    local = jet_antiderivative(th * zn, definite)
    inhom = theta_pp * (local - float(seq.y_at_anchor[n]))
    rhs = zpp + th * th * zn + inhom
    return -rhs


def diffeq_residual(seq: SuperadiabaticSequence, n: int) -> float:
    """Relative residual of y_n' = -theta' z_n over available coefficients."""
    if n > seq.max_n:
        raise UsageError(f"sequence holds n <= {seq.max_n}, requested {n}")
    if n % 2 == 1:
        return 0.0
    lhs = seq.y[n].derivative()
    rhs = seq.theta_prime * seq.z[n]
    resid = lhs + rhs
    scale = max(lhs.max_abs_coefficient(), rhs.max_abs_coefficient())
    if scale == 0.0:
        return 0.0
    return resid.max_abs_coefficient() / scale


def asymptotic_reference_x(data, n: int, t: float) -> complex:
    """Closed-form leading asymptotic of x_n for odd n:

        x_n(t) ~ -i * c_gamma * (n-1)!/t_c^n * Re (1 - i(t-t_r)/t_c)^(-n)

    with c_gamma = 2 sin(gamma*pi/2)/pi.  The overall sign is the one the
    seed x_1 = -(i/2) theta' actually produces (verified numerically to
    converge with the expected n^(alpha-1) rate); factorials go through
    lgamma so the value is finite in log-space for any n.
    """
    if n % 2 == 0:
        raise UsageError("the x_n reference applies to odd n (x_n = 0 for even n)")
    u = (t - data.t_r) / data.t_c
    c_gamma = 2.0 * math.sin(data.gamma * math.pi / 2.0) / math.pi
    log_mag = math.lgamma(n) - n * math.log(data.t_c)
    # (1 - iu)^(-n) = (1+u^2)^(-n/2) * exp(i n atan u)
    re_part = (1.0 + u * u) ** (-n / 2.0) * math.cos(n * math.atan(u))
    return -1j * c_gamma * math.exp(log_mag) * re_part


def asymptotic_reference_z(data, n: int, t: float) -> complex:
    """Companion closed form for even n:

        z_n(t) ~ +c_gamma * (n-1)!/t_c^n * Im (1 - i(t-t_r)/t_c)^(-n)

    (sign convention matching asymptotic_reference_x)."""
    if n % 2 == 1:
        raise UsageError("the z_n reference applies to even n (z_n = 0 for odd n)")
    u = (t - data.t_r) / data.t_c
    c_gamma = 2.0 * math.sin(data.gamma * math.pi / 2.0) / math.pi
    log_mag = math.lgamma(n) - n * math.log(data.t_c)
    im_part = (1.0 + u * u) ** (-n / 2.0) * math.sin(n * math.atan(u))
    return c_gamma * math.exp(log_mag) * im_part


def apriori_bound_xz(n: int, tau: float, theta_norm: float) -> float:
    """log of the a priori bound (n-1)!/tau^n * ||
    theta'||_1 (e^{42||theta'||_1^2} - 1/2) for |x_n| and |z_n|."""
    growth = 42.0 * theta_norm * theta_norm
    # log(e^g - 1/2) without overflow
    log_paren = growth + math.log1p(-0.5 * math.exp(-growth))
    return math.lgamma(n) - n * math.log(tau) + math.log(theta_norm) + log_paren


def apriori_bound_y(n: int, tau: float, theta_norm: float) -> float:
    """log of (n-2)!/tau^n * (e^{42||theta'||_1^2} - 1)."""
    if n < 2:
        raise UsageError("the y bound needs n >= 2")
    growth = 42.0 * theta_norm * theta_norm
    log_paren = growth + math.log1p(-math.exp(-growth))
    return math.lgamma(n - 1) - n * math.log(tau) + log_paren
