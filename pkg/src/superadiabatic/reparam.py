"""Natural-time reparametrization of general traceless real-symmetric
Hamiltonians (X(s), Z(s)).

tau(s) = 2 int_{s_r}^s sqrt(X^2 + Z^2) maps the dynamics to constant
eigenvalue gap 1; the coupling function in the new time is

    theta'(tau(s)) = (X'Z - Z'X) / (2 rho^3)(s),  rho^2 = X^2 + Z^2.

Each declared critical point s0 of rho^2 (with local data m, n and the
sign of gamma) is mapped to singularity data (t_r, t_c, gamma, alpha):
t0 = tau(s0) by contour quadrature with continuous branch tracking,
gamma = sign * n/(2m+n+2), alpha = (2m+n)/(2m+n+2).  Declared data is
verified numerically: the modulus |rho^2| must fit 2K|s-s0|^(2m+n)
locally, and gamma must match a residue probe of theta' near t0; both
checks error on >10% mismatch rather than trusting the caller.

Critical-point declaration is the caller's job (root-finding general
meromorphic rho^2 is out of scope), as is choosing which critical point
is closest when several compete.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import AssumptionError, DomainError, GeometryError, NumericError, UsageError
from .jets import DOUBLE, EXTENDED, Jet, jet_div, jet_pow
from .ddcore import CD, as_cd_scalar

_GL_NODES = None


def _gl16():
    global _GL_NODES
    if _GL_NODES is None:
        _GL_NODES = np.polynomial.legendre.leggauss(16)
    return _GL_NODES


# -- evaluables -------------------------------------------------------------


@dataclass(frozen=True)
class RationalFunction:
    """num(s)/den(s), coefficients ascending, complex allowed."""

    num: tuple
    den: tuple = (1.0,)

    def value(self, s):
        return _horner(self.num, s) / _horner(self.den, s)

    def derivative_value(self, s):
        n, d = _horner(self.num, s), _horner(self.den, s)
        np_, dp = _horner(_dcoef(self.num), s), _horner(_dcoef(self.den), s)
        return (np_ * d - n * dp) / (d * d)

    def jet(self, s: float, order: int, precision: str = DOUBLE) -> Jet:
        u = Jet.variable(s, order, precision)
        top = _poly_jet(self.num, u, s, order, precision)
        if len(self.den) == 1:
            return top * (1.0 / self.den[0])
        return jet_div(top, _poly_jet(self.den, u, s, order, precision))


def _horner(coeffs, s):
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * s + c
    return acc


def _dcoef(coeffs):
    return tuple(k * c for k, c in enumerate(coeffs))[1:] or (0.0,)


def _poly_jet(coeffs, u: Jet, s: float, order: int, precision: str) -> Jet:
    acc = Jet.constant(s, coeffs[-1], order, precision)
    for c in coeffs[-2::-1]:
        acc = acc * u + c
    return acc


# -- declared data ----------------------------------------------------------


@dataclass(frozen=True)
class CriticalPoint:
    """A zero/pole of rho^2 with its local structure.

    X(s) =      (s-s0)^m f(s-s0) [1 + (s-s0)^n g_X(s-s0)]
    Z(s) = +/- i(s-s0)^m f(s-s0) [1 + (s-s0)^n g_Z(s-s0)]

    gamma_sign is the sign of the resulting residue strength gamma.
    f0, gx0, gz0 (values at 0) are optional; when given, the local
    modulus fit also verifies the strength K = |f0^2 (gx0 - gz0)|.
    """

    s0: complex
    m: int = 0
    n: int = 1
    gamma_sign: int = 1
    f0: complex | None = None
    gx0: complex | None = None
    gz0: complex | None = None

    def __post_init__(self):
        if self.n < 1:
            raise AssumptionError("critical point needs n >= 1")
        if (2 * self.m + self.n) / 2.0 <= -1.0:
            raise AssumptionError("critical point violates (2m+n)/2 > -1")

    @property
    def strength(self) -> float | None:
        if self.f0 is None or self.gx0 is None or self.gz0 is None:
            return None
        k = abs(self.f0 * self.f0 * (self.gx0 - self.gz0))
        if k == 0.0:
            raise AssumptionError("critical point strength K must be positive")
        return k


@dataclass(frozen=True)
class SingularityData:
    """Inputs of the universal coupling formula for one singularity."""

    t0: complex
    t_r: float
    t_c: float
    gamma: float
    alpha: float
    radius: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise AssumptionError(f"alpha={self.alpha} outside (0,1)")
        if self.gamma == 0.0:
            raise AssumptionError("gamma must be nonzero")
        if self.t_c <= 0.0 or self.t_c > self.radius + 1e-12:
            raise AssumptionError("need 0 < t_c <= radius")


@dataclass(frozen=True)
class XZHamiltonian:
    X: RationalFunction
    Z: RationalFunction
    s_r: float = 0.0
    critical_points: tuple = ()
    s_domain: tuple = (-8.0, 8.0)
    name: str = "xz"

    def rho_squared(self, s):
        x, z = self.X.value(s), self.Z.value(s)
        return x * x + z * z

    def theta_tilde_prime(self, s):
        """(X'Z - Z'X)/rho^2: d/ds of the mixing angle in s-time."""
        x, z = self.X.value(s), self.Z.value(s)
        xp, zp = self.X.derivative_value(s), self.Z.derivative_value(s)
        return (xp * z - zp * x) / (x * x + z * z)

    def check_gap(self, samples: int = 201) -> float:
        """Smallest rho^2 on a real grid; errors if not positive."""
        grid = np.linspace(self.s_domain[0], self.s_domain[1], samples)
        vals = np.array([self.rho_squared(float(s)).real for s in grid])
        if vals.min() <= 0.0:
            raise AssumptionError("rho^2 is not strictly positive on the real domain")
        return float(vals.min())


# -- contour integration of 2 rho ------------------------------------------


class _BranchTracker:
    """Continuous square root of rho^2 along a point sequence."""

    def __init__(self, start_value: complex):
        if start_value.real <= 0:
            raise NumericError("branch tracking must start where rho^2 > 0")
        self.w = cmath.sqrt(start_value)

    def root(self, rho2: complex) -> complex:
        w = cmath.sqrt(rho2)
        if abs(w - self.w) > abs(w + self.w):
            w = -w
        if w != 0.0:
            self.w = w
        return w


def _tail_substitution_exponent(cp: CriticalPoint) -> float:
    """q = 2/(p+2) with p = 2m+n flattens |s-s0|^(p/2) under s = b - d*v^q."""
    p = 2 * cp.m + cp.n
    return 2.0 / (p + 2.0)


def natural_time(h: XZHamiltonian, s: float) -> float:
    """tau(s) = 2 int_{s_r}^s rho(u) du on the real axis."""
    lo, hi = h.s_domain
    if not (lo <= s <= hi):
        raise DomainError(f"s={s} outside domain {h.s_domain}")
    if s == h.s_r:
        return 0.0
    val = complex_natural_time(h, complex(s, 0.0))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val)):
        raise NumericError("real natural time came out complex")
    return val.real


def complex_natural_time(h: XZHamiltonian, s_target: complex,
                         path: list | None = None) -> complex:
    """Contour integral 2 int sqrt(rho^2) along a polyline from s_r.

    The branch of the square root is tracked by continuity from the real
    starting point.  The final segment may end at a critical point of
    rho^2 (integrable endpoint singularity handled by geometric panel
    grading); the path must not pass through any other critical point.
    """
    if path is None:
        path = [complex(h.s_r), complex(s_target)]
    else:
        path = [complex(p) for p in path]
        if path[0] != complex(h.s_r):
            path = [complex(h.s_r)] + path
        if path[-1] != complex(s_target):
            path = path + [complex(s_target)]

    crit = [complex(cp.s0) for cp in h.critical_points]
    for a, b in zip(path[:-1], path[1:]):
        seg_len = abs(b - a)
        if seg_len == 0.0:
            continue
        for c in crit:
            if c == b:
                continue  # allowed endpoint
            # distance from c to segment [a, b]
            tproj = ((c - a) / (b - a)).real
            tproj = min(max(tproj, 0.0), 1.0)
            if abs(a + tproj * (b - a) - c) < 1e-12 * max(1.0, seg_len):
                raise GeometryError(f"path passes through critical point {c}")

    tracker = _BranchTracker(complex(h.rho_squared(complex(h.s_r))))
    total = 0.0 + 0.0j
    for a, b in zip(path[:-1], path[1:]):
        if a == b:
            continue
        end_cp = next((cp for cp in h.critical_points
                       if abs(complex(cp.s0) - b) == 0.0), None)
        if end_cp is None:
            total += _integrate_panels(h, tracker, a, b, 24)
        else:
            mid = a + 0.5 * (b - a)
            total += _integrate_panels(h, tracker, a, mid, 16)
            total += _integrate_singular_tail(h, tracker, mid, b, end_cp)
    return total


def _integrate_panels(h, tracker, a: complex, b: complex, panels: int) -> complex:
    nodes16, weights16 = _gl16()
    total = 0.0 + 0.0j
    for lo_f, hi_f in zip(np.linspace(0, 1, panels + 1)[:-1],
                          np.linspace(0, 1, panels + 1)[1:]):
        pa, pb = a + lo_f * (b - a), a + hi_f * (b - a)
        half, mid = 0.5 * (pb - pa), 0.5 * (pa + pb)
        acc = 0.0 + 0.0j
        for xi, wi in zip(nodes16, weights16):
            u = mid + half * xi
            r2 = complex(h.rho_squared(u))
            if r2 == 0.0:
                raise GeometryError(f"rho^2 vanishes on the path at {u}")
            acc += wi * tracker.root(r2)
        total += 2.0 * half * acc
    return total


def _integrate_singular_tail(h, tracker, start: complex, b: complex,
                             cp: CriticalPoint) -> complex:
    """int_start^b 2 sqrt(rho^2) ds into the critical endpoint b.

    Substituting s = b - (b-start) v^q with q = 2/(2m+n+2) makes the
    integrand bounded; geometric grading in v towards 0 then resolves the
    residual fractional powers.  The sub-float leftover below v ~ 1e-14
    contributes O(1e-14) of the segment and is dropped.
    """
    q = _tail_substitution_exponent(cp)
    d = b - start
    nodes16, weights16 = _gl16()
    # panels in v: [2^-(k+1), 2^-k], traversed from v=1 downwards so the
    # branch tracker walks continuously into the singularity
    total = 0.0 + 0.0j
    for k in range(0, 48):
        v_hi, v_lo = 0.5**k, 0.5 ** (k + 1)
        half, mid = 0.5 * (v_lo - v_hi), 0.5 * (v_lo + v_hi)  # descending
        acc = 0.0 + 0.0j
        for xi, wi in zip(nodes16, weights16):
            v = mid + half * xi
            s = b - d * v**q
            if s == b:
                continue  # float-collapsed node; integrand -> 0 here
            r2 = complex(h.rho_squared(s))
            if r2 == 0.0:
                continue
            # ds = q v^(q-1) (-d) dv, and we traverse dv < 0
            acc += wi * tracker.root(r2) * q * v ** (q - 1.0)
        total += 2.0 * (-half) * d * acc
    return total


# -- singularity extraction --------------------------------------------------


def _verify_local_form(h: XZHamiltonian, cp: CriticalPoint, tol: float = 0.10):
    """Fit |rho^2| ~ 2K |s-s0|^(2m+n) on two small circles around s0."""
    p_true = 2 * cp.m + cp.n
    scale = max(abs(complex(cp.s0) - h.s_r), 0.1)
    r1 = 1e-2 * scale
    r2 = 0.5 * r1
    angles = np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False)

    def mean_log_mod(r):
        vals = []
        for a in angles:
            s = complex(cp.s0) + r * cmath.exp(1j * a)
            m = abs(h.rho_squared(s))
            if m == 0.0:
                raise AssumptionError("rho^2 vanishes off the declared critical point")
            vals.append(math.log(m))
        return float(np.mean(vals))

    l1, l2 = mean_log_mod(r1), mean_log_mod(r2)
    p_hat = (l1 - l2) / (math.log(r1) - math.log(r2))
    if p_true != 0 and abs(p_hat - p_true) > tol * max(1.0, abs(p_true)):
        raise AssumptionError(
            f"declared exponent 2m+n={p_true} but local fit gives {p_hat:.3f}"
        )
    k_declared = cp.strength
    if k_declared is not None:
        k_hat = 0.5 * math.exp(l1 - p_true * math.log(r1))
        if abs(k_hat - k_declared) > tol * k_declared:
            raise AssumptionError(
                f"declared strength K={k_declared:.6g} but local fit gives {k_hat:.6g}"
            )


def _verify_gamma(h: XZHamiltonian, cp: CriticalPoint, t0: complex,
                  gamma: float, path=None, tol: float = 0.10):
    """Residue probe: gamma ~ Re[i (t - t0) theta'(t)] for t near t0."""
    s0 = complex(cp.s0)
    start = complex(h.s_r)
    if path is None:
        direction = (s0 - start) / abs(s0 - start)
    else:
        direction = (s0 - complex(path[-2])) / abs(s0 - complex(path[-2]))
    probes = []
    for frac in (1e-2, 5e-3):
        s = s0 - frac * abs(s0 - start) * direction
        t = complex_natural_time(h, s, path=path)
        x, z = h.X.value(s), h.Z.value(s)
        xp, zp = h.X.derivative_value(s), h.Z.derivative_value(s)
        rho2 = x * x + z * z
        # branch of rho^3: track along the straight path from s_r
        steps = 200
        tracker = _BranchTracker(complex(h.rho_squared(start)))
        pts = ([start + u * (s - start) for u in np.linspace(0, 1, steps)]
               if path is None else _polyline_points(path[:-1] + [s], steps))
        for p in pts[1:]:
            w = tracker.root(complex(h.rho_squared(p)))
        rho = tracker.w
        theta_prime = (xp * z - zp * x) / (2.0 * rho**3)
        probes.append((1j * (t - t0) * theta_prime).real)
    # theta' ~ -i gamma/(t - t0) near the upper pole, +i gamma/(t - t0)
    # near its conjugate, so the probe reads gamma * sign(Im t0)
    hemisphere = 1.0 if t0.imag > 0 else -1.0
    g_hat = probes[-1] * hemisphere
    if abs(g_hat - gamma) > tol * max(abs(gamma), 1e-12):
        raise AssumptionError(
            f"declared gamma={gamma:.6g} but residue probe gives {g_hat:.6g} "
            f"(coarser probe {probes[0]:.6g})"
        )


def _polyline_points(path, steps_per_seg):
    pts = [complex(path[0])]
    for a, b in zip(path[:-1], path[1:]):
        seg = [complex(a) + u * (complex(b) - complex(a))
               for u in np.linspace(0, 1, steps_per_seg)[1:]]
        pts.extend(seg)
    return pts


def extract_singularity_data(h: XZHamiltonian, cp: CriticalPoint,
                             alpha_floor: float | None = None,
                             path: list | None = None,
                             verify: bool = True) -> SingularityData:
    """Map a declared critical point to (t_r, t_c, gamma, alpha).

    gamma = gamma_sign * n/(2m+n+2); alpha = (2m+n)/(2m+n+2), raised to
    alpha_floor if a larger index is wanted, and clamped inside (0,1).
    """
    if cp not in h.critical_points:
        raise UsageError("critical point is not declared on this Hamiltonian")
    denom = 2 * cp.m + cp.n + 2
    gamma = cp.gamma_sign * cp.n / denom
    alpha = (2 * cp.m + cp.n) / denom
    if alpha_floor is not None:
        alpha = max(alpha, alpha_floor)
    alpha = min(max(alpha, 1e-6), 1.0 - 1e-9)
    if verify:
        _verify_local_form(h, cp)
    t0 = complex_natural_time(h, complex(cp.s0), path=path)
    if verify:
        _verify_gamma(h, cp, t0, gamma, path=path)
    t_c = abs(t0.imag)
    if t_c == 0.0:
        raise AssumptionError("critical point maps to the real axis (t_c = 0)")
    return SingularityData(
        t0=t0,
        t_r=t0.real,
        t_c=t_c,
        gamma=gamma,
        alpha=alpha,
        radius=abs(t0),
    )


# -- series composition / reversion -----------------------------------------


def series_compose(outer: Jet, inner: Jet) -> Jet:
    """outer(inner(dt)) where inner's constant term is outer's base offset.

    outer holds coefficients in (s - s0); inner must satisfy
    inner.value == s0.  Returns a jet at inner.base_point.
    """
    shifted = inner - inner.coefficient(0)
    order = min(outer.order, inner.order)
    shifted = shifted.truncate(order)
    acc = Jet.constant(inner.base_point, outer.coeffs[order],
                       order, EXTENDED if inner.is_extended else DOUBLE)
    for k in range(order - 1, -1, -1):
        acc = acc * shifted + outer.coeffs[k]
    return acc


def series_invert(tau_jet: Jet) -> Jet:
    """Compositional inverse of t = tau(s) about the base point.

    tau_jet holds tau's coefficients at s0; the result holds s(t)'s
    coefficients at t0 = tau(s0) (constant term s0).  Requires a nonzero
    linear coefficient.  Newton iteration on the series, run first in
    double, then polished with one extended step if tau_jet is extended.
    """
    order = tau_jet.order
    t0 = tau_jet.coefficient(0)
    if abs(t0.imag) > 1e-9:
        raise UsageError("series_invert expects a real expansion of tau")
    b1 = tau_jet.coefficient(1)
    if b1 == 0:
        raise UsageError("tau' vanishes; series not invertible")

    def newton(b: Jet, a: Jet) -> Jet:
        # a <- a - (b(a) - id)/b'(a), all series with zero constant term
        ident = Jet.variable(0.0, order, EXTENDED if b.is_extended else DOUBLE)
        resid = series_compose(b, a) - ident
        deriv = series_compose(b.derivative(), a)
        return a - jet_div(resid, deriv)

    # work in double precision first
    bd = Jet(0.0, tau_jet.to_double().coeffs.copy())
    bd.coeffs[0] = 0.0
    ad = Jet(0.0, np.zeros(order + 1, dtype=np.complex128))
    ad.coeffs[1] = 1.0 / complex(b1)
    for _ in range(int(math.ceil(math.log2(max(order, 2)))) + 2):
        ad = newton(bd, ad)

    if tau_jet.is_extended:
        be = Jet(0.0, tau_jet.coeffs.copy())
        be.coeffs[0] = as_cd_scalar(0.0)
        ae = ad.to_extended()
        ae = newton(be, ae)
        ae = newton(be, ae)
        out = ae
    else:
        out = ad
    coeffs = out.coeffs.copy()
    coeffs[0] = coeffs[0] + _like(coeffs, tau_jet.base_point)
    return Jet(t0.real, coeffs)


def _like(coeffs, value):
    return as_cd_scalar(value) if isinstance(coeffs, CD) else np.complex128(value)


# -- reparametrized theta' model ---------------------------------------------


class ReparametrizedModel:
    """theta'(t) for an (X, Z) Hamiltonian in natural time.

    A dense monotone table of tau over the real s-domain supports fast
    inversion (monotone cubic interpolation plus Newton polish against
    panel-local quadrature); jets of theta' in t come from composing the
    s-jet of (X'Z - Z'X)/(2 rho^3) with the inverse-series of the tau jet.
    """

    def __init__(self, h: XZHamiltonian, table_points: int = 2001,
                 alpha_floor: float | None = None, verify: bool = True,
                 primary_index: int = 0):
        h.check_gap()
        self.h = h
        self.singularities = tuple(
            extract_singularity_data(h, cp, alpha_floor=alpha_floor, verify=verify)
            for cp in h.critical_points
        )
        self._build_table(table_points)
        if self.singularities:
            self.primary = self.singularities[primary_index]
            self.t_r = self.primary.t_r
        else:
            self.primary = None
            self.t_r = 0.0
        self.anchor_value = 0.0

    # table ----------------------------------------------------------------
    def _build_table(self, points: int):
        lo, hi = self.h.s_domain
        s_grid = np.linspace(lo, hi, points)
        nodes16, weights16 = _gl16()
        taus = np.zeros(points)
        # cumulative panel-wise Gauss integration of 2 rho along the real axis
        rho_of = lambda u: math.sqrt(self.h.rho_squared(complex(u)).real)
        idx0 = int(np.argmin(np.abs(s_grid - self.h.s_r)))
        for i in range(idx0 + 1, points):
            a, b = s_grid[i - 1], s_grid[i]
            half, mid = 0.5 * (b - a), 0.5 * (a + b)
            taus[i] = taus[i - 1] + 2.0 * half * sum(
                w * rho_of(mid + half * x) for x, w in zip(nodes16, weights16)
            )
        for i in range(idx0 - 1, -1, -1):
            a, b = s_grid[i], s_grid[i + 1]
            half, mid = 0.5 * (b - a), 0.5 * (a + b)
            taus[i] = taus[i + 1] - 2.0 * half * sum(
                w * rho_of(mid + half * x) for x, w in zip(nodes16, weights16)
            )
        offset = float(np.interp(self.h.s_r, s_grid, taus))
        taus -= offset
        if not np.all(np.diff(taus) > 0):
            raise NumericError("tau table is not strictly increasing")
        self._s_grid = s_grid
        self._tau_grid = taus
        self._s_of_t = PchipInterpolator(taus, s_grid)
        # continuous mixing angle theta~(s) on the table for theta(t)
        raw = np.array([
            math.atan2(self.h.X.value(complex(s)).real, self.h.Z.value(complex(s)).real)
            for s in s_grid
        ])
        self._theta_grid = np.unwrap(raw)

    @property
    def domain(self):
        return (float(self._tau_grid[0]), float(self._tau_grid[-1]))

    def tau(self, s: float) -> float:
        """tau(s) via nearest table node plus panel-local Gauss quadrature."""
        lo, hi = self.h.s_domain
        if not (lo <= s <= hi):
            raise DomainError(f"s={s} outside domain {self.h.s_domain}")
        i = int(np.argmin(np.abs(self._s_grid - s)))
        a = self._s_grid[i]
        nodes16, weights16 = _gl16()
        half, mid = 0.5 * (s - a), 0.5 * (s + a)
        extra = 2.0 * half * sum(
            w * math.sqrt(self.h.rho_squared(complex(mid + half * x)).real)
            for x, w in zip(nodes16, weights16)
        ) if s != a else 0.0
        return float(self._tau_grid[i] + extra)

    def tau_inverse(self, t: float) -> float:
        lo, hi = self.domain
        if not (lo <= t <= hi):
            raise DomainError(f"t={t} outside natural-time domain {self.domain}")
        s = float(self._s_of_t(t))
        for _ in range(3):  # Newton polish: tau' = 2 rho > 0
            resid = self.tau(s) - t
            rho = math.sqrt(self.h.rho_squared(complex(s)).real)
            s -= resid / (2.0 * rho)
        return s

    # theta'(t) jets ---------------------------------------------------------
    def theta_prime_jet(self, t: float, order: int, precision: str = DOUBLE) -> Jet:
        s = self.tau_inverse(t)
        work = order + 2
        Xj = self.h.X.jet(s, work, precision)
        Zj = self.h.Z.jet(s, work, precision)
        num = Xj.derivative() * Zj - Zj.derivative() * Xj
        rho2 = Xj * Xj + Zj * Zj
        F = jet_div(num, jet_pow(rho2, 1.5) * 2.0)
        rho = jet_pow(rho2, 0.5)
        tau_jet = (rho * 2.0).antiderivative(t)  # tau(s)-expansion about s, value t
        inv = series_invert(tau_jet)             # s(t)-expansion about t
        out = series_compose(F, inv)
        return out.truncate(order)

    # angles -----------------------------------------------------------------
    def theta_angle(self, t: float) -> float:
        s = self.tau_inverse(t)
        i = int(np.argmin(np.abs(self._s_grid - s)))
        raw = math.atan2(self.h.X.value(complex(s)).real,
                         self.h.Z.value(complex(s)).real)
        k = round((self._theta_grid[i] - raw) / (2.0 * math.pi))
        theta_s = raw + 2.0 * math.pi * k
        anchor_s = self.tau_inverse(self.t_r)
        i0 = int(np.argmin(np.abs(self._s_grid - anchor_s)))
        raw0 = math.atan2(self.h.X.value(complex(anchor_s)).real,
                          self.h.Z.value(complex(anchor_s)).real)
        k0 = round((self._theta_grid[i0] - raw0) / (2.0 * math.pi))
        theta_anchor = raw0 + 2.0 * math.pi * k0
        return self.anchor_value + theta_s - theta_anchor

    def cos_sin_theta(self, t: float) -> tuple[float, float]:
        s = self.tau_inverse(t)
        x = self.h.X.value(complex(s)).real
        z = self.h.Z.value(complex(s)).real
        rho = math.hypot(x, z)
        return z / rho, x / rho

    def hamiltonian(self, t: float) -> np.ndarray:
        c, s = self.cos_sin_theta(t)
        return 0.5 * np.array([[c, s], [s, -c]])


# -- factories ---------------------------------------------------------------


def landau_zener(delta: float = 1.0, s_domain: tuple = (-6.0, 6.0)) -> XZHamiltonian:
    """X(s) = s, Z(s) = delta: the canonical avoided crossing.

    At s0 = +/- i delta: m=0, n=1, f = +/- i delta, g_X = -/+ i/delta,
    g_Z = 0, and gamma = +1/3 for the upper critical point.
    """
    if delta <= 0:
        raise UsageError("delta must be positive")
    cps = (
        CriticalPoint(s0=complex(0.0, delta), m=0, n=1, gamma_sign=1,
                      f0=complex(0.0, delta), gx0=complex(0.0, -1.0 / delta),
                      gz0=0.0),
        CriticalPoint(s0=complex(0.0, -delta), m=0, n=1, gamma_sign=1,
                      f0=complex(0.0, -delta), gx0=complex(0.0, 1.0 / delta),
                      gz0=0.0),
    )
    return XZHamiltonian(
        X=RationalFunction(num=(0.0, 1.0)),
        Z=RationalFunction(num=(delta,)),
        s_r=0.0,
        critical_points=cps,
        s_domain=s_domain,
        name=f"landau_zener(delta={delta})",
    )


def reparametrized_model_from_json(spec: dict) -> ReparametrizedModel:
    kind = spec.get("type")
    if kind == "landau_zener":
        dom = spec.get("s_domain", [-6.0, 6.0])
        h = landau_zener(float(spec.get("delta", 1.0)), s_domain=tuple(dom))
    elif kind == "rational_xz":
        def rf(d):
            num = [complex(c[0], c[1]) if isinstance(c, list) else complex(c)
                   for c in d["num"]]
            den = [complex(c[0], c[1]) if isinstance(c, list) else complex(c)
                   for c in d.get("den", [1.0])]
            return RationalFunction(num=tuple(num), den=tuple(den))

        cps = tuple(
            CriticalPoint(
                s0=complex(c["s0"][0], c["s0"][1]),
                m=int(c.get("m", 0)),
                n=int(c.get("n", 1)),
                gamma_sign=int(c.get("sign", 1)),
                f0=complex(c["f0"][0], c["f0"][1]) if "f0" in c else None,
                gx0=complex(c["gx0"][0], c["gx0"][1]) if "gx0" in c else None,
                gz0=complex(c["gz0"][0], c["gz0"][1]) if "gz0" in c else None,
            )
            for c in spec.get("critical_points", [])
        )
        h = XZHamiltonian(
            X=rf(spec["X"]), Z=rf(spec["Z"]),
            s_r=float(spec.get("s_r", 0.0)),
            critical_points=cps,
            s_domain=tuple(spec.get("s_domain", [-8.0, 8.0])),
        )
    else:
        raise UsageError(f"unknown reparametrized model type: {kind!r}")
    return ReparametrizedModel(
        h,
        table_points=int(spec.get("table_points", 2001)),
        alpha_floor=spec.get("alpha_floor"),
        verify=bool(spec.get("verify", True)),
    )
