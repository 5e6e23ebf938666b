"""Vectorized double-double ("dd") arithmetic.

A dd number stores an unevaluated sum hi + lo of two IEEE doubles with
|lo| <= 0.5 ulp(hi), giving about 31-32 significant decimal digits.  The
arrays here hold component-wise dd values so that whole coefficient
vectors can be processed with numpy at once; all rounding-error bookkeeping
uses the classic Dekker/Knuth error-free transformations.  numpy has no
fused multiply-add ufunc, so products always go through the Dekker split.

Transcendental seeds (exp, atan, non-integer powers) are delegated to
mpmath at 42 digits and split back into hi/lo parts; only O(1) of those
calls happen per jet, so the pure-Python cost is irrelevant.
"""

from __future__ import annotations

import numbers

import mpmath
import numpy as np

_SPLITTER = 134217729.0  # 2^27 + 1
_MP_DPS = 42


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    # requires |a| >= |b| componentwise
    s = a + b
    err = b - (s - a)
    return s, err


def _split(a):
    c = _SPLITTER * a
    big = c - a
    hi = c - big
    lo = a - hi
    return hi, lo


def _two_prod(a, b):
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


class DD:
    """Array of real double-double numbers."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi, lo=None):
        hi = np.asarray(hi, dtype=np.float64)
        if lo is None:
            lo = np.zeros_like(hi)
        else:
            lo = np.asarray(lo, dtype=np.float64)
            if lo.shape != hi.shape:
                lo = np.broadcast_to(lo, hi.shape).copy()
        self.hi = hi
        self.lo = lo

    # -- construction -------------------------------------------------
    @classmethod
    def zeros(cls, shape):
        return cls(np.zeros(shape), np.zeros(shape))

    @classmethod
    def from_float(cls, x):
        return cls(np.asarray(x, dtype=np.float64))

    @classmethod
    def from_mp(cls, values):
        """Split mpmath value(s) exactly into hi + lo."""
        if not isinstance(values, (list, tuple, np.ndarray)):
            values = [values]
            scalar = True
        else:
            scalar = False
        his, los = [], []
        with mpmath.workdps(_MP_DPS):
            for v in values:
                v = mpmath.mpf(v) if not isinstance(v, mpmath.mpf) else v
                hi = float(v)
                los.append(float(v - hi))
                his.append(hi)
        out = cls(np.array(his), np.array(los))
        if scalar:
            return cls(out.hi.reshape(()), out.lo.reshape(()))
        return out

    # -- shape plumbing ------------------------------------------------
    @property
    def shape(self):
        return self.hi.shape

    def __len__(self):
        return self.hi.shape[0]

    def __getitem__(self, idx):
        return DD(self.hi[idx], self.lo[idx])

    def __setitem__(self, idx, value):
        if not isinstance(value, DD):
            value = DD.from_float(value)
        self.hi[idx] = value.hi
        self.lo[idx] = value.lo

    def copy(self):
        return DD(self.hi.copy(), self.lo.copy())

    # -- arithmetic ----------------------------------------------------
    def __neg__(self):
        return DD(-self.hi, -self.lo)

    def __add__(self, other):
        if isinstance(other, DD):
            s, e = _two_sum(self.hi, other.hi)
            t, f = _two_sum(self.lo, other.lo)
            e = e + t
            s, e = _quick_two_sum(s, e)
            e = e + f
            hi, lo = _quick_two_sum(s, e)
            return DD(hi, lo)
        if isinstance(other, (numbers.Real, np.ndarray)):
            s, e = _two_sum(self.hi, np.asarray(other, dtype=np.float64))
            e = e + self.lo
            hi, lo = _quick_two_sum(s, e)
            return DD(hi, lo)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DD):
            return self + (-other)
        if isinstance(other, (numbers.Real, np.ndarray)):
            return self + (-np.asarray(other, dtype=np.float64))
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, DD):
            p, e = _two_prod(self.hi, other.hi)
            e = e + (self.hi * other.lo + self.lo * other.hi)
            hi, lo = _quick_two_sum(p, e)
            return DD(hi, lo)
        if isinstance(other, (numbers.Real, np.ndarray)):
            b = np.asarray(other, dtype=np.float64)
            p, e = _two_prod(self.hi, b)
            e = e + self.lo * b
            hi, lo = _quick_two_sum(p, e)
            return DD(hi, lo)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (numbers.Real, np.ndarray)):
            other = DD.from_float(np.broadcast_to(np.asarray(other, dtype=np.float64), self.shape))
        if not isinstance(other, DD):
            return NotImplemented
        q1 = self.hi / other.hi
        r = self - other * q1
        q2 = r.hi / other.hi
        r = r - other * q2
        q3 = r.hi / other.hi
        s, e = _quick_two_sum(q1, q2)
        e = e + q3
        hi, lo = _quick_two_sum(s, e)
        return DD(hi, lo)

    def __rtruediv__(self, other):
        return DD.from_float(np.broadcast_to(np.asarray(other, dtype=np.float64), self.shape)) / self

    # -- functions -----------------------------------------------------
    def sqrt(self):
        """Componentwise square root (entries must be >= 0)."""
        y = np.sqrt(self.hi)
        nz = y != 0.0
        ysafe = np.where(nz, y, 1.0)
        resid = self - DD(ysafe) * DD(ysafe)
        corr = resid / (2.0 * ysafe)
        out = DD(ysafe) + corr
        out.hi = np.where(nz, out.hi, 0.0)
        out.lo = np.where(nz, out.lo, 0.0)
        return out

    def abs(self):
        neg = self.hi < 0
        return DD(np.where(neg, -self.hi, self.hi), np.where(neg, -self.lo, self.lo))

    def sum(self):
        """Accurate reduction by pairwise dd halving."""
        acc = self if self.shape else DD(self.hi.reshape(1), self.lo.reshape(1))
        while len(acc) > 1:
            m = len(acc)
            if m % 2:
                head, tail = acc[: m - 1], acc[m - 1 :]
                acc = head[0::2] + head[1::2]
                acc = _concat(acc, tail)
            else:
                acc = acc[0::2] + acc[1::2]
        return acc[0]

    def to_float(self):
        return self.hi + self.lo

    def to_mp(self):
        with mpmath.workdps(_MP_DPS):
            flat_hi = np.atleast_1d(self.hi).ravel()
            flat_lo = np.atleast_1d(self.lo).ravel()
            vals = [mpmath.mpf(float(h)) + mpmath.mpf(float(l)) for h, l in zip(flat_hi, flat_lo)]
        if self.hi.shape == ():
            return vals[0]
        return vals

    def __repr__(self):
        return f"DD(hi={self.hi!r}, lo={self.lo!r})"


def _concat(a: DD, b: DD) -> DD:
    return DD(np.concatenate([np.atleast_1d(a.hi), np.atleast_1d(b.hi)]),
              np.concatenate([np.atleast_1d(a.lo), np.atleast_1d(b.lo)]))


class CD:
    """Array of complex double-double numbers (a DD pair)."""

    __slots__ = ("re", "im")

    def __init__(self, re: DD, im: DD | None = None):
        if not isinstance(re, DD):
            re = DD.from_float(re)
        if im is None:
            im = DD.zeros(re.shape)
        elif not isinstance(im, DD):
            im = DD.from_float(im)
        self.re = re
        self.im = im

    # -- construction -------------------------------------------------
    @classmethod
    def zeros(cls, shape):
        return cls(DD.zeros(shape), DD.zeros(shape))

    @classmethod
    def from_complex(cls, z):
        z = np.asarray(z, dtype=np.complex128)
        return cls(DD.from_float(z.real.copy()), DD.from_float(z.imag.copy()))

    @classmethod
    def from_mp(cls, z):
        """Exact split of an mpmath mpc/mpf scalar."""
        with mpmath.workdps(_MP_DPS):
            z = mpmath.mpc(z)
            return cls(DD.from_mp(z.real), DD.from_mp(z.imag))

    # -- shape plumbing ------------------------------------------------
    @property
    def shape(self):
        return self.re.shape

    def __len__(self):
        return len(self.re)

    def __getitem__(self, idx):
        return CD(self.re[idx], self.im[idx])

    def __setitem__(self, idx, value):
        value = as_cd_scalar(value) if not isinstance(value, CD) else value
        self.re[idx] = value.re
        self.im[idx] = value.im

    def copy(self):
        return CD(self.re.copy(), self.im.copy())

    # -- arithmetic ----------------------------------------------------
    def __neg__(self):
        return CD(-self.re, -self.im)

    def _coerce(self, other):
        if isinstance(other, CD):
            return other
        if isinstance(other, DD):
            return CD(other, DD.zeros(other.shape))
        if isinstance(other, numbers.Complex):
            return CD(DD.from_float(complex(other).real), DD.from_float(complex(other).imag))
        if isinstance(other, np.ndarray):
            return CD.from_complex(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CD(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CD(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (numbers.Real, DD)) or (
            isinstance(other, np.ndarray) and not np.iscomplexobj(other)
        ):
            return CD(self.re * other, self.im * other)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CD(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (numbers.Real, DD)) or (
            isinstance(other, np.ndarray) and not np.iscomplexobj(other)
        ):
            return CD(self.re / other, self.im / other)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        den = o.re * o.re + o.im * o.im
        num = self * o.conj()
        return CD(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return o / self

    # -- functions -----------------------------------------------------
    def conj(self):
        return CD(self.re.copy(), -self.im)

    def abs2(self) -> DD:
        return self.re * self.re + self.im * self.im

    def abs(self) -> DD:
        return self.abs2().sqrt()

    def sum(self):
        return CD(self.re.sum(), self.im.sum())

    def to_complex(self):
        return self.re.to_float() + 1j * self.im.to_float()

    def __repr__(self):
        return f"CD({self.to_complex()!r})"


def as_dd_scalar(x) -> DD:
    if isinstance(x, DD):
        return x
    if isinstance(x, mpmath.mpf):
        return DD.from_mp(x)
    return DD(np.float64(x))


def as_cd_scalar(z) -> CD:
    if isinstance(z, CD):
        return z
    if isinstance(z, DD):
        return CD(z, DD.zeros(z.shape))
    if isinstance(z, (mpmath.mpf, mpmath.mpc)):
        return CD.from_mp(z)
    z = complex(z)
    return CD(DD(np.float64(z.real)), DD(np.float64(z.imag)))


_SCATTER_CACHE: dict = {}


def _scatter_index(la: int, lb: int, out_len: int):
    """Flat target indices mapping the (j, k) product a_j b_k into column
    j + k of a (la, out_len) accumulation matrix, with the truncation mask."""
    key = (la, lb, out_len)
    hit = _SCATTER_CACHE.get(key)
    if hit is None:
        j = np.arange(la)[:, None]
        k = np.arange(lb)[None, :]
        mask = (j + k) < out_len
        pos = (j * out_len + j + k)[mask]
        hit = (mask, pos)
        if len(_SCATTER_CACHE) < 512:
            _SCATTER_CACHE[key] = hit
    return hit


def cd_convolve(a: CD, b: CD, out_len: int) -> CD:
    """Truncated Cauchy product of two CD coefficient vectors.

    One broadcast dd multiply builds all pairwise products, a cached masked
    scatter lays them on shifted rows, and a pairwise tree of dd additions
    collapses the rows (dd addition is accurate enough that the tree order
    does not matter at the 1e-32 level).
    """
    la = min(len(a), out_len)
    lb = min(len(b), out_len)
    if la == 0 or lb == 0:
        return CD.zeros(out_len)
    av = CD(DD(a.re.hi[:la, None], a.re.lo[:la, None]),
            DD(a.im.hi[:la, None], a.im.lo[:la, None]))
    bv = CD(DD(b.re.hi[None, :lb], b.re.lo[None, :lb]),
            DD(b.im.hi[None, :lb], b.im.lo[None, :lb]))
    prod = av * bv
    mask, pos = _scatter_index(la, lb, out_len)
    out = CD.zeros((la, out_len))
    for comp_out, comp_in in ((out.re, prod.re), (out.im, prod.im)):
        comp_out.hi.ravel()[pos] = comp_in.hi[mask]
        comp_out.lo.ravel()[pos] = comp_in.lo[mask]
    while out.shape[0] > 1:
        m = out.shape[0]
        h = m // 2
        folded = out[:h] + out[m - h:]
        if m % 2:
            mid = out[h:h + 1]
            folded = CD(
                DD(np.concatenate([folded.re.hi, mid.re.hi]),
                   np.concatenate([folded.re.lo, mid.re.lo])),
                DD(np.concatenate([folded.im.hi, mid.im.hi]),
                   np.concatenate([folded.im.lo, mid.im.lo])),
            )
        out = folded
    return out[0]


# -- mpmath-seeded scalar transcendentals -----------------------------


def _mp_of_dd(x: DD):
    return mpmath.mpf(float(np.asarray(x.hi))) + mpmath.mpf(float(np.asarray(x.lo)))


def _mp_of_cd(z: CD):
    return mpmath.mpc(_mp_of_dd(z.re), _mp_of_dd(z.im))


def dd_atan(x: DD) -> DD:
    with mpmath.workdps(_MP_DPS):
        return DD.from_mp(mpmath.atan(_mp_of_dd(x)))


def cd_exp(z: CD) -> CD:
    with mpmath.workdps(_MP_DPS):
        return CD.from_mp(mpmath.exp(_mp_of_cd(z)))


def cd_log(z: CD) -> CD:
    with mpmath.workdps(_MP_DPS):
        return CD.from_mp(mpmath.log(_mp_of_cd(z)))


def cd_pow(z: CD, p) -> CD:
    """Principal-branch z**p for scalar dd operands."""
    with mpmath.workdps(_MP_DPS):
        base = _mp_of_cd(z)
        if isinstance(p, DD):
            p = _mp_of_dd(p)
        return CD.from_mp(mpmath.power(base, p))
