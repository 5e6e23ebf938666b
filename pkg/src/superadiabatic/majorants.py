"""The scalar majorant recursion controlling the coefficient growth.

With r = ||theta'||_1, the sequences

    C_1 = r/2, D_1 = 0,
    C_n = C_{n-1}                     (n even)
    C_n = C_{n-1} + r D_{n-1}/(n-1)   (n odd)
    D_n = sum_{k=1}^{n-1} B(k, n-k) (C_k C_{n-k} + D_k D_{n-k})   (n even)
    D_n = 0                                                        (n odd)

majorize ||x_n||, ||z_n|| by C_n and ||y_n|| by D_n.  This module
evaluates the recursion exactly (compensated double summation below
n = 60, mpmath above), checks the closed bound

    D_n <= (1/(n-1)) sum_{j<=n/2} r^(2j) M^j / j!     (M >= 42),

searches for the smallest workable M, and cross-checks the expanded
four-term form of the D-recursion obtained by substituting the closed
C-from-D identity (a structural test of that algebra).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import UsageError
from .norms import log_beta

_EXTENDED_FROM = 60
_MP_DPS = 40


@dataclass
class BoundSequence:
    theta_norm: float
    max_n: int
    C: np.ndarray              # index 0 unused
    D: np.ndarray
    extended: bool

    def identity_defect(self) -> float:
        """Max relative defect of C_n = r (1/2 + sum_{j=2}^{n-1} D_j/j)."""
        r = self.theta_norm
        worst = 0.0
        acc = 0.5
        for n in range(2, self.max_n + 1):
            # acc = 1/2 + sum_{j=2}^{n-1} D_j/j after the update below
            closed = r * acc
            worst = max(worst, abs(closed - self.C[n]) / self.C[n])
            acc += self.D[n] / n
        return worst


def build_bound_sequence(theta_norm: float, max_n: int) -> BoundSequence:
    if theta_norm <= 0:
        raise UsageError("theta_norm must be positive")
    if max_n < 2:
        raise UsageError("need max_n >= 2")
    extended = max_n > _EXTENDED_FROM
    if extended:
        with mpmath.workdps(_MP_DPS):
            r = mpmath.mpf(theta_norm)
            C = [mpmath.mpf(0)] * (max_n + 1)
            D = [mpmath.mpf(0)] * (max_n + 1)
            C[1] = r / 2
            for n in range(2, max_n + 1):
                if n % 2 == 0:
                    C[n] = C[n - 1]
                    D[n] = mpmath.fsum(
                        mpmath.beta(k, n - k) * (C[k] * C[n - k] + D[k] * D[n - k])
                        for k in range(1, n)
                    )
                else:
                    C[n] = C[n - 1] + r * D[n - 1] / (n - 1)
            Cf = np.array([float(c) for c in C])
            Df = np.array([float(d) for d in D])
    else:
        r = theta_norm
        C = np.zeros(max_n + 1)
        D = np.zeros(max_n + 1)
        C[1] = r / 2.0
        for n in range(2, max_n + 1):
            if n % 2 == 0:
                C[n] = C[n - 1]
                terms = [
                    math.exp(log_beta(k, n - k)) * (C[k] * C[n - k] + D[k] * D[n - k])
                    for k in range(1, n)
                ]
                D[n] = math.fsum(terms)
            else:
                C[n] = C[n - 1] + r * D[n - 1] / (n - 1)
        Cf, Df = C, D
    return BoundSequence(theta_norm=theta_norm, max_n=max_n, C=Cf, D=Df,
                         extended=extended)


def lemma_bound_rhs(theta_norm: float, M: float, n: int) -> float:
    """(1/(n-1)) sum_{j=1}^{n/2} theta_norm^(2j) M^j / j!  (log-safe)."""
    r2M = theta_norm * theta_norm * M
    terms = []
    for j in range(1, n // 2 + 1):
        terms.append(math.exp(j * math.log(r2M) - math.lgamma(j + 1))
                     if r2M > 0 else 0.0)
    return math.fsum(terms) / (n - 1)


@dataclass
class LemmaRow:
    n: int
    D_n: float
    rhs: float
    holds: bool
    slack: float               # rhs / D_n


def check_lemma_bound(seq: BoundSequence, M: float) -> list[LemmaRow]:
    if M <= 0:
        raise UsageError("M must be positive")
    rows = []
    for n in range(2, seq.max_n + 1, 2):
        rhs = lemma_bound_rhs(seq.theta_norm, M, n)
        dn = float(seq.D[n])
        rows.append(LemmaRow(n=n, D_n=dn, rhs=rhs, holds=dn <= rhs * (1 + 1e-12),
                             slack=rhs / dn if dn > 0 else math.inf))
    return rows


def minimal_M_search(theta_norm: float, max_n: int, tolerance: float = 1e-3,
                     seq: BoundSequence | None = None) -> float:
    """Bisect for the smallest M making the closed bound hold for all even
    n <= max_n.  The guaranteed value 42 is the upper bracket."""
    if seq is None:
        seq = build_bound_sequence(theta_norm, max_n)

    def ok(M):
        return all(row.holds for row in check_lemma_bound(seq, M))

    hi = 42.0
    if not ok(hi):  # cannot happen per the closed bound; defensive
        return math.inf
    lo = 1e-6
    if ok(lo):
        return lo
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def expanded_d_recursion(theta_norm: float, max_n: int) -> np.ndarray:
    """D_n recomputed from the four-line expanded form

        D_n = (r^2/4) sum B(k,n-k)
            + (r^2/2) sum B(k,n-k) (S_k + S_{n-k})
            +  r^2    sum B(k,n-k) S_k S_{n-k}
            +         sum B(k,n-k) D_k D_{n-k},      S_m = sum_{j<m} D_j/j,

    which substitutes the closed C-from-D identity into the D-recursion."""
    r2 = theta_norm * theta_norm
    D = np.zeros(max_n + 1)
    S = np.zeros(max_n + 2)  # S[m] = sum_{j=1}^{m-1} D_j / j
    for n in range(2, max_n + 1):
        S[n] = S[n - 1] + (D[n - 1] / (n - 1) if n >= 2 else 0.0)
        if n % 2 == 1:
            continue
        b = [math.exp(log_beta(k, n - k)) for k in range(1, n)]
        line1 = 0.25 * r2 * math.fsum(b)
        line2 = 0.5 * r2 * math.fsum(
            bk * (S[k] + S[n - k]) for bk, k in zip(b, range(1, n))
        )
        line3 = r2 * math.fsum(
            bk * S[k] * S[n - k] for bk, k in zip(b, range(1, n))
        )
        line4 = math.fsum(
            math.exp(log_beta(k, n - k)) * D[k] * D[n - k] for k in range(2, n - 1)
        ) if n >= 4 else 0.0
        D[n] = line1 + line2 + line3 + line4
    return D


def theorem_closure_bounds(seq: BoundSequence) -> dict:
    """The closed consequences: C_n <= r (e^{42 r^2} - 1/2) and
    D_n <= (e^{42 r^2} - 1)/(n-1); returns the worst observed slacks."""
    r = seq.theta_norm
    g = 42.0 * r * r
    # log-safe right-hand sides
    log_c_rhs = math.log(r) + g + math.log1p(-0.5 * math.exp(-g))
    log_d_base = g + math.log1p(-math.exp(-g))
    worst_c = math.inf
    worst_d = math.inf
    ok = True
    for n in range(1, seq.max_n + 1):
        c = float(seq.C[n])
        if c > 0:
            slack = math.exp(log_c_rhs - math.log(c))
            worst_c = min(worst_c, slack)
            ok = ok and slack >= 1.0 - 1e-12
        if n % 2 == 0:
            d = float(seq.D[n])
            if d > 0:
                slack = math.exp(log_d_base - math.log(n - 1) - math.log(d))
                worst_d = min(worst_d, slack)
                ok = ok and slack >= 1.0 - 1e-12
    return {"holds": ok, "worst_C_slack": worst_c, "worst_D_slack": worst_d}
