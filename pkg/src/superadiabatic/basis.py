"""Superadiabatic projections, diagonalizing unitaries, and the optimal
coupling term.

The order-n projection is the matrix polynomial

    pi^(n)(t) = pi_0 + sum_{k=1}^n eps^k (x_k X + y_k Y + z_k Z)

in the basis X = [[0,-1],[1,0]], Y = -2H, Z = -Y'/theta', with pi_0 the
spectral projection of H onto its upper band.  Z is assembled from the
rotation closed form [[-sin theta, cos theta],[cos theta, sin theta]], so
nothing is singular where theta' vanishes.

The unitary U^n_eps(t) has the (phase-fixed) eigenvectors of pi^(n) as
rows and tends to the adiabatic rotation

    U_0(t) = [[cos(theta/2), sin(theta/2)], [-sin(theta/2), cos(theta/2)]]

as eps -> 0; each eigenvector's phase is fixed by aligning it against the
corresponding row of U_0, which keeps sweeps continuous.  In this
convention the effective off-diagonal element satisfies

    c^n_eps(t) = -eps^(n+1) (x_{n+1}(t) - z_{n+1}(t)) (1 + O(eps)),

the overall sign being tied to the recursion seed x_1 = -(i/2) theta'
(cross-checked numerically via the slope-1 residual fit in the tests).

Everything is computed on jets in t, so time derivatives of U come from
the jet arithmetic rather than finite differences; exponentially small
couplings are extracted in extended precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, UsageError
from .jets import (
    DOUBLE,
    EXTENDED,
    Jet,
    jet_exp,
    jet_reciprocal,
    jet_sqrt,
)
from .recursion import SuperadiabaticSequence, build_sequence
from .theta import jet_of_theta_prime

_GAP_FLOOR = 1e-6


# -- optimal truncation and the universal formula --------------------------


def optimal_truncation(epsilon: float, t_c: float) -> tuple[int, float]:
    """The even truncation index n_eps = t_c/eps - 1 + sigma_eps with
    0 <= sigma_eps < 2, and sigma_eps itself."""
    if epsilon <= 0 or t_c <= 0:
        raise UsageError("epsilon and t_c must be positive")
    x = t_c / epsilon - 1.0
    if abs(x - round(x)) < 1e-9:  # absorb float fuzz in t_c/eps
        x = float(round(x))
    n = 2 * math.ceil(x / 2.0)
    sigma = n - x
    if sigma >= 2.0:  # guard against ceil rounding at even integers
        n -= 2
        sigma -= 2.0
    return n, sigma


def universal_coupling(data, epsilon: float, t: float) -> complex:
    """Closed-form optimal coupling

        c_eps(t) = 2i sqrt(2 eps/(pi t_c)) sin(pi gamma/2) e^{-t_c/eps}
                   e^{-(t-t_r)^2/(2 eps t_c)}
                   cos((t-t_r)/eps - (t-t_r)^3/(3 eps t_c^2) + sigma_eps t/t_c).
    """
    if epsilon <= 0:
        raise UsageError("epsilon must be positive")
    t_c, t_r = data.t_c, data.t_r
    _, sigma = optimal_truncation(epsilon, t_c)
    u = t - t_r
    amp = 2.0 * math.sqrt(2.0 * epsilon / (math.pi * t_c)) * math.sin(
        math.pi * data.gamma / 2.0
    )
    envelope = math.exp(-t_c / epsilon - u * u / (2.0 * epsilon * t_c))
    phase = u / epsilon - u**3 / (3.0 * epsilon * t_c * t_c) + sigma * t / t_c
    return 1j * amp * envelope * math.cos(phase)


def universal_coupling_log_amplitude(data, epsilon: float) -> float:
    """log of the peak amplitude |c_eps(t_r)| (no cos/Gaussian factors)."""
    t_c = data.t_c
    return (
        math.log(2.0 * math.sqrt(2.0 * epsilon / (math.pi * t_c)))
        + math.log(abs(math.sin(math.pi * data.gamma / 2.0)))
        - t_c / epsilon
    )


# -- 2x2 matrices of jets ---------------------------------------------------


def _mat_mul(A, B):
    return [
        [A[i][0] * B[0][j] + A[i][1] * B[1][j] for j in range(2)]
        for i in range(2)
    ]


def _mat_add(A, B):
    return [[A[i][j] + B[i][j] for j in range(2)] for i in range(2)]


def _mat_sub(A, B):
    return [[A[i][j] - B[i][j] for j in range(2)] for i in range(2)]


def _mat_scale(A, s):
    return [[A[i][j] * s for j in range(2)] for i in range(2)]


def _mat_dagger(A):
    return [[A[j][i].conj() for j in range(2)] for i in range(2)]


def _mat_deriv(A):
    return [[A[i][j].derivative() for j in range(2)] for i in range(2)]


def _mat_value(A) -> np.ndarray:
    return np.array([[A[i][j].value for j in range(2)] for i in range(2)])


def _fro(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, "fro"))


# -- assembly ---------------------------------------------------------------


def _angle_value(model, t: float, precision: str):
    if precision == EXTENDED and hasattr(model, "theta_angle_extended"):
        return model.theta_angle_extended(t)
    return model.theta_angle(t)


def _frame_jets(model, t: float, order: int, precision: str):
    """Jets of cos(theta), sin(theta), cos(theta/2), sin(theta/2) at t."""
    th_prime = jet_of_theta_prime(model, t, order, precision)
    theta = th_prime.truncate(order - 1).antiderivative(_angle_value(model, t, precision))
    w = jet_exp(theta * 1j)
    wc = w.conj()
    cos_j, sin_j = (w + wc) * 0.5, (w - wc) * (-0.5j)
    h = jet_exp(theta * 0.5j)
    hc = h.conj()
    cos_h, sin_h = (h + hc) * 0.5, (h - hc) * (-0.5j)
    return th_prime, cos_j, sin_j, cos_h, sin_h


def _projection_jets(model, t: float, n: int, epsilon: float, precision: str,
                     seq: SuperadiabaticSequence | None = None, order: int = 4):
    """pi^(n)(t) as a 2x2 matrix of jets, plus the sequence used."""
    if seq is None:
        seq = build_sequence(model, t, max_n=max(n + 1, 1), precision=precision)
    if seq.max_n < n:
        raise UsageError(f"sequence only reaches n={seq.max_n}, need {n}")
    _, cos_j, sin_j, cos_h, sin_h = _frame_jets(model, t, order + 2, precision)
    half = 0.5
    Hm = [[cos_j * half, sin_j * half], [sin_j * half, cos_j * (-half)]]
    one = Jet.constant(t, 1.0, cos_j.order, precision)
    zero = one * 0.0
    Xm = [[zero, -one], [one, zero]]
    Ym = _mat_scale(Hm, -2.0)
    Zm = [[-sin_j, cos_j], [cos_j, sin_j]]
    # pi_0 = 1/2 + H
    pi = [[Hm[0][0] + 0.5, Hm[0][1] + 0.0], [Hm[1][0] + 0.0, Hm[1][1] + 0.5]]
    scale = 1.0
    for k in range(1, n + 1):
        scale *= epsilon
        xk, yk, zk = seq.x[k], seq.y[k], seq.z[k]
        term = _mat_add(
            _mat_add(_mat_scale(Xm, xk * scale), _mat_scale(Ym, yk * scale)),
            _mat_scale(Zm, zk * scale),
        )
        pi = _mat_add(pi, term)
    pi = [[pi[i][j].truncate(order) for j in range(2)] for i in range(2)]
    rotation = ([[cos_h, sin_h], [-sin_h, cos_h]], Hm)
    return pi, seq, rotation


def projection_at(model, t: float, n: int, epsilon: float,
                  precision: str = DOUBLE, seq=None) -> np.ndarray:
    """Numeric value of pi^(n)(t)."""
    pi, _, _ = _projection_jets(model, t, n, epsilon, precision, seq=seq)
    return _mat_value(pi)


def projection_defect(model, t: float, n: int, epsilon: float,
                      precision: str = DOUBLE, seq=None) -> float:
    """|| (pi^(n))^2 - pi^(n) ||_F evaluated at t."""
    pi, _, _ = _projection_jets(model, t, n, epsilon, precision, seq=seq)
    sq = _mat_mul(pi, pi)
    return _fro(_mat_value(_mat_sub(sq, pi)))


def commutator_defect(model, t: float, n: int, epsilon: float,
                      precision: str = DOUBLE, seq=None) -> float:
    """|| i eps d/dt pi^(n) - [H, pi^(n)] ||_F at t."""
    pi, seq, rotation = _projection_jets(model, t, n, epsilon, precision, seq=seq, order=5)
    _, Hm = rotation
    comm = _mat_sub(_mat_mul(Hm, pi), _mat_mul(pi, Hm))
    lhs = _mat_sub(_mat_scale(_mat_deriv(pi), 1j * epsilon), comm)
    return _fro(_mat_value(lhs))


# -- the unitary and the effective Hamiltonian ------------------------------


@dataclass
class UnitaryResult:
    matrix: np.ndarray          # U^n_eps(t) value
    jets: list                  # 2x2 jets (order >= 1)
    gap: float                  # lambda_+ - lambda_-
    adiabatic_matrix: np.ndarray  # U_0(t) value
    unitarity_defect: float
    sequence: SuperadiabaticSequence


def superadiabatic_unitary(model, t: float, n: int, epsilon: float,
                           precision: str = DOUBLE, seq=None,
                           order: int = 4) -> UnitaryResult:
    """Rows are the phase-fixed eigenvectors of pi^(n)(t), as jets in t."""
    pi, seq, rotation = _projection_jets(model, t, n, epsilon, precision,
                                         seq=seq, order=order)
    U0, _ = rotation
    a, d, b = pi[0][0], pi[1][1], pi[0][1]
    h = (a - d) * 0.5
    r2 = h * h + b * b.conj()
    gap_sq = r2.value.real
    if gap_sq < _GAP_FLOOR:
        raise NumericError(
            f"projection eigenvalues nearly degenerate (gap^2={gap_sq:.3e}); "
            "epsilon too large for this order"
        )
    r = jet_sqrt(r2)
    mean = (a + d) * 0.5
    lam_plus = mean.value.real + math.sqrt(gap_sq)
    lam_minus = mean.value.real - math.sqrt(gap_sq)
    if abs(lam_plus - 1.0) > 0.25 or abs(lam_minus) > 0.25:
        raise NumericError(
            f"projection spectrum {lam_minus:.3f}, {lam_plus:.3f} far from "
            "{0, 1}; epsilon too large for this order"
        )
    if h.value.real >= 0.0:
        vp = [h + r, b.conj()]
        vm = [-b, h + r]
    else:
        vp = [b, r - h]
        vm = [r - h, -b.conj()]

    rows = []
    for vec, target in ((vp, U0[0]), (vm, U0[1])):
        nrm = jet_reciprocal(jet_sqrt(vec[0] * vec[0].conj() + vec[1] * vec[1].conj()))
        v0, v1 = vec[0] * nrm, vec[1] * nrm
        w = target[0].conj() * v0 + target[1].conj() * v1
        wmag = w * w.conj()
        if wmag.value.real < 1e-12:
            raise NumericError("eigenvector phase alignment lost (frame flipped)")
        phase = w.conj() * jet_reciprocal(jet_sqrt(wmag))
        rows.append([v0.conj() * phase.conj(), v1.conj() * phase.conj()])
    U = rows
    Uval = _mat_value(U)
    defect = _fro(Uval @ Uval.conj().T - np.eye(2))
    return UnitaryResult(
        matrix=Uval,
        jets=U,
        gap=2.0 * math.sqrt(gap_sq),
        adiabatic_matrix=_mat_value(U0),
        unitarity_defect=defect,
        sequence=seq,
    )


@dataclass
class EffectiveHamiltonian:
    epsilon: float
    n: int
    t: float
    rho: float
    c: complex
    predicted_c: complex        # -eps^(n+1) (x_{n+1} - z_{n+1})
    unitary: np.ndarray
    trace_defect: float
    hermiticity_defect: float
    unitarity_defect: float
    gap: float


def effective_hamiltonian(model, t: float, n: int, epsilon: float,
                          precision: str = DOUBLE, seq=None) -> EffectiveHamiltonian:
    """H^n_eps(t) = U H U* + i eps U' U*, with rho on the diagonal and the
    coupling c^n_eps off the diagonal."""
    if seq is None:
        seq = build_sequence(model, t, max_n=n + 1, precision=precision)
    if seq.max_n < n + 1:
        raise UsageError("need the sequence up to n+1 to validate the coupling")
    ures = superadiabatic_unitary(model, t, n, epsilon, precision, seq=seq)
    U = ures.jets
    _, Hm = _projection_jets(model, t, 0, epsilon, precision, seq=seq)[2]
    Ud = _mat_dagger(U)
    first = _mat_mul(_mat_mul(U, Hm), Ud)
    second = _mat_scale(_mat_mul(_mat_deriv(U), Ud), 1j * epsilon)
    Hn = _mat_add(first, second)
    Hval = _mat_value(Hn)
    rho = float(Hval[0, 0].real)
    c = complex(Hval[0, 1])
    log_eps_pow = (n + 1) * math.log(epsilon)
    xv = seq.x[n + 1].value
    zv = seq.z[n + 1].value
    predicted = -math.exp(log_eps_pow) * (xv - zv)
    return EffectiveHamiltonian(
        epsilon=epsilon,
        n=n,
        t=t,
        rho=rho,
        c=c,
        predicted_c=predicted,
        unitary=ures.matrix,
        trace_defect=abs(Hval[0, 0] + Hval[1, 1]),
        hermiticity_defect=abs(Hval[1, 0] - np.conj(Hval[0, 1])),
        unitarity_defect=ures.unitarity_defect,
        gap=ures.gap,
    )


def optimal_coupling(model, t: float, epsilon: float, t_c: float,
                     precision: str = EXTENDED) -> EffectiveHamiltonian:
    """Effective Hamiltonian at the optimal truncation index."""
    n, _ = optimal_truncation(epsilon, t_c)
    return effective_hamiltonian(model, t, n, epsilon, precision)


@dataclass
class CouplingErrorRow:
    epsilon: float
    n: int
    sigma: float
    t: float
    c_optimal: complex
    c_universal: complex
    abs_error: float
    error_bound_scale: float    # eps^(3/2 - alpha) e^{-t_c/eps}
    ratio: float


def coupling_error_check(model, data, epsilons, t: float, alpha: float | None = None,
                         precision: str = EXTENDED) -> list[CouplingErrorRow]:
    """Measured |c^{n_eps} - c_eps| against its eps^(3/2-alpha) e^{-t_c/eps}
    envelope across an epsilon ladder; the ratios must stay bounded."""
    alpha = data.alpha if alpha is None else alpha
    rows = []
    for eps in epsilons:
        n, sigma = optimal_truncation(eps, data.t_c)
        eff = effective_hamiltonian(model, t, n, eps, precision)
        cu = universal_coupling(data, eps, t)
        err = abs(eff.c - cu)
        scale = eps ** (1.5 - alpha) * math.exp(-data.t_c / eps)
        rows.append(
            CouplingErrorRow(
                epsilon=eps,
                n=n,
                sigma=sigma,
                t=t,
                c_optimal=eff.c,
                c_universal=cu,
                abs_error=err,
                error_bound_scale=scale,
                ratio=err / scale,
            )
        )
    return rows
