import math

import numpy as np
import pytest

from superadiabatic.basis import (
    commutator_defect,
    coupling_error_check,
    effective_hamiltonian,
    optimal_truncation,
    projection_at,
    projection_defect,
    superadiabatic_unitary,
    universal_coupling,
)
from superadiabatic.errors import UsageError
from superadiabatic.jets import DOUBLE, EXTENDED
from superadiabatic.theta import PolePairModel


@pytest.fixture(scope="module")
def unit_pole():
    return PolePairModel(gamma=1.0, t_r=0.0, t_c=1.0, alpha=0.99)


# -- optimal truncation ----------------------------------------------------------


def test_optimal_truncation_worked_examples():
    assert optimal_truncation(0.1, 1.0) == (10, pytest.approx(1.0))
    assert optimal_truncation(0.125, 1.0) == (8, pytest.approx(1.0))
    n, sigma = optimal_truncation(1.0 / 9.0, 1.0)
    assert n == 8 and sigma == pytest.approx(0.0, abs=1e-12)


def test_optimal_truncation_range():
    for eps in np.linspace(0.03, 0.3, 40):
        n, sigma = optimal_truncation(float(eps), 1.3)
        assert n % 2 == 0
        assert 0.0 <= sigma < 2.0
        assert n == pytest.approx(1.3 / eps - 1.0 + sigma)
    with pytest.raises(UsageError):
        optimal_truncation(-0.1, 1.0)


# -- universal formula -------------------------------------------------------------


def test_universal_coupling_on_axis(unit_pole):
    sd = unit_pole.singularity()
    eps = 0.1
    got = universal_coupling(sd, eps, 0.0)
    want = 2j * math.sqrt(2 * eps / math.pi) * math.exp(-1.0 / eps)
    assert got == pytest.approx(want, rel=1e-13)


def test_universal_coupling_gaussian_envelope(unit_pole):
    sd = unit_pole.singularity()
    eps = 0.05
    t = math.sqrt(eps * sd.t_c)
    peak_mag = abs(universal_coupling(sd, eps, 0.0))
    off = universal_coupling(sd, eps, t)
    # strip the cosine to isolate the envelope
    _, sigma = optimal_truncation(eps, sd.t_c)
    phase = t / eps - t**3 / (3 * eps) + sigma * t
    envelope = abs(off) / abs(math.cos(phase))
    assert envelope == pytest.approx(peak_mag * math.exp(-0.5), rel=1e-10)


def test_universal_coupling_gamma_scaling():
    eps = 0.1
    for gamma in (1.0 / 3.0, 0.5, 1.0):
        m = PolePairModel(gamma=gamma, t_c=1.0)
        val = abs(universal_coupling(m.singularity(), eps, 0.0))
        assert val == pytest.approx(
            2 * math.sqrt(2 * eps / math.pi) * math.sin(math.pi * gamma / 2)
            * math.exp(-1 / eps), rel=1e-12)


# -- projections --------------------------------------------------------------------


def test_projection_order_zero_is_spectral(unit_pole):
    for t in (-0.4, 0.3):
        p = projection_at(unit_pole, t, 0, 0.05)
        h = unit_pole.hamiltonian(t)
        assert np.allclose(p @ p, p, atol=1e-14)
        assert np.allclose(p @ h, h @ p, atol=1e-14)
        evals = np.linalg.eigvalsh(p)
        assert np.allclose(sorted(evals), [0.0, 1.0], atol=1e-14)


def test_projection_defect_slopes(unit_pole):
    """(pi^(n))^2 - pi^(n) = O(eps^{n+1}); for even n parity kills the
    leading coefficient so the decay is one order faster."""
    epss = np.array([1e-1, 3e-2, 1e-2, 3e-3, 1e-3])
    expected = {1: 2.0, 2: 4.0, 3: 4.0}
    for n, slope_want in expected.items():
        ds = [projection_defect(unit_pole, 0.3, n, float(e), EXTENDED)
              for e in epss]
        slope = np.polyfit(np.log(epss), np.log(ds), 1)[0]
        assert abs(slope - slope_want) < 0.15, (n, slope)


def test_projection_zero_theta_collapses():
    m = PolePairModel(gamma=0.0, t_c=1.0)
    for n in (0, 2, 4):
        p = projection_at(m, 0.2, n, 0.1)
        p0 = projection_at(m, 0.2, 0, 0.1)
        assert np.allclose(p, p0, atol=1e-15)


def test_commutator_defect_slopes(unit_pole):
    epss = np.array([1e-1, 3e-2, 1e-2, 3e-3])
    for n in (1, 2, 3, 4):
        ds = [commutator_defect(unit_pole, 0.3, n, float(e), EXTENDED)
              for e in epss]
        slope = np.polyfit(np.log(epss), np.log(ds), 1)[0]
        assert abs(slope - (n + 1)) < 0.15, (n, slope)


# -- the unitary --------------------------------------------------------------------


def test_unitary_n0_is_adiabatic_rotation(unit_pole):
    u = superadiabatic_unitary(unit_pole, 0.35, 0, 0.07)
    assert np.allclose(u.matrix, u.adiabatic_matrix, atol=1e-13)
    th = unit_pole.theta_angle(0.35)
    rot = np.array([[math.cos(th / 2), math.sin(th / 2)],
                    [-math.sin(th / 2), math.cos(th / 2)]])
    assert np.allclose(u.adiabatic_matrix, rot, atol=1e-14)


def test_unitary_defect_and_limit(unit_pole):
    t = 0.3
    for eps in (0.1, 0.05, 0.025):
        u = superadiabatic_unitary(unit_pole, t, 4, eps)
        assert u.unitarity_defect < 1e-12
        gap = np.linalg.norm(u.matrix - u.adiabatic_matrix)
        assert gap / eps < 2.0  # ||U - U_0|| <= const * eps


def test_unitary_limit_slope(unit_pole):
    epss = np.array([0.1, 0.05, 0.025, 0.0125])
    gaps = []
    for eps in epss:
        u = superadiabatic_unitary(unit_pole, 0.3, 4, float(eps))
        gaps.append(np.linalg.norm(u.matrix - u.adiabatic_matrix))
    slope = np.polyfit(np.log(epss), np.log(gaps), 1)[0]
    assert abs(slope - 1.0) < 0.1


def test_unitary_continuity_in_t(unit_pole):
    eps = 0.08
    ts = np.linspace(-0.6, 0.6, 25)
    mats = [superadiabatic_unitary(unit_pole, float(t), 6, eps).matrix
            for t in ts]
    steps = [np.linalg.norm(b - a) for a, b in zip(mats, mats[1:])]
    dt = ts[1] - ts[0]
    assert max(steps) <= 3.0 * dt  # no phase jumps along the sweep


def test_unitary_gap_guard(unit_pole):
    from superadiabatic.errors import NumericError

    with pytest.raises(NumericError):
        # eps far too large: the projection polynomial degenerates
        superadiabatic_unitary(unit_pole, 0.0, 8, 1.5)


# -- effective Hamiltonian ------------------------------------------------------------


def test_effective_hamiltonian_structure(unit_pole):
    eff = effective_hamiltonian(unit_pole, 0.3, 2, 0.05)
    assert eff.trace_defect < 1e-14
    assert eff.hermiticity_defect < 1e-14
    assert eff.unitarity_defect < 1e-13
    assert abs(eff.gap - 1.0) < 0.05


def test_rho_second_order(unit_pole):
    epss = np.array([0.1, 0.05, 0.025])
    devs = [abs(effective_hamiltonian(unit_pole, 0.3, 2, float(e)).rho - 0.5)
            for e in epss]
    slope = np.polyfit(np.log(epss), np.log(devs), 1)[0]
    assert abs(slope - 2.0) < 0.1


def test_coupling_matches_recursion_prediction(unit_pole):
    """c^n_eps = -eps^(n+1)(x_{n+1} - z_{n+1})(1 + O(eps)): the relative
    residual must vanish at least linearly in eps."""
    for n in (1, 2, 3):
        epss = np.array([0.1, 0.05, 0.025, 0.0125])
        rels = []
        for eps in epss:
            eff = effective_hamiltonian(unit_pole, 0.3, n, float(eps))
            rels.append(abs(eff.c - eff.predicted_c) / abs(eff.predicted_c))
        slope = np.polyfit(np.log(epss), np.log(rels), 1)[0]
        assert slope >= 0.9, (n, rels)


def test_zero_theta_coupling():
    m = PolePairModel(gamma=0.0, t_c=1.0)
    eff = effective_hamiltonian(m, 0.2, 2, 0.1)
    assert abs(eff.c) < 1e-15
    assert eff.rho == pytest.approx(0.5, abs=1e-15)


# -- optimal coupling vs the universal formula ------------------------------------------


@pytest.fixture(scope="module")
def ladder_rows(unit_pole):
    sd = unit_pole.singularity()
    return coupling_error_check(unit_pole, sd, [1 / 10, 1 / 14, 1 / 18], 0.0,
                                alpha=0.99, precision=EXTENDED)


def test_optimal_coupling_close_to_universal(ladder_rows):
    for row in ladder_rows:
        rel = abs(row.c_optimal - row.c_universal) / abs(row.c_universal)
        assert rel < 0.25
        # phase agreement, not only magnitude
        assert (row.c_optimal / row.c_universal).real > 0.7


def test_error_ratio_bounded_no_growth(ladder_rows):
   ratios = [row.ratio for row in ladder_rows]
   assert max(ratios) / min(ratios) <= 3.0
   assert ratios[-1] <= ratios[0]  # decaying, not growing


def test_exponential_smallness(ladder_rows):
    for row in ladder_rows:
        assert abs(row.c_optimal) < 2.0 * math.sqrt(row.epsilon) * math.exp(
            -1.0 / row.epsilon) * 2.0


def test_coupling_negligible_off_peak(unit_pole):
    """Away from t_r by >> sqrt(eps): both couplings fall below
    0.1 * sqrt(eps) e^{-t_c/eps} (the off-transition regime)."""
    sd = unit_pole.singularity()
    eps = 1 / 14
    n, _ = optimal_truncation(eps, sd.t_c)
    t = 6.0 * math.sqrt(eps * sd.t_c)
    eff = effective_hamiltonian(unit_pole, t, n, eps, EXTENDED)
    scale = 0.1 * math.sqrt(eps) * math.exp(-sd.t_c / eps)
    assert abs(universal_coupling(sd, eps, t)) < scale
    assert abs(eff.c) < scale
