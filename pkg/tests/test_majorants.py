import math

import numpy as np
import pytest

from superadiabatic.errors import UsageError
from superadiabatic.majorants import (
    build_bound_sequence,
    check_lemma_bound,
    expanded_d_recursion,
    lemma_bound_rhs,
    minimal_M_search,
    theorem_closure_bounds,
)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_first_steps_closed_forms(r):
    seq = build_bound_sequence(r, 8)
    assert seq.D[2] == pytest.approx(r * r / 4.0, rel=1e-14)
    assert seq.C[3] == pytest.approx(r / 2.0 + r**3 / 8.0, rel=1e-14)
    assert seq.C[2] == seq.C[1]  # even case copies


def test_odd_d_vanishes_and_monotonicity():
    seq = build_bound_sequence(1.0, 31)
    assert np.all(seq.D[1::2] == 0.0)
    assert np.all(seq.D[2:] >= 0.0)
    assert np.all(np.diff(seq.C[1:]) >= -1e-15)


def test_c_from_d_identity():
    for r in (0.5, 1.0, 2.0):
        seq = build_bound_sequence(r, 120)
        assert seq.identity_defect() < 1e-12


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_lemma_bound_m42_up_to_200(r):
    seq = build_bound_sequence(r, 200)
    rows = check_lemma_bound(seq, 42.0)
    assert all(row.holds for row in rows)


def test_lemma_bound_n2_any_m():
    # D_2 = r^2/4 <= r^2 M / 1! for any M >= 1
    for m in (1.0, 2.0, 42.0):
        rows = check_lemma_bound(build_bound_sequence(1.0, 4), m)
        assert rows[0].n == 2 and rows[0].holds


def test_tiny_m_fails_somewhere():
    seq = build_bound_sequence(1.0, 60)
    rows = check_lemma_bound(seq, 0.01)
    assert any(not row.holds for row in rows)


def test_minimal_m_below_42_and_monotone_in_n():
    vals = [minimal_M_search(1.0, n) for n in (20, 60, 100)]
    assert all(v <= 42.0 for v in vals)
    assert all(b >= a - 1e-3 for a, b in zip(vals, vals[1:]))


def test_minimal_m_reported_value():
    # the conjecture says M = 1 should work; treat as data, not truth
    m_star = minimal_M_search(1.0, 100)
    assert 0.0 < m_star <= 42.0


def test_expanded_recursion_matches_direct():
    for r in (0.5, 1.0, 2.0):
        direct = build_bound_sequence(r, 80)
        exp = expanded_d_recursion(r, 80)
        for n in range(2, 81, 2):
            assert exp[n] == pytest.approx(float(direct.D[n]), rel=1e-10)


def test_theorem_closure():
    for r in (0.5, 1.0, 2.0):
        seq = build_bound_sequence(r, 200)
        out = theorem_closure_bounds(seq)
        assert out["holds"]
        assert out["worst_C_slack"] >= 1.0 and out["worst_D_slack"] >= 1.0


def test_extended_matches_double_at_crossover():
    a = build_bound_sequence(1.3, 60)   # double path
    b = build_bound_sequence(1.3, 61)   # mpmath path
    assert not a.extended and b.extended
    for n in range(2, 61, 2):
        assert float(b.D[n]) == pytest.approx(float(a.D[n]), rel=1e-13)


def test_rhs_log_safety():
    # r = 2, M = 42: terms reach e^168-ish scales and must stay finite
    val = lemma_bound_rhs(2.0, 42.0, 200)
    assert math.isfinite(val) and val > 0


def test_bad_inputs():
    with pytest.raises(UsageError):
        build_bound_sequence(-1.0, 10)
    with pytest.raises(UsageError):
        build_bound_sequence(1.0, 1)
