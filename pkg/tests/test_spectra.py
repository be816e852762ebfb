import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oppenheim_lab.forms import signature
from oppenheim_lab.regions import IntervalError
from oppenheim_lab.spectra import (
    Torus,
    berry_tabor_table,
    coefficient_condition,
    coefficient_condition_values,
    dual_lattice,
    eigenvalue_at,
    eigenvalues,
    eigenvalues_scan,
    normalized_coefficients,
    pair_correlation,
    pair_correlation_naive,
    to_inhomogeneous_form,
)

FP2 = 4 * math.pi**2
Z2 = Torus(((1.0, 0.0), (0.0, 1.0)))


def test_square_torus_low_spectrum():
    spectrum = eigenvalues(Z2, FP2 * 1.01)
    assert spectrum.values[0] == 0
    assert np.allclose(spectrum.values[1:], FP2) and len(spectrum.values) == 5
    assert spectrum.count(FP2 * 1.01) == 5 and spectrum.count(-1) == 0


def test_flux_shifts_ground_state():
    spectrum = eigenvalues(Torus(((1.0, 0.0), (0.0, 1.0)), (0.5, 0.5)), FP2 * 0.5 + 1e-9)
    # four minima at |w + alpha| = 1/sqrt(2)
    assert len(spectrum.values) == 4 and np.allclose(spectrum.values, FP2 / 2)


def test_dual_lattice_examples():
    t = Torus(((2.0, 0.0), (0.0, 0.5)))
    assert np.allclose(dual_lattice(t), np.diag([0.5, 2.0]))
    t = Torus(((1.0, 1.0), (0.0, 1.0)))
    D = dual_lattice(t)
    assert np.allclose(D.T @ t.matrix, np.eye(2))


def test_bad_torus():
    with pytest.raises(ValueError):
        Torus(((1.0, 2.0), (2.0, 4.0)))
    with pytest.raises(ValueError):
        eigenvalues(Z2, 0)


tori = st.builds(
    lambda a, b, c, f1, f2: Torus(((a, b), (0.0, c)), (f1, f2)),
    st.floats(0.5, 2), st.floats(-1, 1), st.floats(0.5, 2), st.floats(-1, 1), st.floats(-1, 1),
)


@settings(max_examples=40)
@given(tori, st.floats(50, 800))
def test_fast_enumeration_matches_scan(t, lam):
    fast = eigenvalues(t, lam).values
    ref = eigenvalues_scan(t, lam)
    assert len(fast) == len(ref) and np.allclose(fast, ref)


@settings(max_examples=40)
@given(tori, st.floats(0.1, 30), st.floats(0.5, 20), st.floats(100, 600))
def test_pair_correlation_matches_naive(t, a, width, T):
    spectrum = eigenvalues(t, 600)
    for lo, hi in ((a, a + width), (-a - width, -a)):
        assert pair_correlation(spectrum, lo, hi, T) == pair_correlation_naive(spectrum.values, lo, hi, T)


def test_pair_correlation_empty_and_errors():
    spectrum = eigenvalues(Z2, 1000)
    assert pair_correlation(spectrum, 0.1, 0.2, 1000) == 0  # Z^2 gaps are multiples of 4 pi^2
    for a, b in ((1, 1), (2, 1), (-1, 1), (0, 1)):
        with pytest.raises(IntervalError):
            pair_correlation(spectrum, a, b, 500)
    with pytest.raises(ValueError):
        pair_correlation(spectrum, 1, 2, 2000)


def test_reduction_to_split_form():
    t = Torus(((1.0, 0.3), (0.0, 1.2)), (math.sqrt(2) - 1, math.sqrt(3) - 1))
    form, gauge = to_inhomogeneous_form(t)
    s = signature(form.homogeneous)
    assert (s.positive, s.negative) == (2, 2)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.integers(-5, 6, 4)
        want = eigenvalue_at(t, x[:2]) - eigenvalue_at(t, x[2:])
        assert float(form(x)) == pytest.approx(want, abs=1e-9 * (1 + abs(want)))
        g = gauge.gauge(x + form.shift_array())[0]
        assert g**2 == pytest.approx(max(eigenvalue_at(t, x[:2]), eigenvalue_at(t, x[2:])), rel=1e-12)


def test_zero_flux_gives_zero_shift():
    form, _ = to_inhomogeneous_form(Torus(((1.0, 0.2), (0.0, 0.9))))
    assert all(float(v) == 0 for v in form.shift)


def test_weyl_law():
    spectrum = eigenvalues(Torus(((1.0, 0.3), (0.0, 1.2)), (0.2, 0.1)), 1e5)
    assert spectrum.count(1e5) / (spectrum.weyl_c * 1e5) == pytest.approx(1, rel=0.01)


def test_berry_tabor_rows_use_window_length():
    rows = berry_tabor_table(Torus(((1.0, 0.0), (0.0, 1.0)), (math.sqrt(2) - 1, math.sqrt(3) - 1)), 0.1, 1.1, [1e4, 1e5])
    for r in rows:
        assert r.target == pytest.approx((1 / (4 * math.pi)) ** 2)
        assert r.rel_error == pytest.approx(abs(r.R / r.target - 1))


def test_coefficient_condition():
    A1, A2 = normalized_coefficients(Torus(((1.0, 0.0), (0.0, 1.0))))
    assert (A1, A2) == (0.0, 1.0)
    rep = coefficient_condition(Z2, 2, 0.1, 50)
    assert not rep.passed and rep.violation["q"] == 2 and rep.violation["deviation"] == 0
    rep = coefficient_condition_values([math.sqrt(2), math.sqrt(3)], 2, 0.01, 1000)
    assert rep.passed and rep.label == "pass at tested scales"
