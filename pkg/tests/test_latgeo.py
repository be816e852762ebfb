import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oppenheim_lab.latgeo import (
    Box,
    FullLattice,
    RadialStep,
    RadialTent,
    a_t,
    action_21,
    alpha,
    alpha_i,
    b_t,
    exterior_power,
    function_from_dict,
    function_to_dict,
    k_grid,
    lipschitz_check,
    orbit_alpha_moment,
    rotation,
    shrink_fit,
    shrink_profile,
    siegel_average,
    theta_transform,
    theta_transform_box,
)
from oppenheim_lab.subspaces import RationalSubspace

Z4 = FullLattice.from_matrix(np.eye(4))


def brute_theta(f, B, xi, K):
    r = range(-K, K + 1)
    X = np.array(list(itertools.product(r, repeat=len(B)))) @ np.asarray(B).T + xi
    return math.fsum(f(X))


def test_theta_examples():
    assert theta_transform(RadialStep(1.2), Z4) == 9  # origin plus 8 unit vectors
    assert theta_transform(RadialStep(0.5), FullLattice.from_matrix(np.eye(2), (0.5, 0.0))) == 2
    assert theta_transform(Box((0.6, 0.6)), FullLattice.from_matrix(np.eye(2), (0.5, 0.5))) == 4
    assert theta_transform(RadialTent(1.0), FullLattice.from_matrix(np.eye(3))) == 1


lattices = st.tuples(
    st.lists(st.floats(-1.5, 1.5), min_size=9, max_size=9), st.lists(st.floats(-1, 1), min_size=3, max_size=3)
).map(lambda t: (np.array(t[0]).reshape(3, 3) + 1.5 * np.eye(3), np.array(t[1])))


@settings(max_examples=40)
@given(lattices, st.sampled_from([RadialStep(1.3), RadialTent(1.7), Box((0.9, 0.4, 1.1))]))
def test_theta_equals_box_enumeration(Bx, f):
    B, xi = Bx
    if abs(np.linalg.det(B)) < 0.3:
        return
    L = FullLattice.from_matrix(B, xi)
    fast = theta_transform(f, L)
    assert fast == pytest.approx(theta_transform_box(f, L), abs=1e-9)
    if np.linalg.cond(B) < 20:
        assert fast == pytest.approx(brute_theta(f, B, xi, 25), abs=1e-9)


def test_theta_linear_in_f():
    L = FullLattice.from_matrix([[1.0, 0.3], [0.0, 0.8]], (0.1, 0.7))
    f, g = RadialStep(2.0), RadialTent(3.0)
    assert theta_transform(f.scaled(2.5), L) == pytest.approx(2.5 * theta_transform(f, L))
    both = brute_theta(lambda X: f(X) + g(X), L.matrix, np.array(L.shift), 12)
    assert both == pytest.approx(theta_transform(f, L) + theta_transform(g, L))


def test_function_round_trip():
    for f in (RadialStep(1.2), Box((0.7, 0.7)), RadialTent(1.5)):
        assert function_from_dict(function_to_dict(f)) == f
    with pytest.raises(ValueError):
        function_from_dict({"kind": "gaussian"})


@pytest.mark.parametrize("f", [RadialStep(1.2), RadialTent(1.5), Box((0.7, 0.7, 0.7))])
def test_siegel_average(f):
    L = FullLattice.from_matrix([[1.2, 0.3, 0.0], [0.0, 0.9, 0.1], [0.0, 0.0, 1.0]])
    res = siegel_average(f, L, 4000, seed=3)
    assert res.exact_integral == pytest.approx(f.exact_integral(3) / L.covol)
    assert abs(res.z) < 4


def test_siegel_determinism_and_floor():
    L = FullLattice.from_matrix(np.eye(2))
    a = siegel_average(RadialStep(0.7), L, 2000, seed=9)
    b = siegel_average(RadialStep(0.7), L, 2000, seed=9)
    assert a == b
    with pytest.raises(ValueError):
        siegel_average(RadialStep(0.7), L, 999, seed=9)


def test_alpha_examples():
    r = alpha_i(FullLattice.from_matrix(np.diag([8.0, 1 / 8])), 1)
    assert r.value == pytest.approx(8) and r.saturated
    a = alpha(Z4)
    assert a.value == pytest.approx(1) and a.saturated
    # alpha_2 of diag(2, 2, 1/2, 1/2) comes from the plane of the two short vectors
    D = FullLattice.from_matrix(np.diag([2.0, 2.0, 0.5, 0.5]))
    assert alpha_i(D, 2).value == pytest.approx(4)
    assert alpha_i(D, 1).value == pytest.approx(2)
    assert alpha_i(D, 3).value == pytest.approx(2)
    with pytest.raises(ValueError):
        alpha_i(Z4, 4)


def test_exterior_power_determinant():
    B = np.random.default_rng(2).normal(size=(4, 4))
    W = exterior_power(B, 2)
    # Sylvester-Franke: det Lambda^2 B = det(B)^3 for n = 4
    assert np.linalg.det(W) == pytest.approx(np.linalg.det(B) ** 3, rel=1e-9)


@settings(max_examples=25)
@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.integers(0, 2**31))
def test_alpha_invariant_under_rotation_and_basis_change(th1, th2, seed):
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(4, 4)) + 2 * np.eye(4)
    if abs(np.linalg.det(B)) < 0.5:
        return
    R = np.kron(rotation(th1), rotation(th2))
    U = np.eye(4, dtype=int)
    U[0, 1] = 1
    U[2, 3] = -2
    base = alpha(FullLattice.from_matrix(B))
    for M in (R @ B, B @ U):
        other = alpha(FullLattice.from_matrix(M))
        if base.saturated and other.saturated:
            assert other.value == pytest.approx(base.value, rel=1e-9)


def test_alpha_ignores_shift():
    B = [[1.0, 0.2, 0, 0], [0, 1.1, 0, 0], [0, 0, 0.9, 0.1], [0, 0, 0, 1.0]]
    assert alpha(FullLattice.from_matrix(B, (0.3, 0.1, 0.2, 0.4))).value == alpha(FullLattice.from_matrix(B)).value


def test_lipschitz_ratio_for_standard_lattice():
    p = lipschitz_check(RadialStep(1.2), Z4)
    assert (p.theta, p.alpha, p.ratio) == (9, pytest.approx(1), pytest.approx(9))


def test_theta_bounded_by_alpha_along_diagonal_flow():
    ratios = []
    for t in range(0, 7):
        g = np.diag([math.exp(-t / 2), math.exp(-t / 2), math.exp(t / 2), math.exp(t / 2)])
        ratios.append(lipschitz_check(RadialStep(1.0), FullLattice.from_matrix(g, (0.0, 0.0, 0.3, 0.1))).ratio)
    # theta grows like e^t while theta / alpha stays in a fixed window
    assert min(ratios) > 2 and max(ratios) < 4


def test_orbit_actions():
    g = b_t(1.3)
    A = action_21(g)
    # the (2,1) action preserves the discriminant form y^2/2 - xz
    Q = np.array([[0, 0, -0.5], [0, 0.5, 0], [-0.5, 0, 0]])
    assert np.allclose(A.T @ Q @ A, Q)
    assert np.allclose(a_t((2, 2), 0.0), np.eye(4))
    assert len(k_grid((2, 2), 64)) == 64 and len(k_grid((2, 1), 64)) == 64
    with pytest.raises(ValueError):
        k_grid((2, 2), 10)
    with pytest.raises(NotImplementedError):
        k_grid((3, 1), 64)


def test_orbit_moment_at_time_zero():
    res = orbit_alpha_moment(Z4, 1.5, 0.0, 64, 1)
    assert res.moment == pytest.approx(1) and res.unsaturated == 0
    with pytest.raises(ValueError):
        orbit_alpha_moment(Z4, 2.0, 0.0, 64, 1)


def test_shrink_measure_monotone_in_delta():
    L = RationalSubspace.from_vectors([[1, 0, 0, 0], [0, 1, 0, 0]])
    prev = None
    for delta in (2.0, 1.0, 0.5, 0.2, 0.05, 0.01):
        p = shrink_profile(L, Z4, 2.0, delta, 1024)
        assert 0 <= p.measure <= 1
        if prev is not None:
            assert p.measure <= prev
        prev = p.measure
    assert shrink_profile(L, Z4, 2.0, 1e-9, 1024).empty
    with pytest.raises(ValueError):
        shrink_profile(L, Z4, 2.0, 0.5, 16)
    with pytest.raises(ValueError):
        shrink_profile(L, Z4, 2.0, 0.5, 64, mode="other")


def test_shrink_fit_excess_mode():
    L = RationalSubspace.from_vectors([[1, 0, 0, 0], [0, 1, 0, 0]])
    fit = shrink_fit(L, Z4, [1.0, 2.0, 3.0], [0.2, 0.1, 0.05], 4096)
    assert fit.delta_exponent is not None and fit.delta_exponent > 0
    assert all(m >= 0 for m in fit.minima)
