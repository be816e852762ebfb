import itertools
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from oppenheim_lab.forms import FormError, InhomForm, SymmetricForm, b4, diagonal_form, evaluate, signature
from oppenheim_lab.intlinalg import hnf_rows
from oppenheim_lab.latgeo import action_22
from oppenheim_lab.subspaces import (
    DependentVectorsWarning,
    NullType,
    RationalSubspace,
    WEDGE_PAIRING,
    enumerate_null_first_type,
    enumerate_null_second_type,
    enumerate_quasinull,
    exceptional_subspaces,
    fractional_pairing_21,
    invariant_split,
    null_criterion,
    null_subspaces,
    null_vectors_21,
    plucker_relation,
    quasinull_test,
    second_compound,
    wedge2,
)

Z = Fraction(0)


def minors(v1, v2):
    return [v1[i] * v2[j] - v1[j] * v2[i] for i in range(4) for j in range(i + 1, 4)]


def sl2z(rng, steps=5):
    g = np.eye(2, dtype=np.int64)
    for _ in range(steps):
        e = np.eye(2, dtype=np.int64)
        i = rng.integers(2)
        e[i, 1 - i] = rng.choice([-1, 1])
        g = g @ e
    return g


def test_wedge_examples():
    assert list(wedge2((1, 0, 0, 0), (0, 1, 0, 0))) == [1, 0, 0, 0, 0, 0]
    assert list(wedge2((1, 0, 1, 0), (0, 1, 0, 1))) == minors((1, 0, 1, 0), (0, 1, 0, 1))
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        assert not wedge2((1, 2, 3, 4), (1, 2, 3, 4)).any()
    assert any(issubclass(r.category, DependentVectorsWarning) for r in rec)


@given(st.lists(st.integers(-20, 20), min_size=4, max_size=4), st.lists(st.integers(-20, 20), min_size=4, max_size=4))
def test_plucker_relation_and_antisymmetry(v1, v2):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        w = wedge2(v1, v2)
        assert plucker_relation([int(x) for x in w]) == 0
        assert list(w) == minors(v1, v2)
        assert list(wedge2(v2, v1)) == [-x for x in minors(v1, v2)]


def test_split_for_b4():
    s = invariant_split(b4())
    e12 = np.eye(6)[0]
    p1, p2 = s.project(e12)
    assert np.allclose(p2, 0) and np.allclose(p1, e12)
    assert s.V1_basis.shape == (3, 6) and s.V2_basis.shape == (3, 6)
    # orthogonal for the wedge pairing; each block is a ternary (2,1) form up to
    # sign (the pairing itself has inertia (3,3), so the two blocks are mirrored)
    A = WEDGE_PAIRING.astype(float)
    assert np.allclose(s.V1_basis @ A @ s.V2_basis.T, 0, atol=1e-12)
    inertia = []
    for V in (s.V1_basis, s.V2_basis):
        ev = np.linalg.eigvalsh(V @ A @ V.T)
        inertia.append((int((ev > 1e-9).sum()), int((ev < -1e-9).sum())))
    assert inertia == [(1, 2), (2, 1)]


def test_split_rejects_wrong_signature():
    with pytest.raises(FormError):
        invariant_split(diagonal_form([1, 1, 1, -1]))


@given(st.integers(0, 2**32 - 1))
def test_split_is_invariant_under_so_b4(seed):
    rng = np.random.default_rng(seed)
    s = invariant_split(b4())
    g1 = rng.normal(size=(2, 2))
    g2 = rng.normal(size=(2, 2))
    g1 /= math.sqrt(abs(np.linalg.det(g1)))
    g2 /= math.sqrt(abs(np.linalg.det(g2)))
    if np.linalg.det(g1) < 0:
        g1[:, 0] *= -1
    if np.linalg.det(g2) < 0:
        g2[:, 0] *= -1
    g = action_22(g1, g2)
    M = b4().matrix()
    assert np.allclose(g.T @ M @ g, M, atol=1e-9)
    C = second_compound(g)
    assert np.allclose(s.pi2 @ C @ s.V1_basis.T, 0, atol=1e-9)
    assert np.allclose(s.pi1 @ C @ s.V2_basis.T, 0, atol=1e-9)


def test_null_criterion_examples():
    q = b4()
    L = RationalSubspace.from_vectors([(1, 0, 0, 0), (0, 1, 0, 0)])
    assert null_criterion(q, L) is NullType.NullFirstType
    L2 = RationalSubspace.from_vectors([(1, 0, 0, 0), (0, 0, 1, 0)])
    assert null_criterion(q, L2) is NullType.NullSecondType
    # x1 x4 - x2 x3 on span(e1 + e4, e2 - e3) is a^2 + b^2
    P = RationalSubspace.from_vectors([(1, 0, 0, 1), (0, 1, -1, 0)])
    assert null_criterion(q, P) is NullType.NotNull


@given(st.integers(0, 2**32 - 1))
def test_first_type_preserved_by_integral_isometries(seed):
    rng = np.random.default_rng(seed)
    g = action_22(sl2z(rng).astype(float), sl2z(rng).astype(float))
    g = np.rint(g).astype(np.int64)
    L = [(1, 0, 0, 0), (0, 1, 0, 0)]
    image = RationalSubspace.from_vectors([tuple(int(x) for x in g @ np.array(v)) for v in L])
    assert null_criterion(b4(), image) is NullType.NullFirstType


@given(st.lists(st.integers(-4, 4), min_size=4, max_size=4), st.lists(st.integers(-4, 4), min_size=4, max_size=4))
def test_null_criterion_matches_grid(v1, v2):
    assume(any(minors(v1, v2)))
    L = RationalSubspace.from_vectors([v1, v2])
    f = InhomForm.homogeneous_only(b4())
    zero = all(evaluate(f, [a * x + b * y for x, y in zip(v1, v2)]) == 0 for a in range(-2, 3) for b in range(-2, 3))
    assert (null_criterion(b4(), L) is not NullType.NotNull) == zero


def test_quasinull_examples():
    q = b4()
    L = RationalSubspace.from_vectors([(1, 0, 0, 0), (0, 1, 0, 0)])
    r = quasinull_test(q, L, 0.1)
    assert r.quasinull and r.product == 0
    # a plane whose wedge has equal unit projections
    s = invariant_split(q)
    e = np.eye(6)
    cand = None
    for w in itertools.product(range(-1, 2), repeat=6):
        if plucker_relation(w) == 0 and any(w):
            n1, n2 = s.norms(w)
            if abs(n1 - 1) < 1e-12 and abs(n2 - 1) < 1e-12:
                cand = w
                break
    assert cand is not None
    from oppenheim_lab.subspaces import _plane_from_wedge

    P = _plane_from_wedge(cand)
    assert not quasinull_test(q, P, 0.9).quasinull


def test_quasinull_against_minors():
    # perturbed null plane at norm ~T: span((m,0,n,0), (0,m,0,n) + e1)
    s = invariant_split(b4())
    m, n = 7, 4
    v1, v2 = (m, 0, n, 0), (1, m, 0, n)
    L = RationalSubspace.from_vectors([v1, v2])
    w = np.array(minors(v1, v2), dtype=float)
    rep = quasinull_test(b4(), L, 0.5)
    assert rep.norm_pi1 == pytest.approx(np.linalg.norm(s.pi1 @ w))
    assert rep.norm_pi2 == pytest.approx(np.linalg.norm(s.pi2 @ w))
    assert rep.quasinull == (rep.product < 0.5)


def test_first_type_enumeration():
    L = enumerate_null_first_type(1)
    # (m, n) = (1, 0) and (0, 1)
    assert sorted(l.basis for l in L) == [((0, 0, 1, 0), (0, 0, 0, 1)), ((1, 0, 0, 0), (0, 1, 0, 0))]
    for l in enumerate_null_first_type(50):
        assert 25 <= l.norm <= 50
        assert null_criterion(b4(), l) is NullType.NullFirstType
    assert enumerate_null_first_type(0.5) == []


def test_first_type_linear_growth():
    c = [len(enumerate_null_first_type(T)) for T in (1000, 2000, 4000)]
    assert 1.8 <= c[1] / c[0] <= 2.2 and 1.8 <= c[2] / c[1] <= 2.2
    # direct oracle: primitive (m, n) up to sign with T/2 <= m^2 + n^2 <= T
    T = 1000
    want = sum(1 for m in range(-40, 41) for n in range(-40, 41) if T / 2 <= m * m + n * n <= T and math.gcd(m, n) == 1) // 2
    assert c[0] == want


def test_quasinull_small_mu_is_null_for_b4():
    T = 30
    got = {l.basis for l in enumerate_quasinull(b4(), 1e-3, T)}
    want = {l.basis for l in enumerate_null_first_type(T)} | {l.basis for l in enumerate_null_second_type(T)}
    assert got == want
    assert enumerate_quasinull(b4(), 0.1, 0.5) == []


def test_quasinull_canonical_and_linear():
    out = enumerate_quasinull(b4(), 0.1, 40)
    for L in out:
        assert tuple(hnf_rows(L.basis)) == L.basis
    c = [len(enumerate_quasinull(b4(), 0.1, T)) for T in (20, 40, 80)]
    for a, b in zip(c, c[1:]):
        assert 2 / 1.25 <= b / a <= 2 * 1.25


def test_exceptional_half_shift_against_direct_search():
    f = InhomForm(b4(), (Fraction(1, 2), Fraction(1, 2), Z, Z))
    T = 12
    ws = exceptional_subspaces(f, T)
    got = {w.subspace.basis for w in ws}
    # oracle: null planes with |v^L| <= T and some integral v, |v| <= 10, with xi - v in L
    xi = np.array([0.5, 0.5, 0, 0])
    want = set()
    for L in null_subspaces(b4(), T):
        B = np.array(L.basis, dtype=float).T
        for v in itertools.product(range(-3, 4), repeat=4):
            d = xi - np.array(v)
            c, *_ = np.linalg.lstsq(B, d, rcond=None)
            if np.allclose(B @ c, d, atol=1e-12):
                want.add(L.basis)
                break
    assert got == want and got
    for w in ws:
        for g, val in w.certificate:
            assert isinstance(val, Fraction) and val.denominator == 1
        assert w.residual == 0


def test_exceptional_bounds_on_structured_forms(sqrt2, sqrt3):
    # irrational form with four rational null planes
    h = Fraction(1, 2)
    q = SymmetricForm(((Z, Z, Z, h), (Z, Z, -sqrt2 * h, Z), (Z, -sqrt2 * h, Z, Z), (h, Z, Z, Z)))
    assert len(exceptional_subspaces(InhomForm.homogeneous_only(q), 30)) == 4
    # rational Q, tagged shift on a null line: two planes
    assert len(exceptional_subspaces(InhomForm(b4(), (sqrt2, Z, Z, Z)), 30)) == 2
    assert len(exceptional_subspaces(InhomForm(b4(), (sqrt2 - 1, sqrt3 - 1, Z, Z)), 30)) == 1


def test_null_vectors_21():
    vs = null_vectors_21(1)
    assert (1, 0, 0) in vs
    for model, Q in (("matrix", lambda x, y, z: x * z - y * y), ("q0", lambda x, y, z: 2 * x * z - y * y)):
        out = null_vectors_21(200, model)
        assert out and all(Q(*v) == 0 for v in out)
        assert all(math.gcd(math.gcd(*v[:2]), v[2]) == 1 for v in out)
    ratios = [len(null_vectors_21(T)) / T for T in (1e2, 1e3, 1e4)]
    assert max(ratios) / min(ratios) <= 1.25


def test_fractional_pairing():
    assert fractional_pairing_21((Fraction(2), Fraction(-1), Fraction(3)), 2, 3) == 0
    assert fractional_pairing_21((Fraction(1, 2), Z, Z), 1, 1) == 0.5
    with pytest.raises(ValueError):
        fractional_pairing_21((Z, Z, Z), 2, 4)


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3), st.integers(-6, 6), st.integers(1, 6))
def test_fractional_pairing_matches_bilinear_oracle(xi, m, n):
    assume(math.gcd(m, n) == 1)
    # <v, xi>_B for v = (m^2, mn, n^2) in the 2xz - y^2 style pairing
    val = n * n * xi[0] - 2 * m * n * xi[1] + m * m * xi[2]
    want = abs(val - round(val))
    assert fractional_pairing_21(xi, m, n) == pytest.approx(want, abs=1e-12)
    assert 0 <= fractional_pairing_21(xi, m, n) <= 0.5
