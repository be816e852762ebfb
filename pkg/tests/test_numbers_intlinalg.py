import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from oppenheim_lab.intlinalg import (
    EnumerationCapError,
    column_echelon,
    complete_basis,
    hnf_rows,
    integer_kernel,
    lll,
    primitive,
    saturate,
    short_vectors,
    vgcd,
)
from oppenheim_lab.numbers import NotExact, Surd, as_number, exact_root, irrational, is_rational, is_zero

from conftest import unimodular


def test_surd_linear_algebra(sqrt2, sqrt3):
    x = 3 * sqrt2 - Fraction(1, 2) + sqrt3
    assert not is_rational(x)
    assert is_zero(x - x)
    assert float(x) == pytest.approx(3 * math.sqrt(2) - 0.5 + math.sqrt(3))
    assert Surd.from_json(x.to_json()) == x
    # coefficients cancel exactly
    assert (x - 3 * sqrt2 - sqrt3) == Fraction(-1, 2)


def test_surd_product_leaves_tagged_algebra(sqrt2):
    with pytest.raises(NotExact):
        _ = sqrt2 * sqrt2


def test_as_number():
    assert as_number("3/4") == Fraction(3, 4)
    assert as_number(2) == Fraction(2)
    assert isinstance(as_number(0.5), float)
    with pytest.raises(TypeError):
        as_number(True)


def test_exact_root():
    assert exact_root(Fraction(1, 16), 4) == Fraction(1, 2)
    assert exact_root(Fraction(2), 2) is None


def test_primitive():
    assert primitive((0, -4, 6)) == (0, 2, -3)
    with pytest.raises(ValueError):
        primitive((0, 0))


@given(st.lists(st.lists(st.integers(-6, 6), min_size=4, max_size=4), min_size=1, max_size=3))
def test_column_echelon_kernel(rows):
    AV, V, rank = column_echelon(rows)
    A = np.array(rows, dtype=object)
    Vm = np.array(V, dtype=object)
    assert (A.dot(Vm) == np.array(AV, dtype=object)).all()
    assert abs(round(np.linalg.det(np.array(V, dtype=float)))) == 1
    assert rank == np.linalg.matrix_rank(np.array(rows, dtype=float))
    for w in integer_kernel(rows):
        assert all(sum(a * b for a, b in zip(r, w)) == 0 for r in rows)
    assert len(integer_kernel(rows)) == 4 - rank


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_complete_basis_is_unimodular(seed, k):
    rng = np.random.default_rng(seed)
    g = unimodular(rng, 4)
    rows = [tuple(int(v) for v in g[:, j]) for j in range(k)]
    U = complete_basis(rows)
    assert abs(round(np.linalg.det(U.astype(float)))) == 1
    for j in range(k):
        assert tuple(int(v) for v in U[:, j]) == rows[j]


def test_saturate_and_hnf():
    # span of (2, 0, 0) and (0, 2, 2) meets Z^3 in span of e1 and (0, 1, 1)
    assert sorted(saturate([(2, 0, 0), (0, 2, 2)])) == sorted(hnf_rows([(1, 0, 0), (0, 1, 1)]))
    assert hnf_rows([(1, 1, 0), (0, 1, 1)]) == hnf_rows([(1, 2, 1), (0, 1, 1)])


@given(st.integers(0, 2**32 - 1))
def test_lll_is_unimodular_change(seed):
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(4, 4))
    assume(abs(np.linalg.det(B)) > 1e-3)
    R, U = lll(B)
    assert np.allclose(B @ U, R)
    assert abs(round(np.linalg.det(U.astype(float)))) == 1


@given(st.integers(0, 2**32 - 1), st.floats(0.5, 3.0))
def test_short_vectors_match_box_scan(seed, radius):
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(3, 3))
    assume(abs(np.linalg.det(B)) > 0.3)
    got = {tuple(c) for c in short_vectors(B, radius)}
    K = int(math.ceil(radius * np.linalg.norm(np.linalg.inv(B), 2))) + 1
    want = set()
    for c in itertools.product(range(-K, K + 1), repeat=3):
        v = B @ np.array(c, dtype=float)
        d = v @ v
        if d <= radius**2 * (1 - 1e-9):
            want.add(c)
        elif d <= radius**2 * (1 + 1e-9):
            got.discard(c)
    assert got == want


def test_short_vectors_cap():
    with pytest.raises(EnumerationCapError):
        short_vectors(np.eye(4), 10.0, cap=1000)


def test_vgcd():
    assert vgcd([6, -9, 15]) == 3
