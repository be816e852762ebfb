import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import settings

from oppenheim_lab.numbers import irrational

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def sqrt2():
    return irrational(math.sqrt(2), "sqrt2")


@pytest.fixture
def sqrt3():
    return irrational(math.sqrt(3), "sqrt3")


def unimodular(rng: np.random.Generator, n: int, steps: int = 6) -> np.ndarray:
    g = np.eye(n, dtype=np.int64)[rng.permutation(n)]
    for _ in range(steps):
        i, j = rng.choice(n, 2, replace=False)
        e = np.eye(n, dtype=np.int64)
        e[i, j] = int(rng.choice([-1, 1]))
        g = g @ e
    return g


def frac_matrix(rows):
    return tuple(tuple(Fraction(v) for v in r) for r in rows)
