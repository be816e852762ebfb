import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oppenheim_lab.forms import InhomForm, b4, diagonal_form
from oppenheim_lab.oracles import shell_volume_exact_22
from oppenheim_lab.regions import Ball
from oppenheim_lab.volume import lambda_fit, shell_volume_mc, substream

Z = Fraction(0)
SPLIT = InhomForm.homogeneous_only(diagonal_form([1, 1, -1, -1]))


def qmc_shell_volume(T: float, m: int = 2**20) -> float:
    """Independent estimate from a Fibonacci rank-1 lattice rule.

    Uses the exact radial/angle reduction: in coordinates r1 = |x12|, r2 = |x34|
    the region is {r1^2 + r2^2 < T^2, |r1^2 - r2^2| < 1}, with density (2 pi)^2 r1 r2.
    """
    # rank-1 lattice points in [0,1)^2 with a Fibonacci generator
    fib = [1, 1]
    while fib[-1] < m:
        fib.append(fib[-1] + fib[-2])
    N, g = fib[-1], fib[-2]
    k = np.arange(N)
    u = (k / N) % 1.0
    v = (k * g / N) % 1.0
    r1 = u * T
    r2 = v * T
    inside = (r1 * r1 + r2 * r2 < T * T) & (np.abs(r1 * r1 - r2 * r2) < 1)
    return float((2 * math.pi) ** 2 * (r1 * r2 * inside).mean() * T * T)


def test_exact_oracle_agrees_with_qmc():
    assert qmc_shell_volume(20.0) == pytest.approx(shell_volume_exact_22(20.0), rel=2e-3)


@pytest.mark.parametrize("method", ["hit", "slice"])
def test_shell_volume_matches_exact(method):
    T = 50.0
    sv = shell_volume_mc(SPLIT, Ball(1), -1, 1, T, 2_000_000 if method == "hit" else 200_000, seed=3, method=method)
    exact = shell_volume_exact_22(T)
    assert abs(sv.estimate - exact) <= 3 * sv.std_error


def test_same_seed_bit_identical():
    a = shell_volume_mc(SPLIT, Ball(1), -1, 1, 10, 50_000, seed=11, method="hit")
    b = shell_volume_mc(SPLIT, Ball(1), -1, 1, 10, 50_000, seed=11, method="hit")
    assert a == b
    c = shell_volume_mc(SPLIT, Ball(1), -1, 1, 10, 50_000, seed=12, method="hit")
    assert c.estimate != a.estimate


def test_empty_shell_limit():
    sv = shell_volume_mc(SPLIT, Ball(1), 0.3, 0.3 + 1e-12, 10, 20_000, seed=1, method="hit")
    assert sv.estimate == 0 and sv.low_statistics
    sl = shell_volume_mc(SPLIT, Ball(1), 0.3, 0.3 + 1e-9, 10, 20_000, seed=1, method="slice")
    assert sl.estimate < 1e-5


def test_sample_floor():
    with pytest.raises(ValueError):
        shell_volume_mc(SPLIT, Ball(1), -1, 1, 10, 999, seed=1)


def test_substreams_are_independent():
    a = substream(5, 0, 0).random(4)
    b = substream(5, 0, 1).random(4)
    c = substream(5, 0, 0).random(4)
    assert not np.array_equal(a, b) and np.array_equal(a, c)


def test_lambda_fit_grid_validation():
    with pytest.raises(ValueError):
        lambda_fit(SPLIT, Ball(1), -1, 1, [10, 10, 10], 20_000, 0)
    with pytest.raises(ValueError):
        lambda_fit(SPLIT, Ball(1), -1, 1, [10, 20], 20_000, 0)


def test_lambda_matches_closed_form():
    est = lambda_fit(SPLIT, Ball(1), -1, 1, [50, 100, 200], 100_000, 1)
    # pi^2 (T^2 - 1/2) / (2 T^2) -> pi^2 / 2
    assert abs(est.lambda_hat - math.pi**2 / 2) <= 3 * est.std_error + 1e-3


def test_lambda_interval_and_shift_independence():
    f = InhomForm(b4(), (Fraction(1, 3), Z, Z, Z))
    T = [40, 60, 80]
    base = lambda_fit(f, Ball(1), -1, 1, T, 100_000, 2)
    wide = lambda_fit(f, Ball(1), -1, 3, T, 100_000, 3)
    zero = lambda_fit(InhomForm.homogeneous_only(b4()), Ball(1), -1, 1, T, 100_000, 4)
    for other in (wide, zero):
        assert abs(other.lambda_hat - base.lambda_hat) <= 3 * math.hypot(other.std_error, base.std_error)


def test_disjoint_grids_agree():
    f = InhomForm(b4(), (Fraction(1, 2), Z, Z, Z))
    lo = lambda_fit(f, Ball(1), -1, 1, [50, 70, 100], 100_000, 5)
    hi = lambda_fit(f, Ball(1), -1, 1, [100, 140, 200], 100_000, 6)
    assert abs(lo.lambda_hat - hi.lambda_hat) <= 3 * math.hypot(lo.std_error, hi.std_error)


def test_std_error_scales_as_root_samples():
    ratios = []
    for seed in range(20):
        a = shell_volume_mc(SPLIT, Ball(1), -1, 1, 10, 20_000, seed, method="hit")
        b = shell_volume_mc(SPLIT, Ball(1), -1, 1, 10, 40_000, seed, method="hit")
        ratios.append(b.std_error / a.std_error)
    assert abs(np.mean(ratios) - 1 / math.sqrt(2)) <= 0.1 / math.sqrt(2)


@settings(max_examples=15)
@given(st.integers(0, 2**63 - 1))
def test_std_error_nonnegative(seed):
    sv = shell_volume_mc(SPLIT, Ball(1), -1, 1, 8, 10_000, seed, method="slice")
    assert sv.std_error >= 0 and sv.estimate > 0
