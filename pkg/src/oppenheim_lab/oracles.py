"""Independent reference computations used by the test and acceptance suites.

Nothing here shares code with the production kernels: counts are done on a
full integer box with exact scaled integer arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np


def _lcm(*xs: int) -> int:
    out = 1
    for x in xs:
        out = out * x // math.gcd(out, x)
    return out


def exact_box_count(
    M: Sequence[Sequence[Fraction]],
    xi: Sequence[Fraction],
    constraints: Sequence[tuple[Sequence[Sequence[int]], Fraction]],
    a: Fraction,
    b: Fraction,
    T: Fraction,
    radius: int,
) -> int:
    """#{x in [-radius, radius]^n : x^T A_j x < (T rho_j)^2 for all j, a < Q(x + xi) < b}.

    M and xi are rational, each A_j is an integer matrix and rho_j^2 is given
    as a Fraction.  Everything is scaled to integers before comparing.
    """
    n = len(M)
    M = [[Fraction(v) for v in row] for row in M]
    xi = [Fraction(v) for v in xi]
    D = _lcm(*(v.denominator for v in xi))
    E = _lcm(*(v.denominator for row in M for v in row))
    Mi = np.array([[int(v * E) for v in row] for row in M], dtype=np.int64)
    s = np.array([int(v * D) for v in xi], dtype=np.int64)
    # E D^2 Q(x + xi) = y^T (E M) y with y = D x + D xi
    scale = E * D * D
    lo = Fraction(a) * scale
    hi = Fraction(b) * scale
    total = 0
    r = np.arange(-radius, radius + 1, dtype=np.int64)
    # iterate over the first coordinate to bound memory
    rest = np.stack(np.meshgrid(*([r] * (n - 1)), indexing="ij"), -1).reshape(-1, n - 1)
    for x0 in r:
        X = np.concatenate([np.full((len(rest), 1), x0, dtype=np.int64), rest], axis=1)
        ok = np.ones(len(X), dtype=bool)
        for A, rho2 in constraints:
            A = np.array(A, dtype=np.int64)
            lim = Fraction(T) ** 2 * Fraction(rho2)
            v = np.einsum("ij,jk,ik->i", X, A, X)
            # v < lim  <=>  v * den < num
            ok &= v * lim.denominator < lim.numerator
        Y = D * X + s
        q = np.einsum("ij,jk,ik->i", Y, Mi, Y)
        # lo < q < hi with rational lo, hi
        ok &= q * lo.denominator > lo.numerator
        ok &= q * hi.denominator < hi.numerator
        total += int(ok.sum())
    return total


def best_rational_scan(x: Fraction, N: int) -> Fraction:
    """min over 1 <= q <= N of |x - p/q| by a direct scan."""
    best = None
    for q in range(1, N + 1):
        p = math.floor(x * q + Fraction(1, 2))
        e = abs(x - Fraction(p, q))
        if best is None or e < best:
            best = e
    return best


def dioph_quality_scan(xi: Sequence, delta: float) -> Fraction:
    """Per-coordinate direct-scan quality with denominators q < 1/delta."""
    inv = 1 / Fraction(delta)
    N = math.floor(inv) - (1 if math.floor(inv) == inv else 0)
    return max(best_rational_scan(Fraction(x), N) for x in xi)


def shell_volume_exact_22(T: float) -> float:
    """Vol{|x| < T, -1 < x1^2 + x2^2 - x3^2 - x4^2 < 1} in R^4 for T >= 1."""
    return math.pi**2 * (T * T - 0.5)
