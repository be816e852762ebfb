"""Integer and rational linear algebra: primitive vectors, Hermite forms,
integer kernels, basis completion and LLL reduction.

All integer routines use Python ints, so there is no overflow.
"""

from __future__ import annotations

import math
from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np


def vgcd(v: Sequence[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g


def primitive(v: Sequence[int]) -> tuple[int, ...]:
    """v / gcd(v), sign-normalized so the first nonzero entry is positive."""
    g = vgcd(v)
    if g == 0:
        raise ValueError("zero vector has no primitive part")
    w = [int(x) // g for x in v]
    for x in w:
        if x != 0:
            if x < 0:
                w = [-y for y in w]
            break
    return tuple(w)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def column_echelon(a: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], int]:
    """Unimodular column operations: returns (A V, V, rank) with A V lower echelon.

    The last ``n - rank`` columns of ``V`` form a basis of the integer kernel of ``A``.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    A = [[int(x) for x in row] for row in a]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def colop(i, j, p, q, r, s):
        # (col_i, col_j) <- (p col_i + q col_j, r col_i + s col_j)
        for M in (A, V):
            for row in M:
                ci, cj = row[i], row[j]
                row[i], row[j] = p * ci + q * cj, r * ci + s * cj

    rank = 0
    for row in range(m):
        if rank == n:
            break
        for j in range(rank + 1, n):
            if A[row][j] == 0:
                continue
            x, y = A[row][rank], A[row][j]
            g, s, t = _xgcd(x, y)
            # new col_rank = s col_rank + t col_j ; new col_j = (-y/g) col_rank + (x/g) col_j
            colop(rank, j, s, t, -y // g, x // g)
        if A[row][rank] != 0:
            if A[row][rank] < 0:
                _negate_col(A, V, rank)
            rank += 1
    return A, V, rank


def _negate_col(A, V, i):
    for M in (A, V):
        for row in M:
            row[i] = -row[i]


def integer_kernel(a: Sequence[Sequence]) -> list[tuple[int, ...]]:
    """Basis of {x in Z^n : A x = 0} for a rational matrix A (rows)."""
    rows = []
    for r in a:
        fr = [Fraction(x) for x in r]
        den = 1
        for x in fr:
            den = den * x.denominator // gcd(den, x.denominator)
        rows.append([int(x * den) for x in fr])
    if not rows:
        raise ValueError("empty matrix")
    n = len(rows[0])
    _, V, rank = column_echelon(rows)
    basis = [tuple(V[i][j] for i in range(n)) for j in range(rank, n)]
    return hnf_rows(basis) if basis else []


def rational_nullspace(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    """Basis (as rows) of the right nullspace over Q."""
    A = [[Fraction(x) for x in r] for r in rows]
    m = len(A)
    n = len(A[0])
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    free = [c for c in range(n) if c not in pivots]
    out = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -A[i][f]
        out.append(v)
    return out


def saturate(rows: Sequence[Sequence]) -> list[tuple[int, ...]]:
    """Integral basis (HNF) of span(rows) intersected with Z^n."""
    perp = rational_nullspace(rows)
    n = len(rows[0])
    if not perp:
        return [tuple(int(i == j) for j in range(n)) for i in range(n)]
    return integer_kernel(perp)


def hnf_rows(basis: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Row Hermite normal form of an integer matrix of full row rank (canonical lattice basis)."""
    B = [[int(x) for x in r] for r in basis]
    k = len(B)
    n = len(B[0])
    row = 0
    for col in range(n):
        if row == k:
            break
        for i in range(row + 1, k):
            if B[i][col] == 0:
                continue
            g, s, t = _xgcd(B[row][col], B[i][col])
            a, b = B[row][col] // g, B[i][col] // g
            r0 = [s * x + t * y for x, y in zip(B[row], B[i])]
            r1 = [-b * x + a * y for x, y in zip(B[row], B[i])]
            B[row], B[i] = r0, r1
        if B[row][col] == 0:
            continue
        if B[row][col] < 0:
            B[row] = [-x for x in B[row]]
        p = B[row][col]
        for i in range(row):
            q = B[i][col] // p
            if q:
                B[i] = [x - q * y for x, y in zip(B[i], B[row])]
        row += 1
    if row < k:
        raise ValueError("rows are linearly dependent")
    return [tuple(r) for r in B]


def complete_basis(rows: Sequence[Sequence[int]]) -> np.ndarray:
    """Unimodular integer matrix whose first k columns are the given primitive system."""
    k = len(rows)
    n = len(rows[0])
    AV, V, rank = column_echelon(rows)
    if rank != k:
        raise ValueError("rows are dependent")
    H = [AV[i][:k] for i in range(k)]
    if abs(_int_det(H)) != 1:
        raise ValueError("rows are not a primitive system (do not extend to a basis of Z^n)")
    W = _int_inverse(V)
    W[:k] = [list(map(int, r)) for r in rows]
    U = np.array(W, dtype=object).T
    return U


def _int_det(M) -> int:
    n = len(M)
    A = [[Fraction(x) for x in r] for r in M]
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return int(det)


def _int_inverse(M) -> list[list[int]]:
    n = len(M)
    A = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(M)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    out = [[x for x in r[n:]] for r in A]
    if any(x.denominator != 1 for r in out for x in r):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in r] for r in out]


def int_inverse(M) -> np.ndarray:
    return np.array(_int_inverse([[int(x) for x in r] for r in M]), dtype=object)


def lll(basis: np.ndarray, delta: float = 0.99) -> tuple[np.ndarray, np.ndarray]:
    """LLL-reduce the columns of a real basis.

    Returns (reduced, U) with reduced = basis @ U and U unimodular (int64).
    """
    B = np.array(basis, dtype=float).copy()
    n = B.shape[1]
    U = np.eye(n, dtype=np.int64)
    k = 1

    def gso(B):
        Bs = np.zeros_like(B)
        mu = np.zeros((n, n))
        norms = np.zeros(n)
        for i in range(n):
            v = B[:, i].copy()
            for j in range(i):
                mu[i, j] = B[:, i] @ Bs[:, j] / norms[j]
                v -= mu[i, j] * Bs[:, j]
            Bs[:, i] = v
            norms[i] = v @ v
        return mu, norms

    mu, norms = gso(B)
    it = 0
    while k < n:
        it += 1
        if it > 10000:
            break
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                B[:, k] -= q * B[:, j]
                U[:, k] -= q * U[:, j]
                mu[k, : j + 1] -= q * np.append(mu[j, :j], 1.0)
        if norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            B[:, [k - 1, k]] = B[:, [k, k - 1]]
            U[:, [k - 1, k]] = U[:, [k, k - 1]]
            mu, norms = gso(B)
            k = max(k - 1, 1)
    return B, U


class EnumerationCapError(RuntimeError):
    """Raised when a lattice enumeration would visit more nodes than allowed."""


def short_vectors(basis: np.ndarray, radius: float, cap: int = 5_000_000) -> np.ndarray:
    """All integer c with |basis @ c| <= radius (Fincke-Pohst on an LLL-reduced basis).

    Returns the coefficient vectors (rows, int64) in the coordinates of ``basis``.
    """
    B = np.array(basis, dtype=float)
    n = B.shape[1]
    Bred, U = lll(B)
    R = np.linalg.qr(Bred, mode="r")
    r2 = float(radius) ** 2 * (1 + 1e-12) + 1e-300
    found: list[np.ndarray] = []
    nodes = 0
    c = np.zeros(n, dtype=np.int64)

    def level(k: int, rem: float):
        nonlocal nodes
        center = -float(R[k, k + 1 :] @ c[k + 1 :]) / R[k, k]
        half = math.sqrt(max(rem, 0.0)) / abs(R[k, k])
        lo, hi = math.ceil(center - half), math.floor(center + half)
        if hi < lo:
            return
        if k == 0:
            ks = np.arange(lo, hi + 1)
            resid = R[0, 0] * (ks - center)
            ks = ks[resid * resid <= rem]
            nodes += len(ks)
            if nodes > cap:
                raise EnumerationCapError(f"more than {cap} lattice points")
            if len(ks):
                block = np.tile(c, (len(ks), 1))
                block[:, 0] = ks
                found.append(block)
            return
        for v in range(lo, hi + 1):
            nodes += 1
            if nodes > cap:
                raise EnumerationCapError(f"more than {cap} enumeration nodes")
            c[k] = v
            t = R[k, k] * (v - center)
            level(k - 1, rem - t * t)
        c[k] = 0

    level(n - 1, r2)
    if not found:
        return np.zeros((0, n), dtype=np.int64)
    C = np.concatenate(found)
    return C @ U.T
