"""Rational subspaces of quadratic spaces.

Plücker coordinates, the splitting of Lambda^2 R^4 into two SO(Q)-invariant
halves, null and quasinull planes, exceptional affine planes of shifted forms,
and the null vectors of the ternary split form.

Wedge coordinates of 2-vectors in R^4 are ordered e12, e13, e14, e23, e24, e34.
"""

from __future__ import annotations

import enum
import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .forms import FormError, InhomForm, SymmetricForm, determinant, signature
from .intlinalg import (
    EnumerationCapError,
    complete_basis,
    column_echelon,
    hnf_rows,
    integer_kernel,
    primitive,
    saturate,
    short_vectors,
    vgcd,
)
from .numbers import Surd, exact_root

PAIRS = list(itertools.combinations(range(4), 2))

# v ^ w = w^T A v in Lambda^4 R^4 = R e1234
WEDGE_PAIRING = np.array(
    [
        [0, 0, 0, 0, 0, 1],
        [0, 0, 0, 0, -1, 0],
        [0, 0, 0, 1, 0, 0],
        [0, 0, 1, 0, 0, 0],
        [0, -1, 0, 0, 0, 0],
        [1, 0, 0, 0, 0, 0],
    ]
)

HERMITE_2 = 2 / math.sqrt(3)


class DependentVectorsWarning(UserWarning):
    pass


# ---------------------------------------------------------------- Plücker algebra


def wedge(vectors: Sequence[Sequence[int]]) -> tuple:
    """Plücker vector of d vectors: all d x d minors, columns in lexicographic order."""
    V = [list(v) for v in vectors]
    d = len(V)
    n = len(V[0])
    out = []
    for cols in itertools.combinations(range(n), d):
        out.append(_det([[V[r][c] for c in cols] for r in range(d)]))
    return tuple(out)


def _det(m):
    if len(m) == 1:
        return m[0][0]
    if len(m) == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return sum((-1) ** j * m[0][j] * _det([row[:j] + row[j + 1 :] for row in m[1:]]) for j in range(len(m)))


def wedge2(v1: Sequence, v2: Sequence) -> np.ndarray:
    """v1 ^ v2 in coordinates (e12, e13, e14, e23, e24, e34).

    Dependent inputs give the zero vector and a DependentVectorsWarning.
    """
    if len(v1) != 4 or len(v2) != 4:
        raise ValueError("wedge2 takes two 4-vectors")
    w = np.array([v1[i] * v2[j] - v1[j] * v2[i] for i, j in PAIRS])
    if not np.any(w):
        warnings.warn("wedge of dependent vectors is zero", DependentVectorsWarning, stacklevel=2)
    return w


def plucker_relation(w: Sequence) -> object:
    """w1 w6 - w2 w5 + w3 w4, which vanishes exactly on decomposable 2-vectors."""
    return w[0] * w[5] - w[1] * w[4] + w[2] * w[3]


def second_compound(g) -> np.ndarray:
    """Matrix of Lambda^2 g: (g u) ^ (g v) = C2(g) (u ^ v)."""
    g = np.asarray(g)
    dt = object if g.dtype == object else float
    C = np.empty((6, 6), dtype=dt)
    for r, (i, j) in enumerate(PAIRS):
        for c, (k, l) in enumerate(PAIRS):
            C[r, c] = g[i, k] * g[j, l] - g[i, l] * g[j, k]
    return C


@dataclass(frozen=True)
class RationalSubspace:
    """A rational subspace, stored through the Hermite basis of L cap Z^n."""

    basis: tuple[tuple[int, ...], ...]

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence]) -> "RationalSubspace":
        sat = saturate([list(v) for v in vectors])
        if len(sat) != len(vectors):
            raise ValueError("vectors are linearly dependent")
        return cls(tuple(hnf_rows(sat)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def dim_ambient(self) -> int:
        return len(self.basis[0])

    @property
    def wedge(self) -> tuple:
        return wedge(self.basis)

    @property
    def norm(self) -> float:
        """|v^L|, the covolume of L cap Z^n."""
        return math.sqrt(sum(int(x) ** 2 for x in self.wedge))

    def annihilator(self) -> list[tuple[int, ...]]:
        """Integral basis of {w in Z^n : w . v = 0 for all v in L}."""
        return integer_kernel(self.basis)

    def to_dict(self) -> dict:
        return {"basis": [list(v) for v in self.basis], "wedge": [int(x) for x in self.wedge]}


# ---------------------------------------------------------------- invariant split


class NullType(enum.Enum):
    NullFirstType = "first"
    NullSecondType = "second"
    NotNull = "not-null"


@dataclass
class InvariantSplit:
    V1_basis: np.ndarray
    V2_basis: np.ndarray
    ordering_tag: str
    J: np.ndarray
    scale: float
    pi1: np.ndarray
    pi2: np.ndarray
    exact_pi: tuple | None = None

    def project(self, w) -> tuple[np.ndarray, np.ndarray]:
        w = np.asarray(w, dtype=float)
        return self.pi1 @ w, self.pi2 @ w

    def norms(self, w) -> tuple[float, float]:
        p1, p2 = self.project(w)
        return float(np.linalg.norm(p1)), float(np.linalg.norm(p2))


def _as_exact_rational(q: SymmetricForm):
    if q.mode != "rational":
        return None
    return [[Fraction(e) for e in row] for row in q.entries]


def _frac_inv(M):
    n = len(M)
    A = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(M)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [r[n:] for r in A]


def invariant_split(q: SymmetricForm) -> InvariantSplit:
    """The SO(Q)-invariant splitting Lambda^2 R^4 = V1 + V2 for a (2,2) form.

    J = C2(M)^-1 A satisfies J^2 = det(M)^-1; V1 and V2 are its eigenspaces for
    +det^-1/2 and -det^-1/2.  With this sign, e12 lies in V1 for B4, and the
    labels are carried to other forms by orientation-preserving congruence.
    """
    if q.dim != 4:
        raise FormError("the invariant split is defined for forms in 4 variables")
    sig = signature(q)
    if (sig.positive, sig.negative) != (2, 2):
        raise FormError(f"need signature (2,2), got {tuple(sig)}")
    M = q.matrix()
    G6 = second_compound(M)
    J = np.linalg.solve(G6, WEDGE_PAIRING.astype(float))
    scale = 1.0 / math.sqrt(np.linalg.det(M))
    pi1 = 0.5 * (np.eye(6) + J / scale)
    pi2 = 0.5 * (np.eye(6) - J / scale)
    exact = None
    Mq = _as_exact_rational(q)
    if Mq is not None:
        det = determinant(q)
        root = exact_root(det, 2)
        if root is not None:
            Mo = np.array(Mq, dtype=object)
            G6q = second_compound(Mo)
            Gi = _frac_inv(G6q.tolist())
            Jq = [[sum(Gi[i][k] * int(WEDGE_PAIRING[k][j]) for k in range(6)) for j in range(6)] for i in range(6)]
            lam = 1 / root
            p1 = [[(Fraction(int(i == j)) + Jq[i][j] / lam) / 2 for j in range(6)] for i in range(6)]
            p2 = [[(Fraction(int(i == j)) - Jq[i][j] / lam) / 2 for j in range(6)] for i in range(6)]
            exact = (p1, p2)
    V1 = _column_space(pi1)
    V2 = _column_space(pi2)
    return InvariantSplit(V1, V2, "V1 = +eigenspace; contains e12 for B4", J, scale, pi1, pi2, exact)


def _column_space(P: np.ndarray) -> np.ndarray:
    u, s, _ = np.linalg.svd(P)
    return u[:, : int(np.sum(s > 1e-9 * s.max()))].T


def restriction_vanishes(q: SymmetricForm, basis: Sequence[Sequence[int]], tol: float = 1e-9) -> bool:
    """Q restricted to span(basis) is identically zero (exact unless Q is floating)."""
    from .forms import evaluate

    vs = [list(map(int, v)) for v in basis]
    tests = list(vs) + [[a + b for a, b in zip(u, v)] for u, v in itertools.combinations(vs, 2)]
    zero = InhomForm.homogeneous_only(q)
    scale = max(np.abs(q.matrix()).max(), 1e-300)
    for v in tests:
        val = evaluate(zero, v)
        if isinstance(val, float):
            if abs(val) > tol * scale * max(1, sum(x * x for x in v)):
                return False
        elif val != 0:
            return False
    return True


def null_criterion(q: SymmetricForm, L: RationalSubspace, split: InvariantSplit | None = None) -> NullType:
    """Classify a rational plane: null of first type (pi2(v^L) = 0), second type, or not null."""
    if L.dim != 2 or L.dim_ambient != 4:
        raise ValueError("null_criterion expects a 2-plane in R^4")
    split = split or invariant_split(q)
    w = L.wedge
    if split.exact_pi is not None:
        p1, p2 = split.exact_pi
        z1 = all(sum(p1[i][j] * w[j] for j in range(6)) == 0 for i in range(6))
        z2 = all(sum(p2[i][j] * w[j] for j in range(6)) == 0 for i in range(6))
        if z2:
            return NullType.NullFirstType
        if z1:
            return NullType.NullSecondType
        return NullType.NotNull
    if not restriction_vanishes(q, L.basis):
        return NullType.NotNull
    n1, n2 = split.norms(w)
    return NullType.NullFirstType if n2 <= n1 else NullType.NullSecondType


@dataclass
class QuasinullReport:
    quasinull: bool
    norm_pi1: float
    norm_pi2: float
    kind: str  # "first" when pi2 is the small projection, else "second"

    @property
    def product(self) -> float:
        return self.norm_pi1 * self.norm_pi2


def quasinull_test(q: SymmetricForm, L: RationalSubspace, mu1: float, split: InvariantSplit | None = None) -> QuasinullReport:
    """L is mu1-quasinull when |pi1(v^L)| |pi2(v^L)| < mu1."""
    if not 0 < mu1 < 1:
        raise ValueError("mu1 must lie in (0, 1)")
    split = split or invariant_split(q)
    n1, n2 = split.norms(L.wedge)
    if split.exact_pi is not None:
        kind = null_criterion(q, L, split)
        if kind is NullType.NullFirstType:
            n2 = 0.0
        elif kind is NullType.NullSecondType:
            n1 = 0.0
    return QuasinullReport(n1 * n2 < mu1, n1, n2, "first" if n2 <= n1 else "second")


# ---------------------------------------------------------------- B4 null planes


def _primitive_pairs(T: float, lo_frac: float = 0.5):
    """Primitive (m, n) up to sign with lo_frac*T <= m^2 + n^2 <= T."""
    r = int(math.isqrt(int(math.floor(T))))
    out = []
    for m in range(0, r + 1):
        for n in range(-r, r + 1):
            if m == 0 and n <= 0:
                continue
            s = m * m + n * n
            if lo_frac * T <= s <= T and math.gcd(m, n) == 1:
                out.append((m, n))
    return out


def enumerate_null_first_type(T: float) -> list[RationalSubspace]:
    """First-type null planes of B4 = x1 x4 - x2 x3 with T/2 <= |v^L| <= T.

    The plane for primitive (m, n) has standard basis (m,0,n,0), (0,m,0,n), and |v^L| = m^2 + n^2.
    """
    if T < 1:
        return []
    return [RationalSubspace(tuple(hnf_rows([(m, 0, n, 0), (0, m, 0, n)]))) for m, n in _primitive_pairs(T)]


def enumerate_null_second_type(T: float) -> list[RationalSubspace]:
    """Second-type null planes of B4: basis (m,n,0,0), (0,0,m,n)."""
    if T < 1:
        return []
    return [RationalSubspace(tuple(hnf_rows([(m, n, 0, 0), (0, 0, m, n)]))) for m, n in _primitive_pairs(T)]


def _plane_from_wedge(w: Sequence[int]) -> RationalSubspace | None:
    """The plane of a decomposable integral 2-vector (None when it is not decomposable)."""
    w = [int(x) for x in w]
    if plucker_relation(w) != 0 or not any(w):
        return None
    W = [[0] * 4 for _ in range(4)]
    for (i, j), x in zip(PAIRS, w):
        W[i][j] = x
        W[j][i] = -x
    cols = [[W[r][c] for r in range(4)] for c in range(4) if any(W[r][c] for r in range(4))]
    sat = saturate(cols)
    if len(sat) != 2:
        return None
    return RationalSubspace(tuple(hnf_rows(sat)))


def enumerate_quasinull(q: SymmetricForm, mu1: float, T: float, cap: int = 5_000_000) -> list[RationalSubspace]:
    """mu1-quasinull rational planes with T/2 <= |v^L| <= T.

    Searches primitive decomposable integral 2-vectors w in the two tubes
    {|w| <= T, |pi_j w| <= 4 mu1 / T}, which contain every candidate, then
    keeps the ones passing the quasinull test.
    """
    if T < 1:
        return []
    if T > 1e4:
        raise EnumerationCapError("T above the desk-scale cap 1e4")
    split = invariant_split(q)
    delta = 4.0 * mu1 / T
    found: dict[tuple, RationalSubspace] = {}
    for P in (split.pi1, split.pi2):
        # x^T (I/T^2 + P^T P / delta^2) x <= 2 contains the tube; write it as |B x| <= sqrt(2)
        B = np.linalg.qr(np.vstack([np.eye(6) / T, P / delta]), mode="r")
        for w in short_vectors(B, math.sqrt(2.0), cap):
            s = int(np.dot(w, w))
            if not (T * T / 4 <= s <= T * T) or vgcd(w) != 1:
                continue
            L = _plane_from_wedge(w)
            if L is None or L.basis in found:
                continue
            if quasinull_test(q, L, mu1, split).quasinull:
                found[L.basis] = L
    return [found[k] for k in sorted(found)]


# ---------------------------------------------------------------- null subspaces


def _components(q: SymmetricForm) -> list[list[list[Fraction]]]:
    """Rational matrices M_k with M = M_0 + sum_k t_k M_k over the tagged atoms t_k."""
    labels = sorted({lab for row in q.entries for e in row if isinstance(e, Surd) for lab, _ in e.terms})
    n = q.dim
    comps = [[[Fraction(0)] * n for _ in range(n)] for _ in range(len(labels) + 1)]
    for i in range(n):
        for j in range(n):
            e = q.entries[i][j]
            if isinstance(e, Surd):
                comps[0][i][j] = e.const
                for lab, c in e.terms:
                    comps[1 + labels.index(lab)][i][j] = c
            else:
                comps[0][i][j] = Fraction(e)
    return [c for c in comps if any(x != 0 for row in c for x in row)]


def _int_matrix(M) -> np.ndarray:
    den = 1
    for row in M:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    return np.array([[int(x * den) for x in row] for row in M], dtype=np.int64)


def primitive_null_vectors(q: SymmetricForm, radius: float) -> list[tuple[int, ...]]:
    """Primitive v in Z^n with |v| <= radius and Q(v) = 0, up to sign (exact forms only)."""
    if q.mode == "float":
        raise FormError("exact null vectors need a rational or tagged form")
    n = q.dim
    r = int(math.floor(radius))
    comps = [_int_matrix(c) for c in _components(q)]
    grids = np.meshgrid(*[np.arange(-r, r + 1)] * n, indexing="ij")
    V = np.stack(grids, axis=-1).reshape(-1, n)
    V = V[np.sum(V * V, axis=1) <= radius * radius]
    ok = np.ones(len(V), dtype=bool)
    for K in comps:
        ok &= np.einsum("ij,jk,ik->i", V, K, V) == 0
    out = set()
    for v in V[ok]:
        if not v.any() or vgcd(v) != 1:
            continue
        out.add(primitive(v))
    return sorted(out)


def _binary_roots(a: Fraction, b: Fraction, c: Fraction) -> list[tuple[int, int]] | None:
    """Rational isotropic directions (s:t) of a s^2 + 2 b s t + c t^2; None if the form is zero."""
    if a == 0 and b == 0 and c == 0:
        return None
    if a == 0:
        # t (2 b s + c t)
        roots = [(1, 0)]
        if b != 0:
            roots.append(_prim_frac(-c, 2 * b))
        return _dedupe_dirs(roots)
    disc = b * b - a * c
    if disc < 0:
        return []
    root = exact_root(disc, 2) if disc > 0 else Fraction(0)
    if root is None:
        return []
    return _dedupe_dirs([_prim_frac((-b + sgn * root) / a, Fraction(1)) for sgn in (1, -1)])


def _prim_frac(s: Fraction, t: Fraction) -> tuple[int, int]:
    s, t = Fraction(s), Fraction(t)
    den = s.denominator * t.denominator // math.gcd(s.denominator, t.denominator)
    return primitive((int(s * den), int(t * den)))


def _dedupe_dirs(dirs):
    out = []
    for d in dirs:
        if d not in out:
            out.append(d)
    return out


def _rational_kernel_rows(rows: list[list[Fraction]], n: int) -> list[tuple[int, ...]]:
    rows = [r for r in rows if any(x != 0 for x in r)]
    if not rows:
        return [tuple(int(i == j) for j in range(n)) for i in range(n)]
    return integer_kernel(rows)


def null_planes_through(q: SymmetricForm, v: Sequence[int]) -> list[RationalSubspace]:
    """Rational 2-dim null subspaces of a 4-variable exact form containing the null vector v."""
    comps = _components(q)
    v = [int(x) for x in v]
    rows = [[sum(C[i][j] * v[j] for j in range(4)) for i in range(4)] for C in comps]
    K = _rational_kernel_rows(rows, 4)
    if len(K) < 2:
        return []
    if len(K) == 2:
        return [RationalSubspace(tuple(hnf_rows(K)))] if restriction_vanishes(q, K) else []
    # K has rank 3 and contains v; complete v to a basis (v, u1, u2) of K cap Z^4
    Kt = np.array(K, dtype=object)
    coords = _solve_integral(Kt, v)
    U = complete_basis([coords])
    u1 = [int(x) for x in (U[:, 1] @ Kt)]
    u2 = [int(x) for x in (U[:, 2] @ Kt)]
    dirs = None
    for C in comps:
        a = _quad(C, u1, u1)
        b = _quad(C, u1, u2)
        c = _quad(C, u2, u2)
        roots = _binary_roots(a, b, c)
        if roots is None:
            continue
        dirs = roots if dirs is None else [d for d in dirs if d in roots]
    if dirs is None:
        return []
    out = []
    for s, t in dirs:
        u = [s * x + t * y for x, y in zip(u1, u2)]
        out.append(RationalSubspace.from_vectors([v, u]))
    return out


def _quad(C, x, y) -> Fraction:
    return sum(C[i][j] * x[i] * y[j] for i in range(len(x)) for j in range(len(y)))


def _solve_integral(K: np.ndarray, v: Sequence[int]) -> list[int]:
    """Integer coordinates c with c @ K = v (rows of K form a lattice basis containing v)."""
    k = K.shape[0]
    A = [[Fraction(int(K[r][c])) for r in range(k)] for c in range(K.shape[1])]
    sol = _frac_solve(A, [Fraction(x) for x in v])
    if any(x.denominator != 1 for x in sol):
        raise ValueError("vector is not in the lattice")
    return [int(x) for x in sol]


def _frac_solve(A, b):
    """Solve the consistent overdetermined system A x = b exactly."""
    m, n = len(A), len(A[0])
    M = [row[:] + [bb] for row, bb in zip(A, b)]
    piv_cols = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(m):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        piv_cols.append(c)
        r += 1
    if any(M[i][n] != 0 for i in range(r, m)):
        raise ValueError("inconsistent system")
    x = [Fraction(0)] * n
    for i, c in enumerate(piv_cols):
        x[c] = M[i][n]
    return x


def null_subspaces(q: SymmetricForm, T_search: float, cap: int = 5_000_000) -> list[RationalSubspace]:
    """Rational null subspaces with |v^L| <= T_search.

    Planes (n = 4): every such plane contains a primitive null vector v with
    |v|^2 <= (2/sqrt 3) |v^L| (Hermite), and each null v lies in at most two
    null planes, read off from the isotropic lines of Q on v^perp / v.
    Lines (n = 3, signature (2,1)): primitive null vectors with |v| <= T_search.
    Floating forms fall back to a tube search in Lambda^2 Z^4.
    """
    n = q.dim
    if n == 3:
        if q.mode == "float":
            raise FormError("null lines of a floating form are not certified; use an exact form")
        return [RationalSubspace((v,)) for v in primitive_null_vectors(q, T_search)]
    if n != 4:
        raise FormError("null subspaces are implemented for 3 and 4 variables")
    if q.mode == "float":
        return _null_planes_float(q, T_search, cap)
    found: dict[tuple, RationalSubspace] = {}
    for v in primitive_null_vectors(q, math.sqrt(HERMITE_2 * T_search)):
        for L in null_planes_through(q, v):
            if L.norm <= T_search + 1e-9:
                found.setdefault(L.basis, L)
    return [found[k] for k in sorted(found)]


def _null_planes_float(q: SymmetricForm, T_search: float, cap: int) -> list[RationalSubspace]:
    split = invariant_split(q)
    delta = 1e-6
    found: dict[tuple, RationalSubspace] = {}
    for P in (split.pi1, split.pi2):
        # triangular factor of I/T^2 + P^T P / delta^2 without squaring the condition number
        B = np.linalg.qr(np.vstack([np.eye(6) / T_search, P / delta]), mode="r")
        for w in short_vectors(B, math.sqrt(2.0), cap):
            if not w.any() or vgcd(w) != 1 or np.dot(w, w) > T_search**2:
                continue
            L = _plane_from_wedge(w)
            if L is not None and restriction_vanishes(q, L.basis):
                found.setdefault(L.basis, L)
    return [found[k] for k in sorted(found)]


# ---------------------------------------------------------------- exceptional subspaces


@dataclass
class ExceptionalWitness:
    subspace: RationalSubspace
    integral_shift: tuple[int, ...]
    residual: float
    certificate: list[tuple[tuple[int, ...], object]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            **self.subspace.to_dict(),
            "integral_shift": list(self.integral_shift),
            "residual": self.residual,
        }


def _pairing(w: Sequence[int], xi: Sequence) -> object:
    total = Fraction(0)
    for a, x in zip(w, xi):
        if a:
            total = total + int(a) * x
    return total


def exceptional_witness(form: InhomForm, L: RationalSubspace, tol: float = 1e-8) -> ExceptionalWitness | None:
    """Certificate that xi lies in L + Z^n, or None."""
    ann = L.annihilator()
    vals = [_pairing(w, form.shift) for w in ann]
    ints = []
    residual = 0.0
    for val in vals:
        if isinstance(val, float):
            k = round(val)
            residual = max(residual, abs(val - k))
            ints.append(int(k))
        elif isinstance(val, Surd) or val.denominator != 1:
            return None
        else:
            ints.append(int(val))
    if residual >= tol:
        return None
    shift = _integral_solution(ann, ints)
    return ExceptionalWitness(L, tuple(shift), residual, list(zip(ann, vals)))


def _integral_solution(rows: list[tuple[int, ...]], rhs: list[int]) -> list[int]:
    """Integer v with rows . v = rhs, for a primitive system of rows."""
    AV, V, rank = column_echelon(rows)
    k = len(rows)
    H = [[Fraction(AV[i][j]) for j in range(k)] for i in range(k)]
    y = _frac_solve(H, [Fraction(r) for r in rhs])
    if any(t.denominator != 1 for t in y):
        raise ValueError("no integral solution")
    n = len(V)
    return [sum(V[i][j] * int(y[j]) for j in range(k)) for i in range(n)]


def exceptional_subspaces(form: InhomForm, T_search: float) -> list[ExceptionalWitness]:
    """Exceptional subspaces: rational null L with |v^L| <= T_search and xi in L + Z^n."""
    q = form.homogeneous
    sig = signature(q)
    if (sig.positive, sig.negative) not in ((2, 2), (2, 1)):
        raise FormError("exceptional subspaces are defined for signatures (2,2) and (2,1)")
    out = []
    for L in null_subspaces(q, T_search):
        w = exceptional_witness(form, L)
        if w is not None:
            out.append(w)
    return out


# ---------------------------------------------------------------- (2,1) null vectors


def null_vectors_21(T: float, model: str = "matrix") -> list[tuple[int, int, int]]:
    """Primitive null vectors from primitive (m, n) up to sign.

    model="matrix": (m^2, mn, n^2), the symmetric matrix [[m^2, mn], [mn, n^2]]
    in coordinates (x, y, z) = (a11, a12, a22), null for xz - y^2; the size is
    its matrix norm m^2 + n^2.
    model="q0": the primitive null vector of 2xz - y^2 on the same line through
    (2m^2, 2mn, n^2), i.e. that vector for odd n and (m^2, mn, n^2/2) for even n.
    Vectors are kept when their Euclidean norm is at most T.
    """
    if T < 1:
        return []
    out = []
    r = int(math.isqrt(int(math.floor(2 * T)))) + 1
    for m in range(0, r + 1):
        for n in range(-r, r + 1):
            if (m == 0 and n <= 0) or math.gcd(m, n) != 1:
                continue
            if model == "matrix":
                v = (m * m, m * n, n * n)
                size = m * m + n * n
            elif model == "q0":
                v = (2 * m * m, 2 * m * n, n * n) if n % 2 else (m * m, m * n, n * n // 2)
                size = math.sqrt(sum(x * x for x in v))
            else:
                raise ValueError(f"unknown model {model!r}")
            if size <= T:
                out.append(v)
    return sorted(out)


def fractional_pairing_21(xi: Sequence, m: int, n: int) -> float:
    """Distance to the nearest integer of n^2 xi_1 - 2 m n xi_2 + m^2 xi_3."""
    if math.gcd(m, n) != 1:
        raise ValueError("(m, n) must be coprime")
    val = n * n * xi[0] - 2 * m * n * xi[1] + m * m * xi[2]
    if isinstance(val, Fraction):
        frac = val - math.floor(val)
        return float(min(frac, 1 - frac))
    val = float(val)
    return abs(val - round(val))
