"""Star-shaped regions and lattice-point counting for shifted quadratic forms.

The counting kernel loops over the first n-1 coordinates (vectorized per slab)
and solves for the last coordinate analytically.  For each outer point it
counts the integers lying in a *certain* set, meaning the solution set shrunk
by a safety margin.  It then evaluates directly the few integers lying in thin
bands around the boundaries.  With rational inputs that direct evaluation is
exact integer arithmetic.  Otherwise a point within 1e-9 of a boundary is
counted and recorded in ``CountResult.flagged``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .forms import DimensionError, FormError, InhomForm, signature
from .numbers import Surd

BOUNDARY_TOL = 1e-9


class IntervalError(ValueError):
    """Raised for an empty or reversed interval (a, b)."""


def _check_interval(a, b):
    if not a < b:
        raise IntervalError(f"interval (a, b) = ({a}, {b}) must satisfy a < b")


# ---------------------------------------------------------------- regions


class StarRegion(ABC):
    """Omega = {v : |v| < nu(v/|v|)}, with dilates T * Omega."""

    dim: int

    @abstractmethod
    def radial(self, u: np.ndarray) -> np.ndarray:
        """nu on unit vectors (rows of ``u``)."""

    @abstractmethod
    def bound_radius(self) -> float:
        """max nu, i.e. Omega lies in the ball of this radius."""

    def gauge(self, x: np.ndarray) -> np.ndarray:
        """|x| / nu(x/|x|), zero at the origin; x in T*Omega iff gauge(x) < T."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.linalg.norm(x, axis=1)
        out = np.zeros(len(x))
        nz = r > 0
        if np.any(nz):
            out[nz] = r[nz] / self.radial(x[nz] / r[nz, None])
        return out

    def quadratic_constraints(self) -> list[tuple[np.ndarray, float]] | None:
        """(A, rho) pairs with x in T*Omega iff x^T A x < (T rho)^2 for every pair.

        None for regions without such a description.
        """
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class QuadraticGauge(StarRegion):
    """Intersection of solid ellipsoidal cylinders x^T A_j x < (T rho_j)^2."""

    dim: int
    constraints: tuple[tuple[np.ndarray, float], ...]

    def __post_init__(self):
        total = np.zeros((self.dim, self.dim))
        for A, rho in self.constraints:
            if A.shape != (self.dim, self.dim) or not np.array_equal(A, A.T):
                raise ValueError("constraint matrices must be symmetric and match dim")
            if np.linalg.eigvalsh(A).min() < -1e-12 * max(1.0, np.abs(A).max()):
                raise ValueError("constraint matrices must be positive semidefinite")
            if rho <= 0:
                raise ValueError("radius must be positive")
            total += A / rho**2
        if np.linalg.eigvalsh(total).min() <= 0:
            raise ValueError("region is unbounded")

    def quadratic_constraints(self):
        return list(self.constraints)

    def radial(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        vals = [np.einsum("ij,jk,ik->i", u, A, u) / rho**2 for A, rho in self.constraints]
        return 1.0 / np.sqrt(np.max(vals, axis=0))

    def gauge(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        vals = [np.einsum("ij,jk,ik->i", x, A, x) / rho**2 for A, rho in self.constraints]
        return np.sqrt(np.maximum(np.max(vals, axis=0), 0.0))

    def bound_radius(self) -> float:
        # sup |x|^2 over the region is at most sum_j of the per-block bounds when the
        # constraints act on complementary coordinates; in general use the sum matrix.
        total = sum(A / rho**2 for A, rho in self.constraints)
        lam = np.linalg.eigvalsh(total).min()
        return float(math.sqrt(len(self.constraints) / lam))

    def exact_inside(self, x: np.ndarray, T) -> np.ndarray:
        """Membership decided in exact rational arithmetic on the stored binary values."""
        Tf = Fraction(T)
        ok = np.ones(len(x), dtype=bool)
        xo = np.asarray(x, dtype=np.int64).astype(object)
        for A, rho in self.constraints:
            fr = [[Fraction(float(v)) for v in row] for row in A]
            den = 1
            for row in fr:
                for v in row:
                    den = den * v.denominator // math.gcd(den, v.denominator)
            Ai = np.array([[int(v * den) for v in row] for row in fr], dtype=object)
            lhs = np.sum((xo @ Ai) * xo, axis=1)
            bound = (Tf * Fraction(rho)) ** 2 * den
            ok &= np.array([Fraction(int(v)) < bound for v in lhs], dtype=bool)
        return ok


def Ball(r: float = 1.0, dim: int = 4) -> QuadraticGauge:
    g = QuadraticGauge(dim, ((np.eye(dim), float(r)),))
    object.__setattr__(g, "kind", ("ball", float(r)))
    return g


def Ellipsoid(matrix) -> QuadraticGauge:
    """{x : x^T A x < 1} for positive-definite A."""
    A = np.array(matrix, dtype=float)
    if np.linalg.eigvalsh(A).min() <= 0:
        raise ValueError("ellipsoid matrix must be positive definite")
    g = QuadraticGauge(len(A), ((A, 1.0),))
    object.__setattr__(g, "kind", ("ellipsoid", A.tolist()))
    return g


def MaxSplit(B1, B2) -> QuadraticGauge:
    """{x : max(B1(x_1, x_2), B2(x_3, x_4)) < 1} for positive-definite 2x2 B1, B2."""
    B1 = np.array(B1, dtype=float)
    B2 = np.array(B2, dtype=float)
    k1, k2 = len(B1), len(B2)
    n = k1 + k2
    A1 = np.zeros((n, n))
    A1[:k1, :k1] = B1
    A2 = np.zeros((n, n))
    A2[k1:, k1:] = B2
    g = QuadraticGauge(n, ((A1, 1.0), (A2, 1.0)))
    object.__setattr__(g, "kind", ("maxsplit", B1.tolist(), B2.tolist()))
    return g


@dataclass(frozen=True, eq=False)
class TableFunction(StarRegion):
    """nu given by samples on the sphere, interpolated by Shepard weighting.

    Shepard interpolation reproduces the samples, is continuous and takes
    values between the smallest and largest sample.
    """

    directions: np.ndarray
    values: np.ndarray
    power: float = 4.0
    dim: int = field(init=False)

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        d = d / np.linalg.norm(d, axis=1, keepdims=True)
        v = np.asarray(self.values, dtype=float)
        if len(d) != len(v) or np.any(v <= 0):
            raise ValueError("need one positive value per direction")
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "dim", d.shape[1])
        object.__setattr__(self, "kind", ("table", d.tolist(), v.tolist(), self.power))

    def radial(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        dist = np.linalg.norm(u[:, None, :] - self.directions[None, :, :], axis=2)
        out = np.empty(len(u))
        hit = dist.min(axis=1) < 1e-14
        out[hit] = self.values[dist[hit].argmin(axis=1)]
        w = 1.0 / dist[~hit] ** self.power
        out[~hit] = (w @ self.values) / w.sum(axis=1)
        return out

    def bound_radius(self) -> float:
        return float(self.values.max())


def region_to_dict(region: StarRegion) -> dict:
    kind = getattr(region, "kind", None)
    if kind is None:
        return {
            "kind": "quadratic",
            "constraints": [[A.tolist(), rho] for A, rho in region.quadratic_constraints()],
        }
    tag = kind[0]
    if tag == "ball":
        return {"kind": "ball", "radius": kind[1], "dim": region.dim}
    if tag == "ellipsoid":
        return {"kind": "ellipsoid", "matrix": kind[1]}
    if tag == "maxsplit":
        return {"kind": "maxsplit", "B1": kind[1], "B2": kind[2]}
    return {"kind": "table", "directions": kind[1], "values": kind[2], "power": kind[3]}


def region_from_dict(obj: dict) -> StarRegion:
    kind = obj["kind"]
    if kind == "ball":
        return Ball(obj.get("radius", 1.0), obj["dim"])
    if kind == "ellipsoid":
        return Ellipsoid(obj["matrix"])
    if kind == "maxsplit":
        return MaxSplit(obj["B1"], obj["B2"])
    if kind == "table":
        return TableFunction(np.array(obj["directions"]), np.array(obj["values"]), obj.get("power", 4.0))
    if kind == "quadratic":
        return QuadraticGauge(
            len(obj["constraints"][0][0]),
            tuple((np.array(A, dtype=float), float(rho)) for A, rho in obj["constraints"]),
        )
    raise ValueError(f"unknown region kind {kind!r}")


def contains(region: StarRegion, x, T: float) -> bool:
    """x in T*Omega, i.e. |x| < T nu(x/|x|); the origin is always inside."""
    if T <= 0:
        raise ValueError("T must be positive")
    x = np.asarray(x)
    if len(x) != region.dim:
        raise DimensionError("point and region dimensions differ")
    if isinstance(region, QuadraticGauge) and np.issubdtype(x.dtype, np.integer):
        return bool(region.exact_inside(x[None, :], T)[0])
    return bool(region.gauge(x.astype(float)[None, :])[0] < T)


# ---------------------------------------------------------------- exact data


@dataclass
class _ExactForm:
    """Q_xi(x) * den == (d x + eta)^T K (d x + eta) with integer K, eta."""

    K: np.ndarray
    eta: np.ndarray
    d: int
    den: int


def _exact_data(form: InhomForm) -> _ExactForm | None:
    if not form.is_rational_input:
        return None
    entries = [e for row in form.homogeneous.entries for e in row]
    e = 1
    for v in entries:
        e = e * v.denominator // math.gcd(e, v.denominator)
    d = 1
    for v in form.shift:
        d = d * v.denominator // math.gcd(d, v.denominator)
    n = form.dim
    K = np.array([[int(form.homogeneous.entries[i][j] * e) for j in range(n)] for i in range(n)], dtype=object)
    eta = np.array([int(v * d) for v in form.shift], dtype=object)
    return _ExactForm(K, eta, d, e * d * d)


@dataclass
class CountResult:
    n_total: int
    n_tilde: int
    excluded: list[int]
    params: tuple[float, float, float]
    flagged: int = 0

    def __post_init__(self):
        if self.n_tilde + sum(self.excluded) != self.n_total:
            raise AssertionError("count bookkeeping is inconsistent")

    def to_dict(self) -> dict:
        a, b, T = self.params
        return {
            "a": a,
            "b": b,
            "T": T,
            "N": self.n_total,
            "Ntilde": self.n_tilde,
            "excluded": list(self.excluded),
            "flagged": self.flagged,
        }


class _Problem:
    """Everything the slab kernel needs, precomputed once per call."""

    def __init__(self, form: InhomForm, region: StarRegion, a, b, T):
        n = form.dim
        if n < 3:
            raise DimensionError("counting needs at least 3 variables")
        if region.dim != n:
            raise DimensionError("region and form dimensions differ")
        _check_interval(a, b)
        if not T > 0:
            raise ValueError("T must be positive")
        sig = signature(form.homogeneous)
        if sig.positive == 0 or sig.negative == 0:
            raise FormError("counting needs an indefinite form")
        self.form = form
        self.region = region
        self.n = n
        # exact bounds for the rational path, floats for the vector kernels
        self.a_exact, self.b_exact = Fraction(a), Fraction(b)
        self.a, self.b = float(a), float(b)
        self.T = float(T)
        self.exact = _exact_data(form)
        self.M = form.homogeneous.matrix()
        self.xi = form.shift_array()

        P = _solve_basis(self.M)
        self.P = P
        self.Pinv = np.round(np.linalg.inv(P)).astype(np.int64)
        Pf = P.astype(float)
        Mt = Pf.T @ self.M @ Pf
        self.xit = self.Pinv.astype(float) @ self.xi
        self.c = Mt[n - 1, n - 1]
        self.m = Mt[: n - 1, n - 1]
        self.Mo = Mt[: n - 1, : n - 1]

        R = self.T * region.bound_radius()
        self.R = R
        self.box = [int(math.floor(R * np.linalg.norm(self.Pinv[k]))) for k in range(n - 1)]

        qc = region.quadratic_constraints()
        self.line_exact = qc is not None
        if qc is None:
            qc = [(np.eye(n), region.bound_radius())]
        self.cons = []
        for A, rho in qc:
            E = Pf.T @ (A / rho**2) @ Pf
            self.cons.append((E[n - 1, n - 1], E[: n - 1, n - 1], E[: n - 1, : n - 1]))

        scale = max(np.abs(self.M).max(), 1e-300) * (R + np.abs(self.xi).sum() + 1.0) ** 2 * n * n
        self.eps_q = 2 * BOUNDARY_TOL + 1e-12 * scale
        self.eps_r = 4 * BOUNDARY_TOL * (self.T + 1.0) + 1e-12 * max(scale, self.T**2)

    # -- direct evaluation ------------------------------------------------

    def direct(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(inside, flagged) for integer points X (rows, original coordinates)."""
        if len(X) == 0:
            return np.zeros(0, bool), np.zeros(0, bool)
        flagged = np.zeros(len(X), dtype=bool)
        if self.exact is not None:
            ex = self.exact
            Y = X.astype(object) * ex.d + ex.eta
            num = np.sum((Y @ ex.K) * Y, axis=1)
            fa, fb = self.a_exact, self.b_exact
            q_ok = np.array(
                [fa < Fraction(int(v), ex.den) < fb for v in num], dtype=bool
            )
        else:
            Z = X + self.xi
            q = np.einsum("ij,jk,ik->i", Z, self.M, Z)
            q_ok = (q >= self.a - BOUNDARY_TOL) & (q <= self.b + BOUNDARY_TOL)
            flagged |= (np.abs(q - self.a) <= BOUNDARY_TOL) | (np.abs(q - self.b) <= BOUNDARY_TOL)
        region = self.region
        if isinstance(region, QuadraticGauge):
            r_ok = region.exact_inside(X, self.T)
        else:
            g = region.gauge(X.astype(float))
            r_ok = g <= self.T + BOUNDARY_TOL
            flagged |= np.abs(g - self.T) <= BOUNDARY_TOL
        inside = q_ok & r_ok
        return inside, flagged & inside

    # -- exact line measure (for volume estimation) ----------------------------

    def line_length(self, Y: np.ndarray) -> np.ndarray:
        """Length of {s : (Y, s) in T*Omega, a < Q_xi < b} for real outer points Y (transformed coordinates)."""
        if not self.line_exact:
            raise ValueError("line lengths need a region described by quadratic constraints")
        n = self.n
        T2 = self.T**2
        rl = np.full(len(Y), -np.inf)
        rh = np.full(len(Y), np.inf)
        for alpha, e, Eo in self.cons:
            beta = 2.0 * (Y @ e)
            gamma = np.einsum("ij,jk,ik->i", Y, Eo, Y)
            if alpha > 1e-14 * max(1.0, np.abs(Eo).max()):
                lo, hi, ok = _roots(alpha, beta, gamma - T2)
                rl = np.where(ok, np.maximum(rl, lo), rl)
                rh = np.where(ok, np.minimum(rh, hi), -np.inf)
            else:
                rh = np.where(gamma < T2, rh, -np.inf)
        Z = Y + self.xit[: n - 1]
        c = self.c
        h = (Z @ self.m) / c
        r = np.einsum("ij,jk,ik->i", Z, self.Mo, Z) - c * h * h
        sigma = h + self.xit[n - 1]
        if c > 0:
            lo_v, hi_v = (self.a - r) / c, (self.b - r) / c
        else:
            lo_v, hi_v = (self.b - r) / c, (self.a - r) / c
        s_hi = np.sqrt(np.maximum(hi_v, 0.0))
        s_lo = np.sqrt(np.maximum(lo_v, 0.0))
        total = np.zeros(len(Y))
        for lo, hi in ((-s_hi, -s_lo), (s_lo, s_hi)):
            l = np.maximum(lo - sigma, rl)
            u = np.minimum(hi - sigma, rh)
            total += np.maximum(u - l, 0.0)
        return total

    def outer_box(self) -> np.ndarray:
        """Half-widths of a box in transformed outer coordinates containing the projection of T*Omega."""
        return np.array([self.R * np.linalg.norm(self.Pinv[k]) for k in range(self.n - 1)])

    # -- one slab -----------------------------------------------------------

    def slab(self, v0: int) -> tuple[int, int]:
        n = self.n
        axes = [np.array([v0])] + [np.arange(-B, B + 1) for B in self.box[1:]]
        Y = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n - 1).astype(float)

        T2 = self.T**2
        rl_in = np.full(len(Y), -np.inf)
        rh_in = np.full(len(Y), np.inf)
        rl_out = rl_in.copy()
        rh_out = rh_in.copy()
        r_bands = []
        flat_band = np.zeros(len(Y), dtype=bool)
        for alpha, e, Eo in self.cons:
            beta = 2.0 * (Y @ e)
            gamma = np.einsum("ij,jk,ik->i", Y, Eo, Y)
            if alpha > 1e-14 * max(1.0, np.abs(Eo).max()):
                lo1, hi1, ok1 = _roots(alpha, beta, gamma - (T2 - self.eps_r))
                lo2, hi2, ok2 = _roots(alpha, beta, gamma - (T2 + self.eps_r))
                rl_in = np.where(ok1, np.maximum(rl_in, lo1), rl_in)
                rh_in = np.where(ok1, np.minimum(rh_in, hi1), rh_in)
                rh_in = np.where(ok1, rh_in, -np.inf)
                rl_out = np.where(ok2, np.maximum(rl_out, lo2), rl_out)
                rh_out = np.where(ok2, np.minimum(rh_out, hi2), -np.inf)
                # band pieces: [lo2, lo1] and [hi1, hi2], or all of [lo2, hi2]
                r_bands.append((np.where(ok1, lo2, lo2), np.where(ok1, lo1, hi2), ok2))
                r_bands.append((hi1, hi2, ok1 & ok2))
            else:
                inside = gamma < T2 - self.eps_r
                outside = gamma > T2 + self.eps_r
                rh_in = np.where(inside, rh_in, -np.inf)
                rh_out = np.where(outside, -np.inf, rh_out)
                flat_band |= ~inside & ~outside

        keep = rh_out > rl_out
        if not np.any(keep):
            return 0, 0
        Y = Y[keep]
        rl_in, rh_in, rl_out, rh_out = rl_in[keep], rh_in[keep], rl_out[keep], rh_out[keep]
        r_bands = [(lo[keep], hi[keep], ok[keep]) for lo, hi, ok in r_bands]
        flat_band = flat_band[keep]
        if not self.line_exact:
            rh_in = np.full(len(Y), -np.inf)

        Z = Y + self.xit[: n - 1]
        c = self.c
        h = (Z @ self.m) / c
        r = np.einsum("ij,jk,ik->i", Z, self.Mo, Z) - c * h * h
        sigma = h + self.xit[n - 1]
        if c > 0:
            lo_v, hi_v = (self.a - r) / c, (self.b - r) / c
        else:
            lo_v, hi_v = (self.b - r) / c, (self.a - r) / c
        eps_u = self.eps_q / abs(c)

        # certain set: u^2 in (lo_v + eps, hi_v - eps)
        lo_in = lo_v + eps_u
        hi_in = hi_v - eps_u
        s_hi = np.sqrt(np.maximum(hi_in, 0.0))
        s_lo = np.sqrt(np.maximum(lo_in, 0.0))
        single = lo_in < 0
        A_lo = -s_hi
        A_hi = np.where(single, s_hi, -s_lo)
        B_lo = np.where(single, 0.0, s_lo)
        B_hi = np.where(single, 0.0, s_hi)
        total = 0
        for lo, hi, skip in ((A_lo, A_hi, None), (B_lo, B_hi, single)):
            l = np.maximum(lo - sigma, rl_in)
            u = np.minimum(hi - sigma, rh_in)
            cnt = _open_count(l, u)
            if skip is not None:
                cnt = np.where(skip, 0, cnt)
            total += int(cnt.sum())

        # bands where direct evaluation decides
        bands = []
        for t in (lo_v, hi_v):
            top = t + eps_u
            okb = top >= 0
            b_hi = np.sqrt(np.maximum(top, 0.0))
            b_lo = np.sqrt(np.maximum(t - eps_u, 0.0))
            bands.append((b_lo - sigma, b_hi - sigma, okb))
            bands.append((-b_hi - sigma, -b_lo - sigma, okb))
        if not self.line_exact:
            # no certain set: every integer in the outer solution set is a candidate
            o_lo = lo_v - eps_u
            o_hi = np.sqrt(np.maximum(hi_v + eps_u, 0.0))
            o_in = np.sqrt(np.maximum(o_lo, 0.0))
            okb = hi_v + eps_u >= 0
            one = o_lo < 0
            bands.append((-o_hi - sigma, np.where(one, o_hi, -o_in) - sigma, okb))
            bands.append((o_in - sigma, o_hi - sigma, okb & ~one))
        bands = [
            (np.maximum(lo, rl_out), np.minimum(hi, rh_out), ok) for lo, hi, ok in bands
        ]
        bands.extend(r_bands)
        bands.append((rl_out, rh_out, flat_band))
        extra, flagged = self._decide_bands(Y, bands)
        return total + extra, flagged

    def _decide_bands(self, Y, bands) -> tuple[int, int]:
        rows, ks = [], []
        for lo, hi, ok in bands:
            klo = np.ceil(lo)
            khi = np.floor(hi)
            cnt = np.where(ok & np.isfinite(klo) & np.isfinite(khi), khi - klo + 1, 0)
            cnt = np.maximum(cnt, 0).astype(np.int64)
            if not cnt.any():
                continue
            idx = np.nonzero(cnt)[0]
            reps = cnt[idx]
            row = np.repeat(idx, reps)
            start = np.repeat(klo[idx].astype(np.int64), reps)
            offs = np.arange(reps.sum()) - np.repeat(np.cumsum(reps) - reps, reps)
            rows.append(row)
            ks.append(start + offs)
        if not rows:
            return 0, 0
        pairs = np.unique(np.stack([np.concatenate(rows), np.concatenate(ks)], axis=1), axis=0)
        Xt = np.concatenate([Y[pairs[:, 0]].astype(np.int64), pairs[:, 1:2]], axis=1)
        X = Xt @ self.P.T
        inside, flagged = self.direct(X)
        return int(inside.sum()), int(flagged.sum())


def _roots(alpha, beta, gamma):
    """Roots of alpha s^2 + beta s + gamma (alpha > 0); ok marks real roots."""
    disc = beta * beta - 4.0 * alpha * gamma
    ok = disc >= 0
    sq = np.sqrt(np.maximum(disc, 0.0))
    return (-beta - sq) / (2 * alpha), (-beta + sq) / (2 * alpha), ok


def _open_count(l, h):
    """Number of integers in the open interval (l, h), elementwise."""
    with np.errstate(invalid="ignore"):
        cnt = np.ceil(h) - np.floor(l) - 1
    cnt = np.where(np.isfinite(cnt), cnt, 0)
    return np.maximum(cnt, 0).astype(np.int64)


def _solve_basis(M: np.ndarray) -> np.ndarray:
    """Unimodular P whose last column v has |v^T M v| as large as cheaply possible."""
    n = len(M)
    diag = np.abs(np.diag(M))
    scale = np.abs(M).max()
    if diag.max() >= 1e-3 * scale:
        k = int(diag.argmax())
        order = [i for i in range(n) if i != k] + [k]
        return np.eye(n, dtype=np.int64)[:, order]
    # all diagonal entries (nearly) vanish: use x_i = y_i + y_j, whose y_j coefficient is 2 M_ij
    off = np.abs(M - np.diag(np.diag(M)))
    i, j = np.unravel_index(int(off.argmax()), off.shape)
    S = np.eye(n, dtype=np.int64)
    S[i, j] = 1
    order = [k for k in range(n) if k != j] + [j]
    return S[:, order]


# ---------------------------------------------------------------- public counting


def _affine_planes(exceptional) -> list[tuple[np.ndarray, np.ndarray]]:
    out = []
    for w in exceptional:
        if isinstance(w, tuple):
            basis, shift = w
        else:
            basis, shift = w.subspace.basis, w.integral_shift
        out.append((np.array(basis, dtype=np.int64).reshape(len(basis), -1), np.array(shift, dtype=np.int64)))
    return out


def _run_slabs(prob: _Problem, threads: int) -> tuple[int, int]:
    vals = range(-prob.box[0], prob.box[0] + 1)
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(prob.slab, vals))
    else:
        parts = [prob.slab(v) for v in vals]
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


def count_N(form: InhomForm, region: StarRegion, a, b, T, threads: int = 1) -> CountResult:
    """#{x in Z^n : x in T*Omega, a < Q_xi(x) < b}."""
    prob = _Problem(form, region, a, b, T)
    n, flagged = _run_slabs(prob, threads)
    return CountResult(n, n, [], (float(a), float(b), float(T)), flagged)


def plane_points(prob: "_Problem", basis: np.ndarray, shift: np.ndarray) -> np.ndarray:
    """Integer points of (L cap Z^n) - shift inside the bounding ball of T*Omega."""
    B = basis.astype(float)
    G = B @ B.T
    Ginv = np.linalg.inv(G)
    rad = prob.R + np.linalg.norm(shift)
    bounds = [int(math.floor(math.sqrt(Ginv[k, k]) * rad)) + 1 for k in range(len(B))]
    grids = np.meshgrid(*[np.arange(-m, m + 1) for m in bounds], indexing="ij")
    coef = np.stack(grids, axis=-1).reshape(-1, len(B))
    X = coef @ basis - shift
    near = np.linalg.norm(X, axis=1) <= prob.R + 1e-9
    return X[near]


def count_N_tilde(
    form: InhomForm, region: StarRegion, a, b, T, exceptional: Sequence = (), threads: int = 1
) -> CountResult:
    """count_N with the points of the affine exceptional planes L - v_xi removed."""
    prob = _Problem(form, region, a, b, T)
    n, flagged = _run_slabs(prob, threads)
    seen: set[tuple[int, ...]] = set()
    excluded = []
    for basis, shift in _affine_planes(exceptional):
        X = plane_points(prob, basis, shift)
        inside, _ = prob.direct(X)
        hits = 0
        for x in X[inside]:
            key = tuple(int(v) for v in x)
            if key not in seen:
                seen.add(key)
                hits += 1
        excluded.append(hits)
    return CountResult(n, n - sum(excluded), excluded, (float(a), float(b), float(T)), flagged)


@dataclass
class AsymptoticRow:
    T: float
    N: int
    Ntilde: int
    ratio_N: float
    ratio_Ntilde: float


def asymptotic_table(
    form: InhomForm,
    region: StarRegion,
    a,
    b,
    T_grid: Sequence[float],
    lambda_hat: float,
    exceptional: Sequence = (),
    threads: int = 1,
) -> list[AsymptoticRow]:
    """Counts against the volume prediction lambda (b - a) T^(n-2)."""
    if not lambda_hat > 0:
        raise ValueError("lambda_hat must be positive")
    T_grid = [float(t) for t in T_grid]
    if not T_grid or any(t <= 0 for t in T_grid) or any(y <= x for x, y in zip(T_grid, T_grid[1:])):
        raise ValueError("T_grid must be positive and strictly increasing")
    rows = []
    for T in T_grid:
        res = count_N_tilde(form, region, a, b, T, exceptional, threads)
        pred = lambda_hat * (b - a) * T ** (form.dim - 2)
        rows.append(AsymptoticRow(T, res.n_total, res.n_tilde, res.n_total / pred, res.n_tilde / pred))
    return rows


def brute_force_count(form: InhomForm, region: StarRegion, a, b, T) -> int:
    """Full-box reference count, one point at a time (small instances only)."""
    import itertools

    from .forms import evaluate

    R = int(math.floor(T * region.bound_radius()))
    n = form.dim
    total = 0
    for x in itertools.product(range(-R, R + 1), repeat=n):
        if not contains(region, np.array(x, dtype=np.int64), T):
            continue
        q = evaluate(form, x)
        if a < q < b:
            total += 1
    return total
