"""Geometry of numbers on lattices and inhomogeneous lattices: theta transforms,
the average over shifts, alpha-functions and diagnostics on a_t K orbits."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .intlinalg import EnumerationCapError, lll, short_vectors
from .subspaces import RationalSubspace
from .volume import substream


@dataclass(frozen=True)
class FullLattice:
    """Columns of ``basis`` generate the lattice; ``shift`` gives Delta + xi."""

    basis: tuple[tuple[float, ...], ...]
    shift: tuple[float, ...] | None = None

    def __post_init__(self):
        B = np.array(self.basis, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ValueError("basis must be square")
        if abs(np.linalg.det(B)) <= 1e-300 or np.linalg.matrix_rank(B) < len(B):
            raise ValueError("basis is singular")
        object.__setattr__(self, "basis", tuple(tuple(float(x) for x in r) for r in B))
        if self.shift is not None:
            s = tuple(float(x) for x in self.shift)
            if len(s) != len(B):
                raise ValueError("shift has the wrong length")
            object.__setattr__(self, "shift", s)

    @classmethod
    def from_matrix(cls, B, shift=None) -> "FullLattice":
        return cls(tuple(map(tuple, np.asarray(B, dtype=float))), None if shift is None else tuple(shift))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.basis)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def covol(self) -> float:
        return float(abs(np.linalg.det(self.matrix)))

    @property
    def unimodular(self) -> bool:
        return abs(self.covol - 1) <= 1e-12

    def homogeneous(self) -> "FullLattice":
        return FullLattice(self.basis)

    def dual(self) -> "FullLattice":
        return FullLattice.from_matrix(np.linalg.inv(self.matrix).T)

    def transformed(self, g) -> "FullLattice":
        g = np.asarray(g, dtype=float)
        s = None if self.shift is None else tuple(g @ np.array(self.shift))
        return FullLattice.from_matrix(g @ self.matrix, s)


# ---------------------------------------------------------------- test functions


def ball_volume(n: int, r: float) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * r**n


@dataclass(frozen=True)
class RadialStep:
    """Indicator of the closed ball of radius r."""

    r: float

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return ((X * X).sum(-1) <= self.r**2).astype(float)

    def support_radius(self, n: int) -> float:
        return self.r

    def exact_integral(self, n: int) -> float:
        return ball_volume(n, self.r)

    def scaled(self, c: float) -> "ScaledFunction":
        return ScaledFunction(self, c)


@dataclass(frozen=True)
class Box:
    """Indicator of the box |x_i| <= h_i."""

    halfwidths: tuple[float, ...]

    def __call__(self, X: np.ndarray) -> np.ndarray:
        h = np.array(self.halfwidths)
        return np.all(np.abs(X) <= h, axis=-1).astype(float)

    def support_radius(self, n: int) -> float:
        return float(np.linalg.norm(self.halfwidths))

    def exact_integral(self, n: int) -> float:
        return float(np.prod(2 * np.array(self.halfwidths)))


@dataclass(frozen=True)
class RadialTent:
    """max(0, 1 - |x| / r)."""

    r: float

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, 1 - np.sqrt((X * X).sum(-1)) / self.r)

    def support_radius(self, n: int) -> float:
        return self.r

    def exact_integral(self, n: int) -> float:
        return ball_volume(n, self.r) / (n + 1)


@dataclass(frozen=True)
class ScaledFunction:
    base: object
    factor: float

    def __call__(self, X):
        return self.factor * self.base(X)

    def support_radius(self, n):
        return self.base.support_radius(n)

    def exact_integral(self, n):
        return self.factor * self.base.exact_integral(n)


def function_to_dict(f) -> dict:
    if isinstance(f, RadialStep):
        return {"kind": "radial_step", "r": f.r}
    if isinstance(f, Box):
        return {"kind": "box", "halfwidths": list(f.halfwidths)}
    if isinstance(f, RadialTent):
        return {"kind": "radial_tent", "r": f.r}
    raise ValueError("unknown test function")


def function_from_dict(d: dict):
    kind = d["kind"]
    if kind == "radial_step":
        return RadialStep(float(d["r"]))
    if kind == "box":
        return Box(tuple(float(x) for x in d["halfwidths"]))
    if kind == "radial_tent":
        return RadialTent(float(d["r"]))
    raise ValueError(f"unknown test function kind {kind!r}")


# ---------------------------------------------------------------- theta transform


def _candidate_box(B: np.ndarray, R: float, center: np.ndarray, cap: int, pad: int = 0) -> np.ndarray:
    """Integer c with B c possibly within R of -center (box from the rows of B^-1)."""
    Binv = np.linalg.inv(B)
    reach = R * np.linalg.norm(Binv, axis=1)
    mid = -Binv @ center
    lo = np.floor(mid - reach).astype(np.int64) - pad
    hi = np.ceil(mid + reach).astype(np.int64) + pad
    size = float(np.prod((hi - lo + 1).astype(float)))
    if size > cap:
        raise EnumerationCapError(f"support box has {size:.3g} points, cap {cap}")
    axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(B))


def theta_transform(f, lattice: FullLattice, cap: int = 10**7) -> float:
    """Sum of f over the points of Delta + xi."""
    n = lattice.dim
    B0 = lattice.matrix
    _, U = lll(B0)
    B = B0 @ U
    xi = np.zeros(n) if lattice.shift is None else np.array(lattice.shift)
    C = _candidate_box(B, f.support_radius(n), xi, cap)
    # points are formed in the original basis so the value does not depend on the reduction
    X = (C @ U.T) @ B0.T + xi
    return math.fsum(f(X))


def theta_transform_box(f, lattice: FullLattice, cap: int = 10**7) -> float:
    """Reference: enumerate the integer box in the original basis, padded by one."""
    n = lattice.dim
    B = lattice.matrix
    xi = np.zeros(n) if lattice.shift is None else np.array(lattice.shift)
    C = _candidate_box(B, f.support_radius(n), xi, cap, pad=1)
    X = C @ B.T + xi
    return math.fsum(f(X))


@dataclass
class SiegelResult:
    mean: float
    stderr: float
    exact_integral: float
    num_shifts: int
    seed: int

    @property
    def z(self) -> float:
        return (self.mean - self.exact_integral) / self.stderr if self.stderr > 0 else math.inf

    def to_dict(self) -> dict:
        d = asdict(self)
        d["z"] = self.z
        return d


def siegel_average(f, lattice: FullLattice, num_shifts: int, seed: int, chunk: int = 2048) -> SiegelResult:
    """Mean of the theta transform over xi uniform in a fundamental domain.

    The target is int f / covol(Delta), which is int f for unimodular lattices.
    """
    if num_shifts < 1000:
        raise ValueError("need at least 1e3 shifts")
    n = lattice.dim
    _, U = lll(lattice.matrix)
    B = lattice.matrix @ U
    # shifts B u with u in [0,1)^n; candidates cover every such shift
    C = _candidate_box(B, f.support_radius(n), B @ np.full(n, 0.5), 10**6, pad=1)
    P = C @ B.T
    vals = np.empty(num_shifts)
    done = 0
    k = 0
    while done < num_shifts:
        m = min(chunk, num_shifts - done)
        u = substream(seed, 0, k).random((m, n))
        S = u @ B.T
        for i in range(m):
            vals[done + i] = f(P + S[i]).sum()
        done += m
        k += 1
    target = f.exact_integral(n) / lattice.covol
    return SiegelResult(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(num_shifts)), float(target), num_shifts, int(seed))


# ---------------------------------------------------------------- alpha functions


@dataclass
class AlphaResult:
    value: float
    i: int
    saturated: bool  # True when the bounded search finished, so the value is exact
    witness: list[list[float]] = field(default_factory=list)


def exterior_power(B: np.ndarray, i: int) -> np.ndarray:
    """Matrix of Lambda^i B in the lexicographic basis of i-subsets."""
    n = len(B)
    subsets = list(itertools.combinations(range(n), i))
    W = np.empty((len(subsets), len(subsets)))
    for r, J in enumerate(subsets):
        for c, S in enumerate(subsets):
            W[r, c] = np.linalg.det(B[np.ix_(J, S)])
    return W


def _decomposable(c: np.ndarray, n: int, i: int) -> bool:
    if i in (1, n - 1):
        return True
    if i == 2:
        idx = {S: k for k, S in enumerate(itertools.combinations(range(n), 2))}

        def p(a, b):
            return int(c[idx[(a, b)]])

        for a, b, cc, d in itertools.combinations(range(n), 4):
            if p(a, b) * p(cc, d) - p(a, cc) * p(b, d) + p(a, d) * p(b, cc) != 0:
                return False
        return True
    raise NotImplementedError("decomposability test implemented for i in {1, 2, n-1}")


def alpha_i(lattice: FullLattice, i: int, search_cap: int = 200_000) -> AlphaResult:
    """sup over Delta-rational i-planes L of 1 / covol(L cap Delta).

    Computed as the shortest decomposable vector of the lattice Lambda^i Delta.
    Dimensions above n/2 use covol(L cap Delta) = covol(Delta) covol(L^perp cap Delta*).
    """
    n = lattice.dim
    if not 1 <= i <= n - 1:
        raise ValueError("need 1 <= i <= n-1")
    B = lattice.matrix
    if i > n // 2 and i not in (1, 2):
        dual = lattice.dual()
        res = alpha_i(dual, n - i, search_cap)
        return AlphaResult(res.value / lattice.covol, i, res.saturated, res.witness)
    Bred, _ = lll(B)
    W = exterior_power(Bred, i)
    # upper bound for the minimum from the reduced basis
    bound = min(abs(np.linalg.norm(W[:, k])) for k in range(W.shape[1]))
    try:
        C = short_vectors(W, bound * (1 + 1e-9), cap=search_cap)
    except EnumerationCapError:
        return AlphaResult(1.0 / bound, i, False)
    best, wit = math.inf, None
    for c in C:
        if not c.any() or not _decomposable(c, n, i):
            continue
        d = float(np.linalg.norm(W @ c))
        if d < best:
            best, wit = d, c
    if wit is None:
        best = bound
    return AlphaResult(1.0 / best, i, True, [] if wit is None else [(W @ wit).tolist()])


def alpha(lattice: FullLattice, search_cap: int = 200_000) -> AlphaResult:
    """max_i alpha_i; a shift does not change alpha."""
    res = [alpha_i(lattice.homogeneous(), i, search_cap) for i in range(1, lattice.dim)]
    top = max(res, key=lambda r: r.value)
    return AlphaResult(top.value, top.i, all(r.saturated for r in res), top.witness)


@dataclass
class LipschitzPoint:
    theta: float
    alpha: float
    ratio: float


def lipschitz_check(f, lattice: FullLattice) -> LipschitzPoint:
    th = theta_transform(f, lattice)
    a = alpha(lattice).value
    return LipschitzPoint(th, a, th / a)


# ---------------------------------------------------------------- a_t K orbits


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def b_t(t: float) -> np.ndarray:
    return np.diag([math.exp(-t / 2), math.exp(t / 2)])


def action_22(g1: np.ndarray, g2: np.ndarray) -> np.ndarray:
    """Matrix of v -> g1 v g2^-1 on R^4 = M_2(R), row-major coordinates."""
    return np.kron(g1, np.linalg.inv(g2).T)


def action_21(g: np.ndarray) -> np.ndarray:
    """Matrix of v -> g v g^T on R^3 = Sym_2(R), v = [[x, y/sqrt2], [y/sqrt2, z]]."""
    r2 = math.sqrt(2)

    def to_sym(x):
        return np.array([[x[0], x[1] / r2], [x[1] / r2, x[2]]])

    def from_sym(m):
        return np.array([m[0, 0], m[0, 1] * r2, m[1, 1]])

    return np.stack([from_sym(g @ to_sym(e) @ g.T) for e in np.eye(3)], 1)


def k_grid(signature: tuple[int, int], size: int) -> list[np.ndarray]:
    """Uniform grid on K: SO(2) x SO(2) for (2,2), SO(2) for (2,1)."""
    if size < 64:
        raise ValueError("K grid needs at least 64 points")
    if signature == (2, 2):
        m = int(math.ceil(math.sqrt(size)))
        angles = 2 * math.pi * np.arange(m) / m
        return [action_22(rotation(a), rotation(b)) for a in angles for b in angles]
    if signature == (2, 1):
        angles = 2 * math.pi * np.arange(size) / size
        return [action_21(rotation(a)) for a in angles]
    raise NotImplementedError("orbit grids exist for signatures (2,2) and (2,1)")


def a_t(signature: tuple[int, int], t: float) -> np.ndarray:
    if signature == (2, 2):
        return action_22(b_t(t), b_t(t))
    if signature == (2, 1):
        return action_21(b_t(t))
    raise NotImplementedError("a_t defined for signatures (2,2) and (2,1)")


@dataclass
class MomentResult:
    t: float
    i: int
    s: float
    moment: float
    grid_points: int
    unsaturated: int


def orbit_alpha_moment(
    lattice: FullLattice, s: float, t: float, k_grid_size: int, i: int, search_cap: int = 200_000
) -> MomentResult:
    """Riemann sum of alpha_i(a_t k Delta)^s over a uniform grid on K."""
    if not 0 < s < 2:
        raise ValueError("need 0 < s < 2")
    n = lattice.dim
    sig = {4: (2, 2), 3: (2, 1)}.get(n)
    if sig is None:
        raise NotImplementedError("orbit moments are implemented for dimensions 3 and 4")
    A = a_t(sig, t)
    total = 0.0
    unsat = 0
    grid = k_grid(sig, k_grid_size)
    B = lattice.matrix
    for K in grid:
        res = alpha_i(FullLattice.from_matrix(A @ K @ B), i, search_cap)
        unsat += not res.saturated
        total += res.value**s
    return MomentResult(float(t), i, float(s), total / len(grid), len(grid), unsat)


# ---------------------------------------------------------------- shrink profile


@dataclass
class ShrinkProfile:
    t: float
    delta: float
    measure: float
    theta_width: float
    phi_coverage: float
    theta_box: tuple[float, float] | None
    phi_box: tuple[float, float] | None
    empty: bool


def _wedge_norm(v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    """|v1 ^ v2| for stacks of vectors (last axis)."""
    g11 = (v1 * v1).sum(-1)
    g22 = (v2 * v2).sum(-1)
    g12 = (v1 * v2).sum(-1)
    return np.sqrt(np.maximum(g11 * g22 - g12 * g12, 0.0))


def _covolumes(L: RationalSubspace, lattice: FullLattice, t: float, m: int) -> np.ndarray:
    """d(a_t k L) on the m x m grid of (theta, phi); v -> b_t k1 v k2^-1 b_t^-1 on 2x2 matrices."""
    B = lattice.matrix
    v = np.array(L.basis, dtype=float) @ B.T  # rows: lattice vectors spanning L
    angles = 2 * math.pi * np.arange(m) / m
    bt = b_t(t)
    left = np.array([bt @ rotation(a) for a in angles])
    right = np.array([rotation(-a) @ np.linalg.inv(bt) for a in angles])
    w = [np.einsum("aij,jk,bkl->abil", left, x.reshape(2, 2), right).reshape(m, m, 4) for x in v]
    return _wedge_norm(w[0], w[1])


def _profile_from(d: np.ndarray, t: float, delta: float, level: float) -> ShrinkProfile:
    m = d.shape[0]
    hit = d < level
    angles = 2 * math.pi * np.arange(m) / m
    if not hit.any():
        return ShrinkProfile(float(t), float(delta), 0.0, 0.0, 0.0, None, None, True)
    rows = hit.any(1)
    cols = hit.any(0)
    return ShrinkProfile(
        float(t),
        float(delta),
        float(hit.mean()),
        float(rows.mean() * 2 * math.pi),
        float(hit[rows].mean()),
        (float(angles[rows].min()), float(angles[rows].max())),
        (float(angles[cols].min()), float(angles[cols].max())),
        False,
    )


def _grid_side(k_grid: int) -> int:
    if k_grid < 64:
        raise ValueError("K grid needs at least 64 points")
    return int(math.ceil(math.sqrt(k_grid)))


def shrink_profile(
    L: RationalSubspace, lattice: FullLattice, t: float, delta: float, k_grid: int, mode: str = "absolute"
) -> ShrinkProfile:
    """Measure of {k in SO(2) x SO(2) : d(a_t k L) < delta} on an m x m grid, m^2 >= k_grid.

    mode="excess" uses the threshold min_k d(a_t k L) + delta instead, which
    isolates the local shape of the set near its minimum.
    """
    d = _covolumes(L, lattice, t, _grid_side(k_grid))
    return _profile_from(d, t, delta, _level(d, delta, mode))


def _level(d: np.ndarray, delta: float, mode: str) -> float:
    if mode == "absolute":
        return delta
    if mode == "excess":
        return float(d.min()) + delta
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class ShrinkFit:
    t_grid: list[float]
    delta_grid: list[float]
    widths: list[list[float]]
    minima: list[float]
    delta_exponent: float | None
    t_exponent: float | None
    mode: str


def shrink_fit(
    L: RationalSubspace,
    lattice: FullLattice,
    t_grid: Sequence[float],
    delta_grid: Sequence[float],
    k_grid: int,
    mode: str = "excess",
) -> ShrinkFit:
    """Fit log theta_width = c + a log delta - b t over the nonempty grid cells."""
    m = _grid_side(k_grid)
    W, mins, pts = [], [], []
    for t in t_grid:
        d = _covolumes(L, lattice, t, m)
        mins.append(float(d.min()))
        row = []
        for dlt in delta_grid:
            p = _profile_from(d, t, dlt, _level(d, dlt, mode))
            row.append(p.theta_width)
            if p.theta_width > 0:
                pts.append((math.log(dlt), t, math.log(p.theta_width)))
        W.append(row)
    a = b = None
    if len(pts) >= 3:
        X = np.array([[1, x, tt] for x, tt, _ in pts])
        y = np.array([p[2] for p in pts])
        sol, *_ = np.linalg.lstsq(X, y, rcond=None)
        if np.linalg.matrix_rank(X) == 3:
            a, b = float(sol[1]), float(-sol[2])
    return ShrinkFit([float(t) for t in t_grid], [float(d) for d in delta_grid], W, mins, a, b, mode)
