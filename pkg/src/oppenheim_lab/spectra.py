"""Flat 2-tori with Aharonov-Bohm flux: spectra, pair correlation and the
reduction to a signature (2,2) inhomogeneous form."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .forms import InhomForm, SymmetricForm
from .regions import IntervalError, MaxSplit, QuadraticGauge

FOUR_PI2 = 4 * math.pi**2


@dataclass(frozen=True)
class Torus:
    """Lattice spanned by the columns of ``basis`` with flux ``alpha``."""

    basis: tuple[tuple[float, float], tuple[float, float]]
    flux: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        B = np.array(self.basis, dtype=float)
        if B.shape != (2, 2):
            raise ValueError("torus basis must be 2x2")
        if abs(np.linalg.det(B)) < 1e-14:
            raise ValueError("torus basis is singular")
        object.__setattr__(self, "basis", tuple(tuple(float(x) for x in r) for r in B))
        object.__setattr__(self, "flux", tuple(float(x) for x in self.flux))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.basis)

    @property
    def covol(self) -> float:
        return float(abs(np.linalg.det(self.matrix)))


@dataclass
class FluxSpectrum:
    values: np.ndarray
    cutoff: float
    weyl_c: float

    def count(self, T: float) -> int:
        """#{lambda_j <= T}."""
        return int(np.searchsorted(self.values, T, side="right"))


def dual_lattice(torus: Torus) -> np.ndarray:
    """Columns d_i with <d_i, b_j> = delta_ij."""
    return np.linalg.inv(torus.matrix.T)


def flux_coordinates(torus: Torus) -> np.ndarray:
    """beta with beta_1 w_1 + beta_2 w_2 = alpha for the dual basis w."""
    return np.linalg.solve(dual_lattice(torus), np.array(torus.flux))


def eigenvalues(torus: Torus, lambda_max: float) -> FluxSpectrum:
    """All 4 pi^2 |w + alpha|^2 <= lambda_max, w in the dual lattice, with multiplicity."""
    if not lambda_max > 0:
        raise ValueError("lambda_max must be positive")
    D = dual_lattice(torus)
    beta = flux_coordinates(torus)
    alpha = np.array(torus.flux)
    R = math.sqrt(lambda_max) / (2 * math.pi)
    # |x + beta|_i <= R * |row_i(D^-1)|
    Dinv = np.linalg.inv(D)
    reach = R * np.linalg.norm(Dinv, axis=1)
    G = D.T @ D
    lo1 = math.floor(-beta[0] - reach[0]) - 1
    hi1 = math.ceil(-beta[0] + reach[0]) + 1
    out = []
    for x1 in range(lo1, hi1 + 1):
        y1 = x1 + beta[0]
        # G11 y1^2 + 2 G12 y1 y2 + G22 y2^2 <= R^2 in y2
        disc = (G[0, 1] * y1) ** 2 - G[1, 1] * (G[0, 0] * y1 * y1 - R * R)
        if disc < 0:
            continue
        s = math.sqrt(disc)
        c = -G[0, 1] * y1 / G[1, 1]
        lo2 = math.floor(c - s / G[1, 1] - beta[1]) - 1
        hi2 = math.ceil(c + s / G[1, 1] - beta[1]) + 1
        X = np.stack([np.full(hi2 - lo2 + 1, x1), np.arange(lo2, hi2 + 1)], 1)
        v = _values(X, D, alpha)
        out.append(v[v <= lambda_max])
    vals = np.sort(np.concatenate(out)) if out else np.zeros(0)
    return FluxSpectrum(vals, float(lambda_max), torus.covol / (4 * math.pi))


def _values(X: np.ndarray, D: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    W = X @ D.T + alpha
    return FOUR_PI2 * (W * W).sum(1)


def eigenvalues_scan(torus: Torus, lambda_max: float) -> np.ndarray:
    """Reference enumeration over a generous integer box."""
    D = dual_lattice(torus)
    beta = flux_coordinates(torus)
    R = math.sqrt(lambda_max) / (2 * math.pi)
    K = int(math.ceil(R * np.linalg.norm(np.linalg.inv(D), 2) + np.abs(beta).max())) + 2
    r = np.arange(-K, K + 1)
    X = np.stack(np.meshgrid(r, r, indexing="ij"), -1).reshape(-1, 2)
    v = _values(X, D, np.array(torus.flux))
    return np.sort(v[v <= lambda_max])


def _check_window(a: float, b: float):
    if not a < b:
        raise IntervalError(f"interval needs a < b, got a={a}, b={b}")
    if a <= 0 <= b:
        raise IntervalError("interval [a, b] must not contain 0")


def pair_correlation(spectrum: FluxSpectrum, a: float, b: float, T: float) -> float:
    """#{(j, k): lambda_j < T, lambda_k < T, a <= lambda_j - lambda_k <= b} / T."""
    _check_window(a, b)
    if T > spectrum.cutoff:
        raise ValueError("T exceeds the spectrum cutoff")
    v = spectrum.values[: np.searchsorted(spectrum.values, T, side="left")]
    # for each j: k with lambda_j - b <= lambda_k <= lambda_j - a
    hi = np.searchsorted(v, v - a, side="right")
    lo = np.searchsorted(v, v - b, side="left")
    return float(np.maximum(hi - lo, 0).sum()) / T


def pair_correlation_naive(values: Sequence[float], a: float, b: float, T: float) -> float:
    v = [x for x in values if x < T]
    c = 0
    for x in v:
        for y in v:
            if a <= x - y <= b:
                c += 1
    return c / T


def binary_form(torus: Torus) -> np.ndarray:
    """Gram matrix of B(x1, x2) = 4 pi^2 |x1 w1 + x2 w2|^2."""
    D = dual_lattice(torus)
    G = D.T @ D
    return FOUR_PI2 * (G + G.T) / 2


def to_inhomogeneous_form(torus: Torus) -> tuple[InhomForm, QuadraticGauge]:
    """Q = B(x1, x2) - B(x3, x4), xi = (beta, beta), Omega = {max(B12, B34) <= 1}.

    Q_xi at an integer point equals lambda(x1, x2) - lambda(x3, x4).
    """
    G = binary_form(torus)
    M = np.zeros((4, 4))
    M[:2, :2] = G
    M[2:, 2:] = -G
    beta = flux_coordinates(torus)
    q = SymmetricForm(tuple(tuple(float(x) for x in r) for r in M))
    return InhomForm(q, (float(beta[0]), float(beta[1]), float(beta[0]), float(beta[1]))), MaxSplit(G, G)


def eigenvalue_at(torus: Torus, x: Sequence[int]) -> float:
    D = dual_lattice(torus)
    w = D @ np.array(x, dtype=float) + np.array(torus.flux)
    return float(FOUR_PI2 * w @ w)


@dataclass
class BerryTaborRow:
    T: float
    R: float
    c2: float
    target: float
    rel_error: float


def berry_tabor_table(torus: Torus, a: float, b: float, T_grid: Sequence[float]) -> list[BerryTaborRow]:
    _check_window(a, b)
    T_grid = [float(t) for t in T_grid]
    spectrum = eigenvalues(torus, max(T_grid))
    c2 = spectrum.weyl_c**2
    rows = []
    for T in T_grid:
        R = pair_correlation(spectrum, a, b, T)
        target = c2 * (b - a)
        rows.append(BerryTaborRow(T, R, c2, target, abs(R / target - 1)))
    return rows


@dataclass
class CoefficientReport:
    passed: bool
    A: tuple[float, float]
    N: float
    C: float
    q_max: int
    violation: dict | None = None
    label: str = "pass at tested scales"

    def to_dict(self) -> dict:
        return asdict(self)


def normalized_coefficients(torus: Torus) -> tuple[float, float]:
    """(A1, A2) for B / B_11 = x1^2 + A1 x1 x2 + A2 x2^2."""
    G = binary_form(torus)
    return float(2 * G[0, 1] / G[0, 0]), float(G[1, 1] / G[0, 0])


def coefficient_condition(torus: Torus, N: float, C: float, q_max: int) -> CoefficientReport:
    """Scan q in [2, q_max]: does max_i |A_i - p_i/q| > C / q^N hold with the nearest p_i?"""
    A = normalized_coefficients(torus)
    return coefficient_condition_values(A, N, C, q_max)


def coefficient_condition_values(A: Sequence[float], N: float, C: float, q_max: int) -> CoefficientReport:
    q = np.arange(2, max(q_max, 2) + 1, dtype=float)
    dev = np.zeros_like(q)
    P = []
    for Ai in A:
        p = np.round(q * Ai)
        P.append(p)
        dev = np.maximum(dev, np.abs(Ai - p / q))
    bad = np.nonzero(~(dev > C / q**N))[0]
    A = tuple(float(x) for x in A)
    if len(bad):
        i = int(bad[0])
        v = {"q": int(q[i]), "p": [int(p[i]) for p in P], "deviation": float(dev[i]), "bound": float(C / q[i] ** N)}
        return CoefficientReport(False, A, N, C, q_max, v, "violation found")
    return CoefficientReport(True, A, N, C, q_max)
