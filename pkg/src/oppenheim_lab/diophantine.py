"""Diophantine diagnostics for shift vectors and for (2,2) forms.

Everything here measures behaviour at finite scales; the verdicts are evidence
at the tested scales, never proofs of an asymptotic property.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .forms import InhomForm, SymmetricForm, signature
from .intlinalg import complete_basis, int_inverse
from .numbers import Surd
from .subspaces import (
    PAIRS,
    RationalSubspace,
    _plane_from_wedge,
    invariant_split,
    restriction_vanishes,
)

NORM_NAME = "max absolute entry of the symmetric coefficient matrix"


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Surd):
        return Fraction(float(x))
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x))


# ---------------------------------------------------------------- best approximation


def best_approximation(x: Fraction, N: int) -> tuple[int, int, Fraction]:
    """Closest p/q to x with 1 <= q <= N, as (p, q, |x - p/q|); ties go to the smaller q.

    Continued-fraction convergents plus the last admissible semiconvergent.
    """
    if N < 1:
        raise ValueError("need N >= 1")
    x = Fraction(x)
    fl = math.floor(x)
    frac = x - fl
    if frac == 0:
        return fl, 1, Fraction(0)
    # convergents of frac
    p0, q0, p1, q1 = 0, 1, 1, 0
    num, den = frac.numerator, frac.denominator
    while True:
        a = num // den
        p2, q2 = a * p1 + p0, a * q1 + q0
        if q2 > N:
            break
        p0, q0, p1, q1 = p1, q1, p2, q2
        num, den = den, num - a * den
        if den == 0:
            break
    cands = [(p1, q1)] if q1 >= 1 else []
    if q1 >= 1:
        t = (N - q0) // q1
        if t >= 1:
            cands.append((p0 + t * p1, q0 + t * q1))
    # q = 1 neighbours are always admissible
    cands += [(0, 1), (1, 1)]
    best = None
    for p, q in cands:
        err = abs(frac - Fraction(p, q))
        if best is None or err < best[2] or (err == best[2] and q < best[1]):
            best = (p, q, err)
    p, q, err = best
    return p + fl * q, q, err


def best_approximation_scan(x: Fraction, N: int) -> tuple[int, int, Fraction]:
    """Reference: scan every q <= N."""
    x = Fraction(x)
    best = None
    for q in range(1, N + 1):
        p = math.floor(x * q + Fraction(1, 2))
        err = abs(x - Fraction(p, q))
        if best is None or err < best[2]:
            best = (p, q, err)
    return best


def _max_denominator(delta: float) -> int:
    """Largest integer q with q < 1/delta."""
    inv = 1 / Fraction(delta)
    m = math.floor(inv)
    return m - 1 if m == inv else m


def dioph_quality(xi: Sequence, delta: float, mode: str = "literal") -> tuple[Fraction, list[tuple[int, int]]]:
    """min over rational vectors with denominators < 1/delta of max_i |xi_i - p_i/q_i|.

    mode="literal" lets each coordinate have its own denominator; mode="common"
    uses one denominator q for all coordinates.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    xs = [_to_fraction(v) for v in xi]
    N = _max_denominator(delta)
    if mode == "literal":
        wit = []
        worst = Fraction(0)
        for x in xs:
            p, q, err = best_approximation(x, N)
            wit.append((p, q))
            worst = max(worst, err)
        return worst, wit
    if mode == "common":
        return _common_quality(xs, N)
    raise ValueError(f"unknown mode {mode!r}")


def _common_quality(xs: list[Fraction], N: int) -> tuple[Fraction, list[tuple[int, int]]]:
    q = np.arange(1, N + 1, dtype=float)
    approx = np.zeros(N)
    for x in xs:
        fx = float(x)
        approx = np.maximum(approx, np.abs(q * fx - np.round(q * fx)) / q)
    # float screening, exact decision among near-minimal candidates
    m = approx.min()
    cand = np.nonzero(approx <= m * (1 + 1e-6) + 1e-300)[0] + 1
    best = None
    for qq in cand.tolist():
        errs = []
        wit = []
        for x in xs:
            p = math.floor(x * qq + Fraction(1, 2))
            errs.append(abs(x - Fraction(p, qq)))
            wit.append((p, qq))
        e = max(errs)
        if best is None or e < best[0]:
            best = (e, wit)
    return best


class DiophStatus(enum.Enum):
    Fitted = "fitted"
    RationalAtScale = "rational-at-scale"


@dataclass
class DiophReport:
    delta_grid: list[float]
    quality: list[float]
    witnesses: list[list[tuple[int, int]]]
    kappa_hat: float | None
    C_hat: float | None
    status: DiophStatus
    mode: str = "literal"
    label: str = "numerical evidence at tested scales"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["status"] = self.status.value
        return d


def _check_geometric(grid: Sequence[float]):
    if len(grid) < 6:
        raise ValueError("delta grid needs at least 6 points")
    g = np.array(grid, dtype=float)
    if np.any(g <= 0) or np.any(g >= 1):
        raise ValueError("delta values must lie in (0, 1)")
    ratios = g[1:] / g[:-1]
    if not np.allclose(ratios, ratios[0], rtol=1e-6) or ratios[0] == 1:
        raise ValueError("delta grid must be geometric")


def geometric_grid(start: float, stop: float, num: int) -> list[float]:
    return [float(v) for v in np.geomspace(start, stop, num)]


def estimate_kappa(xi: Sequence, delta_grid: Sequence[float], mode: str = "literal") -> DiophReport:
    """Least-squares fit of log quality = log C + kappa log delta."""
    _check_geometric(delta_grid)
    quals, wits = [], []
    for d in delta_grid:
        qv, w = dioph_quality(xi, d, mode)
        quals.append(qv)
        wits.append(w)
    qf = [float(v) for v in quals]
    if any(v == 0 for v in quals):
        return DiophReport(list(delta_grid), qf, wits, None, None, DiophStatus.RationalAtScale, mode)
    x = np.log(np.array(delta_grid, dtype=float))
    y = np.array([math.log(v) for v in quals])
    kappa, logc = np.polyfit(x, y, 1)
    return DiophReport(list(delta_grid), qf, wits, float(kappa), float(math.exp(logc)), DiophStatus.Fitted, mode)


def liouville(terms: int, scale: int = 1) -> Fraction:
    """scale * sum_{k=1}^{terms} 10^(-k!)."""
    return scale * sum(Fraction(1, 10 ** math.factorial(k)) for k in range(1, terms + 1))


# ---------------------------------------------------------------- rational maps


@dataclass
class PreservationReport:
    source: DiophReport
    image: DiophReport
    height: int
    kappa_bound: float | None
    within_bound: bool | None


def rational_map_preservation(
    xi: Sequence, A: Sequence[Sequence], delta_grid: Sequence[float], height_bound: int = 10**6, mode: str = "literal"
) -> PreservationReport:
    """Fits for xi and A xi, with the bound kappa(A xi) <= (n + 1) kappa(xi) + 1.

    A is rational and invertible; ``height`` is the largest numerator or
    denominator among the entries of A and its inverse.
    """
    Af = [[Fraction(v) for v in row] for row in A]
    n = len(Af)
    from .subspaces import _frac_inv

    try:
        Ainv = _frac_inv([row[:] for row in Af])
    except StopIteration as exc:
        raise ValueError("A is singular") from exc
    height = max(max(abs(v.numerator), v.denominator) for M in (Af, Ainv) for row in M for v in row)
    if height > height_bound:
        raise ValueError("entries of A or its inverse exceed the height bound")
    xs = [_to_fraction(v) for v in xi]
    image = [sum(Af[i][j] * xs[j] for j in range(n)) for i in range(n)]
    src = estimate_kappa(xs, delta_grid, mode)
    img = estimate_kappa(image, delta_grid, mode)
    if src.kappa_hat is None or img.kappa_hat is None:
        return PreservationReport(src, img, height, None, None)
    bound = (n + 1) * src.kappa_hat + 1
    return PreservationReport(src, img, height, bound, img.kappa_hat <= bound)


# ---------------------------------------------------------------- EWAS search


@dataclass
class EwasEntry:
    r: float
    norm: float | None
    Q_prime: list[list[int]] | None  # polynomial coefficients c_ij, i <= j
    null_basis: list[list[int]] | None
    status: str  # "ok" or "no-candidate"


@dataclass
class EwasReport:
    r_grid: list[float]
    best: list[EwasEntry]
    exponent_hat: float | None
    norm_name: str = NORM_NAME
    coeff_bound: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _poly_coeffs(M) -> dict:
    n = len(M)
    return {(i, j): (M[i][i] if i == j else 2 * M[i][j]) for i in range(n) for j in range(i, n)}


def _matrix_from_poly(c: dict, n: int):
    M = [[Fraction(0)] * n for _ in range(n)]
    for (i, j), v in c.items():
        if i == j:
            M[i][i] = Fraction(v)
        else:
            M[i][j] = M[j][i] = Fraction(v, 2)
    return M


def _exact_matrix(q: SymmetricForm):
    if q.mode == "rational":
        return [[Fraction(e) for e in row] for row in q.entries]
    return None


def candidate_planes(q: SymmetricForm, wedge_radius: int = 3, keep: int = 40) -> list[RationalSubspace]:
    """Small rational planes on which Q is nearly zero, best first.

    All primitive decomposable 2-vectors with entries in [-wedge_radius, wedge_radius]
    are tried and ranked by |Q restricted to L| / |v^L|.
    """
    import itertools

    M = q.matrix()
    rng = range(-wedge_radius, wedge_radius + 1)
    scored = {}
    for w in itertools.product(rng, repeat=6):
        if not any(w) or w[0] * w[5] - w[1] * w[4] + w[2] * w[3] != 0:
            continue
        if math.gcd(*w) != 1:
            continue
        first = next(x for x in w if x)
        if first < 0:
            continue
        L = _plane_from_wedge(w)
        if L is None or L.basis in scored:
            continue
        B = np.array(L.basis, dtype=float)
        R = B @ M @ B.T
        scored[L.basis] = (float(np.abs(R).max()) / L.norm, L)
    ranked = sorted(scored.values(), key=lambda t: (t[0], t[1].basis))
    return [L for _, L in ranked[:keep]]


def _split_approximant(q: SymmetricForm, L: RationalSubspace, r: float):
    """Integral Q' vanishing on L with Q'/r close to Q, or None when degenerate."""
    n = q.dim
    U = complete_basis([list(v) for v in L.basis])
    Ui = int_inverse(U)
    Mq = _exact_matrix(q)
    rr = Fraction(r)
    Uo = [[int(x) for x in row] for row in U]
    if Mq is not None:
        MU = [[sum(Uo[k][i] * Mq[k][l] * Uo[l][j] for k in range(n) for l in range(n)) * rr for j in range(n)] for i in range(n)]
    else:
        Uf = np.array(Uo, dtype=float)
        MUf = Uf.T @ q.matrix() @ Uf * float(r)
        MU = [[Fraction(float(v)) for v in row] for row in MUf]
    c = _poly_coeffs(MU)
    newc = {}
    for (i, j), v in c.items():
        if i < 2 and j < 2:
            newc[(i, j)] = 0
        else:
            newc[(i, j)] = int(math.floor(v + Fraction(1, 2)))
    MUp = _matrix_from_poly(newc, n)
    Uinv = [[int(x) for x in row] for row in Ui]
    Mp = [[sum(Uinv[k][i] * MUp[k][l] * Uinv[l][j] for k in range(n) for l in range(n)) for j in range(n)] for i in range(n)]
    qp = SymmetricForm(tuple(tuple(row) for row in Mp))
    try:
        sig = signature(qp)
    except Exception:
        return None
    if (sig.positive, sig.negative) != (2, 2):
        return None
    return Mp


def _form_distance(q: SymmetricForm, Mp, r: float) -> float:
    Mq = _exact_matrix(q)
    n = q.dim
    rr = Fraction(r)
    if Mq is not None:
        return float(max(abs(Mq[i][j] - Mp[i][j] / rr) for i in range(n) for j in range(n)))
    M = q.matrix()
    return float(np.abs(M - np.array([[float(v) for v in row] for row in Mp]) / float(r)).max())


def verify_split_certificate(Mp, basis) -> bool:
    """Q'(a v1 + b v2) == 0 exactly on the 3 x 3 grid a, b in {-1, 0, 1}."""
    n = len(Mp)
    v1, v2 = basis
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            v = [a * x + b * y for x, y in zip(v1, v2)]
            if sum(Mp[i][j] * v[i] * v[j] for i in range(n) for j in range(n)) != 0:
                return False
    return True


def ewas_search(
    q: SymmetricForm,
    r_grid: Sequence[float],
    coeff_bound: int,
    planes: Sequence[RationalSubspace] | None = None,
    certificate_bound: int = 50,
) -> EwasReport:
    """Best split integral approximants Q'/r of a (2,2) form for each r.

    Candidates come from near-null small planes L: write Q in a unimodular basis
    extending L, zero the block of r Q on L, round the remaining polynomial
    coefficients and map back.  Q' then vanishes on L, so it is split when
    nondegenerate.  Candidates with a polynomial coefficient above coeff_bound
    are dropped.
    """
    sig = signature(q)
    if (sig.positive, sig.negative) != (2, 2):
        raise ValueError("EWAS search needs a (2,2) form")
    if any(r < 2 for r in r_grid):
        raise ValueError("r must be at least 2")
    planes = list(planes) if planes is not None else candidate_planes(q)
    planes = [L for L in planes if max(abs(x) for v in L.basis for x in v) <= certificate_bound]
    best = []
    for r in r_grid:
        entry = EwasEntry(float(r), None, None, None, "no-candidate")
        for L in planes:
            Mp = _split_approximant(q, L, r)
            if Mp is None:
                continue
            coeffs = _poly_coeffs(Mp)
            if max(abs(v) for v in coeffs.values()) > coeff_bound:
                continue
            if not verify_split_certificate(Mp, L.basis):
                continue
            d = _form_distance(q, Mp, r)
            if entry.norm is None or d < entry.norm:
                n = q.dim
                entry = EwasEntry(
                    float(r),
                    d,
                    [[int(coeffs[(i, j)]) if j >= i else 0 for j in range(n)] for i in range(n)],
                    [list(v) for v in L.basis],
                    "ok",
                )
        best.append(entry)
    return EwasReport([float(r) for r in r_grid], best, _fit_exponent(best), NORM_NAME, int(coeff_bound))


def _fit_exponent(entries: list[EwasEntry]) -> float | None:
    pts = [(math.log(e.r), math.log(e.norm)) for e in entries if e.norm is not None and e.norm > 0]
    zeros = [e for e in entries if e.norm == 0]
    if zeros and len(zeros) == sum(1 for e in entries if e.norm is not None):
        return math.inf
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    if np.ptp(x) == 0:
        return None
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)


# ---------------------------------------------------------------- classification


class FormVerdict(enum.Enum):
    DiophantineEvidence = "diophantine-evidence"
    EwasEvidenceAndShiftNonDioph = "ewas-evidence-and-shift-non-diophantine"
    Inconclusive = "inconclusive"


@dataclass
class ClassifyConfig:
    r_grid: list[float] = field(default_factory=lambda: [10.0, 100.0, 1000.0, 10**4, 10**5, 10**6])
    coeff_bound: int = 10**9
    delta_grid: list[float] = field(default_factory=lambda: geometric_grid(1e-1, 1e-6, 6))
    ewas_exponent: float = 3.0
    # per-coordinate Dirichlet gives quality <~ delta^2 for every vector, so
    # kappa_hat near 2 is the baseline; clearly above it means well approximable
    kappa_diophantine: float = 2.5
    kappa_liouville: float = 3.5
    mode: str = "literal"


@dataclass
class Classification:
    verdict: FormVerdict
    reason: str
    ewas: EwasReport
    dioph: DiophReport
    label: str = "diagnostic at tested scales, not a proof"


def classify_form(form: InhomForm, config: ClassifyConfig | None = None) -> Classification:
    """Apply "Q is not EWAS, or xi is Diophantine" to finite-scale evidence."""
    cfg = config or ClassifyConfig()
    q = form.homogeneous
    sig = signature(q)
    if (sig.positive, sig.negative) != (2, 2):
        raise ValueError("classification needs a (2,2) form")
    ew = ewas_search(q, cfg.r_grid, cfg.coeff_bound)
    dr = estimate_kappa(form.shift, cfg.delta_grid, cfg.mode)
    exp_hat = ew.exponent_hat
    ewas_evidence = exp_hat is not None and exp_hat >= cfg.ewas_exponent
    if exp_hat is None:
        return Classification(FormVerdict.Inconclusive, "no EWAS fit", ew, dr)
    if not ewas_evidence:
        return Classification(FormVerdict.DiophantineEvidence, "Q shows no EWAS evidence", ew, dr)
    if dr.status is DiophStatus.RationalAtScale:
        return Classification(FormVerdict.EwasEvidenceAndShiftNonDioph, "xi rational at tested scales", ew, dr)
    if dr.kappa_hat <= cfg.kappa_diophantine:
        return Classification(FormVerdict.DiophantineEvidence, "xi behaves Diophantine", ew, dr)
    if dr.kappa_hat >= cfg.kappa_liouville:
        return Classification(FormVerdict.EwasEvidenceAndShiftNonDioph, "xi is well approximated at tested scales", ew, dr)
    return Classification(FormVerdict.Inconclusive, "kappa estimate in the gray zone", ew, dr)
