"""The acceptance suite: eleven quantitative checks at a quick or full scale.

Every check returns a CriterionResult carrying a Table of the numbers it
measured; the tables double as golden files for drift detection.
"""

from __future__ import annotations

import json
import math
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import diophantine as dio
from . import latgeo as lg
from . import oracles
from . import spectra as sp
from . import subspaces as sub
from .forms import FormError, InhomForm, SymmetricForm, b4, signature
from .numbers import irrational
from .output import Table
from .regions import Ball, Ellipsoid, asymptotic_table, count_N, count_N_tilde
from .volume import lambda_fit

SCALES = ("quick", "full")
Z = Fraction(0)


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    detail: str
    seconds: float
    table: Table = field(default_factory=lambda: Table([], []))

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.id:2d} {self.name}: {self.detail} ({self.seconds:.1f} s)"


def _tagged(value: float, label: str):
    return irrational(value, label)


def _xi_sqrt():
    return (_tagged(math.sqrt(2), "sqrt2") - 1, _tagged(math.sqrt(3), "sqrt3") - 1)


# ---------------------------------------------------------------- 1: counting oracle


def _random_instance(rng: np.random.Generator):
    n = int(rng.choice([3, 4]))
    while True:
        M = [[Z] * n for _ in range(n)]
        for i in range(n):
            M[i][i] = Fraction(int(rng.integers(-4, 5)), int(rng.choice([1, 2])))
            for j in range(i + 1, n):
                M[i][j] = M[j][i] = Fraction(int(rng.integers(-3, 4)), 2)
        ev = np.linalg.eigvalsh(np.array(M, dtype=float))
        if np.abs(ev).min() > 1e-9 and ev.min() < 0 < ev.max():
            break
    xi = [Fraction(int(rng.integers(-3, 4)), int(rng.choice([1, 2, 3, 4]))) for _ in range(n)]
    a = Fraction(int(rng.integers(-20, 6)), 2)
    b = a + Fraction(int(rng.integers(1, 21)), 2)
    T = int(rng.integers(3, 13))
    if rng.random() < 0.5:
        r = float(rng.choice([0.75, 1.0, 1.25]))
        region = Ball(r, n)
        constraints = [(np.eye(n, dtype=np.int64), Fraction(r) ** 2)]
        radius = math.ceil(T * r)
    else:
        L = rng.integers(-1, 2, size=(n, n))
        A = L @ L.T + np.eye(n, dtype=np.int64)
        region = Ellipsoid(A.astype(float))
        constraints = [(A, Fraction(1))]
        radius = math.ceil(T / math.sqrt(np.linalg.eigvalsh(A).min())) + 1
    form = InhomForm(SymmetricForm(tuple(map(tuple, M))), tuple(xi))
    return form, region, a, b, T, (M, xi, constraints, radius)


def criterion_1(scale: str) -> CriterionResult:
    rng = np.random.default_rng(20240101)
    rows = []
    for k in range(50):
        form, region, a, b, T, (M, xi, cons, radius) = _random_instance(rng)
        got = count_N(form, region, a, b, T).n_total
        want = oracles.exact_box_count(M, xi, cons, a, b, T, radius)
        rows.append([k, form.dim, T, str(a), str(b), got, want])
    bad = [r for r in rows if r[5] != r[6]]
    table = Table(["instance", "n", "T", "a", "b", "count_N", "oracle"], rows, {"mismatches": len(bad)})
    return CriterionResult(1, "counting oracle equivalence", not bad, f"{50 - len(bad)}/50 exact matches", 0, table)


# ---------------------------------------------------------------- 2: p >= 3 ratio


def _ratio_check(id_, name, form, region, a, b, T_grid, lo, hi, seed, exceptional=(), samples=200_000):
    est = lambda_fit(form, region, a, b, T_grid, samples, seed)
    rows_ = asymptotic_table(form, region, a, b, T_grid, est.lambda_hat, exceptional, threads=4)
    rows = [[r.T, r.N, r.Ntilde, r.ratio_N, r.ratio_Ntilde] for r in rows_]
    ratios = [r.ratio_Ntilde for r in rows_]
    ok = all(lo <= x <= hi for x in ratios)
    summary = {"lambda_hat": est.lambda_hat, "lambda_std_error": est.std_error, "exceptional_planes": len(exceptional)}
    table = Table(["T", "N", "Ntilde", "ratio_N", "ratio_Ntilde"], rows, summary)
    detail = "ratios " + ", ".join(f"{x:.4f}" for x in ratios) + f" in [{lo}, {hi}]"
    return CriterionResult(id_, name, ok, detail, 0, table)


def criterion_2(scale: str) -> CriterionResult:
    s2 = _tagged(math.sqrt(2), "sqrt2")
    one = Fraction(1)
    q = SymmetricForm(((one, Z, Z, Z), (Z, one, Z, Z), (Z, Z, one, Z), (Z, Z, Z, -s2)))
    form = InhomForm(q, (Fraction(3, 10), Z, Z, Z))
    T_grid = [100.0, 140.0, 200.0] if scale == "full" else [50.0, 70.0, 100.0]
    return _ratio_check(2, "asymptotic ratio, irrational p>=3", form, Ball(1, 4), -1, 1, T_grid, 0.85, 1.15, 2)


# ---------------------------------------------------------------- 3: (2,2) ratio with exclusion


def criterion_3(scale: str) -> CriterionResult:
    x1, x2 = _xi_sqrt()
    form = InhomForm(b4(), (x1, x2, Z, Z))
    T_grid = [80.0, 120.0, 160.0] if scale == "full" else [40.0, 60.0, 80.0]
    planes = sub.exceptional_subspaces(form, max(T_grid))
    return _ratio_check(3, "asymptotic ratio, (2,2) Diophantine shift", form, Ball(1, 4), -1, 1, T_grid, 0.8, 1.2, 3, planes)


# ---------------------------------------------------------------- 4: exceptional inflation

INFLATION_FLOOR = 0.5


def criterion_4(scale: str) -> CriterionResult:
    form = InhomForm(b4(), (Fraction(1, 2), Z, Z, Z))
    region = Ball(1, 4)
    a, b = -10, 10
    T_grid = [60.0, 90.0, 120.0] if scale == "full" else [30.0, 45.0, 60.0]
    est = lambda_fit(form, region, a, b, T_grid, 200_000, 4)
    rows = []
    for T in T_grid:
        planes = sub.exceptional_subspaces(form, T)
        r = count_N_tilde(form, region, a, b, T, planes, threads=4)
        pred = est.lambda_hat * (b - a) * T * T
        rows.append([T, r.n_total, r.n_tilde, len(planes), (r.n_total - r.n_tilde) / T**2, r.n_tilde / pred])
    gaps = [r[4] for r in rows]
    tracks = [r[5] for r in rows]
    ok = min(gaps) > INFLATION_FLOOR and all(0.75 <= x <= 1.25 for x in tracks)
    table = Table(["T", "N", "Ntilde", "planes", "excess_over_T2", "Ntilde_over_pred"], rows, {"lambda_hat": est.lambda_hat, "floor": INFLATION_FLOOR})
    detail = (
        "(N-Ntilde)/T^2 " + ", ".join(f"{x:.3f}" for x in gaps) + f" > {INFLATION_FLOOR}; "
        "Ntilde/pred " + ", ".join(f"{x:.3f}" for x in tracks)
    )
    return CriterionResult(4, "exceptional-subspace inflation", ok, detail, 0, table)


# ---------------------------------------------------------------- 5: witness count bounds


def random_unimodular(rng: np.random.Generator, n: int = 4, steps: int = 6) -> np.ndarray:
    g = np.eye(n, dtype=np.int64)[rng.permutation(n)]
    for _ in range(steps):
        i, j = rng.choice(n, 2, replace=False)
        E = np.eye(n, dtype=np.int64)
        E[i, j] = int(rng.choice([-1, 1]))
        g = g @ E
    return g


def _int_inverse(g: np.ndarray) -> np.ndarray:
    gi = np.rint(np.linalg.inv(g)).astype(np.int64)
    assert np.array_equal(gi @ g, np.eye(len(g), dtype=np.int64))
    return gi


IRRATIONALS = [(math.sqrt(p), f"sqrt{p}") for p in (2, 3, 5, 7, 11, 13)] + [(math.pi, "pi"), (math.e, "e")]


def _irrational_instance(rng: np.random.Generator, k: int) -> InhomForm:
    if k % 10 == 9:
        # a generic floating (2,2) form
        while True:
            A = rng.normal(size=(4, 4))
            M = (A + A.T) / 2
            ev = np.linalg.eigvalsh(M)
            if (ev > 0).sum() == 2 and np.abs(ev).min() > 0.1:
                break
        q = SymmetricForm(tuple(tuple(float(x) for x in r) for r in M))
        return InhomForm(q, (0.0, 0.0, 0.0, 0.0))
    val, lab = IRRATIONALS[int(rng.integers(len(IRRATIONALS)))]
    th = _tagged(val, lab)
    h = Fraction(1, 2)
    base = SymmetricForm(
        ((Z, Z, Z, h), (Z, Z, -th * h, Z), (Z, -th * h, Z, Z), (h, Z, Z, Z))
    )
    g = random_unimodular(rng)
    q = base.congruent(g.tolist())
    choice = int(rng.integers(4))
    if choice == 0:
        xi = (Z,) * 4
    elif choice == 1:
        xi = tuple(Fraction(int(rng.integers(-2, 3)), int(rng.choice([2, 3]))) for _ in range(4))
    elif choice == 2:
        # a rational point of one of the rational null planes, pulled back by g
        gi = _int_inverse(g)
        v = np.zeros(4, dtype=object)
        v[0] = Fraction(1, 2)
        v[1] = Fraction(1, 3)
        xi = tuple(Fraction(sum(int(gi[i, j]) * v[j] for j in range(4))) for i in range(4))
    else:
        xi = tuple(_tagged(math.sqrt(p), f"sqrt{p}") for p in (2, 3, 5, 7))
    return InhomForm(q, xi)


def _rational_instance(rng: np.random.Generator, k: int) -> InhomForm:
    g = random_unimodular(rng)
    gi = _int_inverse(g)
    q = b4().congruent(g.tolist())
    s2 = _tagged(math.sqrt(2), "sqrt2")
    s3 = _tagged(math.sqrt(3), "sqrt3")
    kind = k % 3
    if kind == 0:
        v = [s2, Z, Z, Z]  # on a null line: in two null planes of B4
    elif kind == 1:
        v = [s2 - 1, s3 - 1, Z, Z]  # spans a single null plane direction pair
    else:
        v = [s2, s3, _tagged(math.sqrt(5), "sqrt5"), _tagged(math.sqrt(7), "sqrt7")]
    xi = []
    for i in range(4):
        acc = Fraction(int(rng.integers(-1, 2)))
        for j in range(4):
            if gi[i, j] and not (isinstance(v[j], Fraction) and v[j] == 0):
                acc = acc + int(gi[i, j]) * v[j]
        xi.append(acc)
    return InhomForm(q, tuple(xi))


def criterion_5(scale: str) -> CriterionResult:
    rng = np.random.default_rng(5)
    n_irr, n_rat = (200, 60) if scale == "full" else (40, 15)
    rows = []
    for k in range(n_irr):
        form = _irrational_instance(rng, k)
        assert (signature(form.homogeneous).positive, signature(form.homogeneous).negative) == (2, 2)
        rows.append(["irrational", k, len(sub.exceptional_subspaces(form, 50))])
    for k in range(n_rat):
        form = _rational_instance(rng, k)
        rows.append(["rational-Q", k, len(sub.exceptional_subspaces(form, 50))])
    m_irr = max(r[2] for r in rows if r[0] == "irrational")
    m_rat = max(r[2] for r in rows if r[0] == "rational-Q")
    ok = m_irr <= 4 and m_rat <= 2
    table = Table(["family", "instance", "witnesses"], rows, {"max_irrational": m_irr, "max_rational": m_rat})
    detail = f"max witnesses {m_irr} over {n_irr} irrational forms (<= 4), {m_rat} over {n_rat} rational-Q (<= 2)"
    return CriterionResult(5, "exceptional witness bounds", ok, detail, 0, table)


# ---------------------------------------------------------------- 6: linear growth


def criterion_6(scale: str) -> CriterionResult:
    T_grid = [1e2, 1e3, 1e4]
    rows = [[T, len(sub.enumerate_null_first_type(T)), len(sub.null_vectors_21(T))] for T in T_grid]
    ratios = []
    for col in (1, 2):
        ratios += [rows[i + 1][col] / rows[i][col] for i in range(2)]
    ok = all(8 <= r <= 12.5 for r in ratios)
    table = Table(["T", "first_type", "null_21"], rows, {"ratios": ratios})
    return CriterionResult(6, "null subspace growth", ok, "ratios " + ", ".join(f"{r:.3f}" for r in ratios), 0, table)


# ---------------------------------------------------------------- 7: pair correlation


def criterion_7(scale: str) -> CriterionResult:
    T = 1e6
    a, b = 0.1, 1.1
    target = (1 / (4 * math.pi)) ** 2 * (b - a)
    rows = []
    for label, flux in (("irrational", (math.sqrt(2) - 1, math.sqrt(3) - 1)), ("control", (0.5, 0.5))):
        spectrum = sp.eigenvalues(sp.Torus(((1.0, 0.0), (0.0, 1.0)), flux), T)
        R = sp.pair_correlation(spectrum, a, b, T)
        rows.append([label, flux[0], flux[1], R, target, abs(R / target - 1)])
    ok = rows[0][5] <= 0.1 and rows[1][5] > 0.1
    table = Table(["case", "alpha1", "alpha2", "R", "target", "rel_error"], rows, {"T": T, "a": a, "b": b})
    detail = f"rel error {rows[0][5]:.4f} <= 0.1; control rel error {rows[1][5]:.3f} > 0.1"
    return CriterionResult(7, "pair correlation", ok, detail, 0, table)


# ---------------------------------------------------------------- 8: Siegel average


def siegel_lattices() -> list[tuple[str, np.ndarray]]:
    g = np.random.default_rng(8).normal(size=(4, 4))
    g /= abs(np.linalg.det(g)) ** 0.25
    return [
        ("Z3", np.eye(3)),
        ("skew2", np.array([[1.5, 0.3], [0.0, 0.9]])),
        ("generic4", g),
    ]


def criterion_8(scale: str) -> CriterionResult:
    shifts = 20_000 if scale == "full" else 5_000
    rows = []
    for name, B in siegel_lattices():
        n = len(B)
        for f in (lg.RadialStep(1.2), lg.Box(tuple([0.7] * n)), lg.RadialTent(1.5)):
            r = lg.siegel_average(f, lg.FullLattice.from_matrix(B), shifts, seed=7)
            rows.append([name, json.dumps(lg.function_to_dict(f), sort_keys=True), r.mean, r.stderr, r.exact_integral, r.z])
    worst = max(abs(r[5]) for r in rows)
    table = Table(["lattice", "function", "mean", "stderr", "exact_integral", "z"], rows, {"num_shifts": shifts, "seed": 7})
    return CriterionResult(8, "Siegel average", worst <= 3, f"max |z| = {worst:.2f} over 9 cases (<= 3)", 0, table)


# ---------------------------------------------------------------- 9: alpha moments


def generic_lattice(seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(4, 4))
    return g / abs(np.linalg.det(g)) ** 0.25


def _slope(t, m) -> float:
    return float(np.polyfit(np.array(t, dtype=float), np.log(np.array(m)), 1)[0])


def criterion_9(scale: str) -> CriterionResult:
    size = 256 if scale == "full" else 64
    t_grid = list(range(1, 9))
    rows = []
    slopes = {}
    cases = [("generic", generic_lattice(0), 1), ("generic", generic_lattice(0), 3), ("Z4", np.eye(4), 2)]
    for name, B, i in cases:
        lat = lg.FullLattice.from_matrix(B)
        ms = []
        for t in t_grid:
            m = lg.orbit_alpha_moment(lat, 1.5, t, size, i)
            ms.append(m.moment)
            rows.append([name, i, float(t), m.moment, m.unsaturated])
        slopes[f"{name}:{i}"] = _slope(t_grid, ms)
    ok = slopes["generic:1"] <= 0.05 and slopes["generic:3"] <= 0.05 and slopes["Z4:2"] >= 0.2
    table = Table(["lattice", "i", "t", "moment", "unsaturated"], rows, {"slopes": slopes, "k_grid_size": size})
    detail = ", ".join(f"{k} slope {v:.4f}" for k, v in slopes.items()) + " (need <= 0.05, <= 0.05, >= 0.2)"
    return CriterionResult(9, "alpha-moment growth", ok, detail, 0, table)


# ---------------------------------------------------------------- 10: Diophantine


LIOUVILLE_GRID = [10.0 ** -k for k in range(7, 26)]
QUADRATIC_GRID = dio.geometric_grid(1e-1, 1e-6, 6)


def criterion_10(scale: str) -> CriterionResult:
    rng = np.random.default_rng(10)
    rows = []
    mismatches = 0
    for k in range(20):
        xi = [Fraction(float(x)) for x in rng.random(2)]
        for d in (1e-1, 1e-2, 1e-3, 1e-4):
            got, _ = dio.dioph_quality(xi, d)
            want = oracles.dioph_quality_scan(xi, d)
            mismatches += got != want
        rows.append(["oracle", k, float(got), float(want)])
    quad = dio.estimate_kappa(list(_xi_sqrt()), QUADRATIC_GRID)
    L = dio.liouville(5)
    liou = dio.estimate_kappa([L, 3 * L], LIOUVILLE_GRID)
    rows.append(["kappa-quadratic", 0, quad.kappa_hat, None])
    rows.append(["kappa-liouville", 0, liou.kappa_hat, None])
    ok_oracle = mismatches == 0
    ok_quad = quad.kappa_hat is not None and 0.7 <= quad.kappa_hat <= 1.3
    ok_liou = liou.kappa_hat is not None and liou.kappa_hat > 5
    table = Table(["check", "instance", "value", "reference"], rows, {"mismatches": mismatches})
    detail = (
        f"oracle mismatches {mismatches}; kappa_hat quadratic {quad.kappa_hat:.3f} (need [0.7, 1.3]); "
        f"Liouville {liou.kappa_hat:.3f} (need > 5)"
    )
    return CriterionResult(10, "Diophantine quality and exponents", ok_oracle and ok_quad and ok_liou, detail, 0, table)


# ---------------------------------------------------------------- 11: determinism


B4_DICT = {"entries": [[0, 0, 0, "1/2"], [0, 0, "-1/2", 0], [0, "-1/2", 0, 0], ["1/2", 0, 0, 0]]}
SQRT_XI = [{"const": "-1", "terms": [["sqrt2", "1", math.sqrt(2)]]}, {"const": "-1", "terms": [["sqrt3", "1", math.sqrt(3)]]}, 0, 0]

DETERMINISM_CONFIGS: dict[str, dict] = {
    "count": {"form": {**B4_DICT, "shift": ["1/2", 0, 0, 0]}, "region": {"kind": "ball", "radius": 1.0, "dim": 4}, "a": -1, "b": 1, "T_grid": [10, 20], "exclude_exceptional": True},
    "asymptotic": {"form": {**B4_DICT, "shift": SQRT_XI}, "region": {"kind": "ball", "radius": 1.0, "dim": 4}, "a": -1, "b": 1, "T_grid": [10, 15, 20], "samples_per_T": 20000},
    "volume": {"form": {"entries": [[1, 0, 0], [0, 1, 0], [0, 0, -1]]}, "region": {"kind": "ball", "radius": 1.0, "dim": 3}, "a": -1, "b": 1, "T_grid": [5, 10, 20], "samples_per_T": 20000, "method": "hit"},
    "subspaces": {"form": B4_DICT, "T_search": 10, "mu1": 0.1},
    "exceptional": {"form": {**B4_DICT, "shift": SQRT_XI}, "T_search": 20},
    "quasinull-growth": {"T_grid": [10, 30], "form": B4_DICT},
    "diophantine": {"xi": [{"liouville": 4}, "1/3"], "delta_grid": {"start": 0.1, "stop": 1e-6, "num": 6}},
    "ewas": {"form": B4_DICT, "r_grid": [10, 100, 1000]},
    "classify": {"form": {**B4_DICT, "shift": SQRT_XI}, "r_grid": [10, 100, 1000]},
    "spectrum": {"basis": [[1, 0], [0.3, 1.2]], "lambda_max": 2000, "flux": [0.2, 0.1]},
    "paircorr": {"basis": [[1, 0], [0, 1]], "a": 0.1, "b": 1.1, "T": 1e4, "flux": [0.4142135623730951, 0.7320508075688772]},
    "berry-tabor": {"basis": [[1, 0], [0, 1]], "a": 0.1, "b": 1.1, "T_grid": [1e3, 1e4], "flux": [0.4142135623730951, 0.7320508075688772]},
    "alpha-moment": {"basis": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], "t_grid": [1, 2], "k_grid_size": 64, "i_list": [1, 2]},
    "siegel": {"function": {"kind": "radial_tent", "r": 1.5}, "basis": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "num_shifts": 2000},
    "shrink-profile": {"plane": [[1, 0, 0, 0], [0, 1, 0, 0]], "t_grid": [1, 2, 3], "delta_grid": [0.2, 0.1, 0.05], "k_grid": 4096},
}


def criterion_11(scale: str) -> CriterionResult:
    from .cli import main

    rows = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for name, params in DETERMINISM_CONFIGS.items():
            for fmt in ("csv", "json"):
                cfg = tmp / f"{name}.config.json"
                cfg.write_text(json.dumps({"experiment": name, "parameters": params, "seed": 12345}))
                out = tmp / f"{name}.{fmt}"
                outs = []
                for threads in (1, 2):
                    if out.exists():
                        out.unlink()
                    code = main(["run", "--config", str(cfg), "--output", str(out), "--format", fmt, "--threads", str(threads)], quiet=True)
                    outs.append(out.read_bytes() if code == 0 and out.exists() else None)
                same = outs[0] is not None and outs[0] == outs[1]
                rows.append([name, fmt, same])
    bad = [f"{r[0]}/{r[1]}" for r in rows if not r[2]]
    table = Table(["experiment", "format", "identical"], rows, {})
    detail = f"{len(rows) - len(bad)}/{len(rows)} runs byte-identical" + (f"; differ: {', '.join(bad)}" if bad else "")
    return CriterionResult(11, "determinism", not bad, detail, 0, table)


CRITERIA: list[tuple[int, Callable[[str], CriterionResult]]] = [
    (1, criterion_1),
    (2, criterion_2),
    (3, criterion_3),
    (4, criterion_4),
    (5, criterion_5),
    (6, criterion_6),
    (7, criterion_7),
    (8, criterion_8),
    (9, criterion_9),
    (10, criterion_10),
    (11, criterion_11),
]


def run_criterion(cid: int, scale: str) -> CriterionResult:
    if scale not in SCALES:
        raise ValueError(f"unknown suite {scale!r}")
    fn = dict(CRITERIA)[cid]
    t0 = time.perf_counter()
    try:
        res = fn(scale)
    except (FormError, ValueError, ArithmeticError) as exc:
        res = CriterionResult(cid, fn.__name__, False, f"error: {exc}", 0)
    res.seconds = time.perf_counter() - t0
    return res


def run_suite(scale: str, only: list[int] | None = None, echo: Callable[[str], None] | None = print) -> list[CriterionResult]:
    out = []
    for cid, _ in CRITERIA:
        if only and cid not in only:
            continue
        res = run_criterion(cid, scale)
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out
