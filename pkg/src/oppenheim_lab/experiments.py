"""Experiment registry: strict parameter schemas and the code that runs each one."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import diophantine as dio
from . import latgeo as lg
from . import spectra as sp
from . import subspaces as sub
from .forms import InhomForm, form_from_dict
from .numbers import as_number
from .output import Table
from .regions import asymptotic_table, count_N_tilde, region_from_dict
from .volume import lambda_fit


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending key."""


# ---------------------------------------------------------------- parameter schemas


@dataclass
class CountParams:
    form: dict
    region: dict
    a: float
    b: float
    T_grid: list
    exclude_exceptional: bool = False
    T_search: float | None = None


@dataclass
class AsymptoticParams:
    form: dict
    region: dict
    a: float
    b: float
    T_grid: list
    samples_per_T: int = 200_000
    method: str = "slice"
    exclude_exceptional: bool = True
    T_search: float | None = None


@dataclass
class VolumeParams:
    form: dict
    region: dict
    a: float
    b: float
    T_grid: list
    samples_per_T: int = 200_000
    method: str = "slice"


@dataclass
class SubspacesParams:
    form: dict
    T_search: float
    mu1: float | None = None


@dataclass
class ExceptionalParams:
    form: dict
    T_search: float


@dataclass
class QuasinullGrowthParams:
    T_grid: list
    model: str = "matrix"
    form: dict | None = None
    mu1: float = 0.1


@dataclass
class DiophantineParams:
    xi: list
    delta_grid: list
    mode: str = "literal"


@dataclass
class EwasParams:
    form: dict
    r_grid: list
    coeff_bound: int = 10**9


@dataclass
class ClassifyParams:
    form: dict
    r_grid: list = field(default_factory=lambda: [10.0, 100.0, 1000.0, 1e4, 1e5, 1e6])
    coeff_bound: int = 10**9
    delta_grid: list = field(default_factory=lambda: dio.geometric_grid(1e-1, 1e-6, 6))
    mode: str = "literal"


@dataclass
class SpectrumParams:
    basis: list
    lambda_max: float
    flux: list = field(default_factory=lambda: [0.0, 0.0])


@dataclass
class PaircorrParams:
    basis: list
    a: float
    b: float
    T: float
    flux: list = field(default_factory=lambda: [0.0, 0.0])


@dataclass
class BerryTaborParams:
    basis: list
    a: float
    b: float
    T_grid: list
    flux: list = field(default_factory=lambda: [0.0, 0.0])


@dataclass
class AlphaMomentParams:
    basis: list
    t_grid: list
    s: float = 1.5
    k_grid_size: int = 256
    i_list: list = field(default_factory=lambda: [1, 2, 3])


@dataclass
class SiegelParams:
    function: dict
    basis: list
    num_shifts: int = 10_000


@dataclass
class ShrinkProfileParams:
    plane: list
    t_grid: list
    delta_grid: list
    basis: list | None = None
    k_grid: int = 512 * 512
    mode: str = "excess"


def parse_params(cls, raw: Any, where: str = "parameters"):
    if not isinstance(raw, dict):
        raise ConfigError(f"'{where}' must be an object")
    names = {f.name for f in dataclasses.fields(cls)}
    for k in raw:
        if k not in names:
            raise ConfigError(f"unknown key '{where}.{k}'")
    missing = [
        f.name
        for f in dataclasses.fields(cls)
        if f.name not in raw and f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING
    ]
    if missing:
        raise ConfigError(f"missing key '{where}.{missing[0]}'")
    for f in dataclasses.fields(cls):
        if f.name in raw and not _type_ok(raw[f.name], str(f.type)):
            raise ConfigError(f"key '{where}.{f.name}' must be of type {f.type}")
    return cls(**raw)


_TYPES = {"float": (int, float), "int": (int,), "list": (list, dict), "dict": (dict,), "str": (str,), "bool": (bool,)}


def _type_ok(value, annotation: str) -> bool:
    for part in annotation.split("|"):
        part = part.strip()
        if part == "None" and value is None:
            return True
        allowed = _TYPES.get(part)
        if allowed is None:
            return True
        if isinstance(value, bool) and part != "bool":
            continue
        if isinstance(value, allowed):
            return True
    return False


def resolved(params) -> dict:
    return dataclasses.asdict(params)


# ---------------------------------------------------------------- helpers


def _grid(v, name: str) -> list[float]:
    if isinstance(v, dict):
        extra = set(v) - {"start", "stop", "num"}
        if extra:
            raise ConfigError(f"unknown key '{name}.{sorted(extra)[0]}'")
        return dio.geometric_grid(float(v["start"]), float(v["stop"]), int(v["num"]))
    if not isinstance(v, list) or not v:
        raise ConfigError(f"'{name}' must be a nonempty list")
    return [float(x) for x in v]


def _vector_entry(x):
    if isinstance(x, dict) and "liouville" in x:
        return dio.liouville(int(x["liouville"]), int(x.get("scale", 1)))
    return as_number(x)


def _basis_str(vectors) -> str:
    return ";".join(",".join(str(int(c)) for c in v) for v in vectors)


def _form(d: dict) -> InhomForm:
    try:
        return form_from_dict(d)
    except KeyError as exc:
        raise ConfigError(f"missing key 'parameters.form.{exc.args[0]}'") from exc


def _region(d: dict):
    try:
        return region_from_dict(d)
    except KeyError as exc:
        raise ConfigError(f"missing key 'parameters.region.{exc.args[0]}'") from exc


def _torus(p) -> sp.Torus:
    return sp.Torus(tuple(map(tuple, p.basis)), tuple(float(x) for x in p.flux))


def _exceptional(form: InhomForm, T_search: float):
    return sub.exceptional_subspaces(form, T_search)


# ---------------------------------------------------------------- runners


def run_count(p: CountParams, seed: int, threads: int) -> Table:
    form, region = _form(p.form), _region(p.region)
    T_grid = _grid(p.T_grid, "parameters.T_grid")
    planes = _exceptional(form, p.T_search or max(T_grid)) if p.exclude_exceptional else []
    rows = []
    for T in T_grid:
        r = count_N_tilde(form, region, p.a, p.b, T, planes, threads)
        rows.append([T, r.n_total, r.n_tilde, sum(r.excluded), r.flagged])
    return Table(["T", "N", "Ntilde", "excluded", "flagged"], rows, {"exceptional_planes": len(planes)})


def run_asymptotic(p: AsymptoticParams, seed: int, threads: int) -> Table:
    form, region = _form(p.form), _region(p.region)
    T_grid = _grid(p.T_grid, "parameters.T_grid")
    est = lambda_fit(form, region, p.a, p.b, T_grid, p.samples_per_T, seed, p.method)
    planes = _exceptional(form, p.T_search or max(T_grid)) if p.exclude_exceptional else []
    table = asymptotic_table(form, region, p.a, p.b, T_grid, est.lambda_hat, planes, threads)
    rows = [[r.T, r.N, r.Ntilde, r.ratio_N, r.ratio_Ntilde] for r in table]
    summary = {
        "lambda_hat": est.lambda_hat,
        "lambda_std_error": est.std_error,
        "drift": est.drift,
        "exceptional_planes": len(planes),
    }
    return Table(["T", "N", "Ntilde", "ratio_N", "ratio_Ntilde"], rows, summary)


def run_volume(p: VolumeParams, seed: int, threads: int) -> Table:
    form, region = _form(p.form), _region(p.region)
    est = lambda_fit(form, region, p.a, p.b, _grid(p.T_grid, "parameters.T_grid"), p.samples_per_T, seed, p.method)
    rows = [[d["T"], d["volume"], d["std_error"], d["normalized"]] for d in est.per_T]
    summary = {
        "lambda_hat": est.lambda_hat,
        "std_error": est.std_error,
        "drift": est.drift,
        "drift_error": est.drift_error,
        "low_statistics": est.low_statistics,
    }
    return Table(["T", "volume", "std_error", "normalized"], rows, summary)


def run_subspaces(p: SubspacesParams, seed: int, threads: int) -> Table:
    q = _form(p.form).homogeneous
    planes = sub.null_subspaces(q, p.T_search)
    split = sub.invariant_split(q) if q.dim == 4 else None
    rows = []
    for L in planes:
        kind = sub.null_criterion(q, L, split).value if split is not None and L.dim == 2 else "null-line"
        rows.append([_basis_str(L.basis), L.norm, kind])
    summary = {"count": len(planes)}
    if p.mu1 is not None and q.dim == 4:
        summary["quasinull_count"] = len(sub.enumerate_quasinull(q, p.mu1, p.T_search))
    return Table(["basis", "norm", "type"], rows, summary)


def run_exceptional(p: ExceptionalParams, seed: int, threads: int) -> Table:
    form = _form(p.form)
    ws = sub.exceptional_subspaces(form, p.T_search)
    rows = [[_basis_str(w.subspace.basis), _basis_str([w.integral_shift]), w.residual] for w in ws]
    return Table(["basis", "integral_shift", "residual"], rows, {"count": len(ws)})


def run_quasinull_growth(p: QuasinullGrowthParams, seed: int, threads: int) -> Table:
    T_grid = _grid(p.T_grid, "parameters.T_grid")
    q = _form(p.form).homogeneous if p.form is not None else None
    rows = []
    for T in T_grid:
        row = [
            T,
            len(sub.enumerate_null_first_type(T)),
            len(sub.enumerate_null_second_type(T)),
            len(sub.null_vectors_21(T, p.model)),
        ]
        row.append(len(sub.enumerate_quasinull(q, p.mu1, T)) if q is not None else None)
        rows.append(row)
    return Table(["T", "first_type", "second_type", "null_21", "quasinull"], rows, {"model": p.model, "mu1": p.mu1})


def run_diophantine(p: DiophantineParams, seed: int, threads: int) -> Table:
    xi = [_vector_entry(x) for x in p.xi]
    rep = dio.estimate_kappa(xi, _grid(p.delta_grid, "parameters.delta_grid"), p.mode)
    rows = [
        [d, q, ";".join(f"{a}/{b}" for a, b in w)] for d, q, w in zip(rep.delta_grid, rep.quality, rep.witnesses)
    ]
    summary = {"kappa_hat": rep.kappa_hat, "C_hat": rep.C_hat, "status": rep.status.value, "label": rep.label}
    return Table(["delta", "quality", "witnesses"], rows, summary)


def run_ewas(p: EwasParams, seed: int, threads: int) -> Table:
    q = _form(p.form).homogeneous
    rep = dio.ewas_search(q, _grid(p.r_grid, "parameters.r_grid"), p.coeff_bound)
    rows = [
        [e.r, e.norm, e.status, e.Q_prime, e.null_basis and _basis_str(e.null_basis)] for e in rep.best
    ]
    summary = {"exponent_hat": rep.exponent_hat, "norm": rep.norm_name, "coeff_bound": rep.coeff_bound}
    return Table(["r", "norm", "status", "Q_prime", "null_basis"], rows, summary)


def run_classify(p: ClassifyParams, seed: int, threads: int) -> Table:
    form = _form(p.form)
    cfg = dio.ClassifyConfig(
        r_grid=_grid(p.r_grid, "parameters.r_grid"),
        coeff_bound=p.coeff_bound,
        delta_grid=_grid(p.delta_grid, "parameters.delta_grid"),
        mode=p.mode,
    )
    c = dio.classify_form(form, cfg)
    row = [c.verdict.value, c.reason, c.ewas.exponent_hat, c.dioph.kappa_hat]
    return Table(["verdict", "reason", "exponent_hat", "kappa_hat"], [row], {"label": c.label})


def run_spectrum(p: SpectrumParams, seed: int, threads: int) -> Table:
    s = sp.eigenvalues(_torus(p), p.lambda_max)
    return Table(["eigenvalue"], [[float(v)] for v in s.values], {"weyl_c": s.weyl_c, "count": len(s.values)})


def run_paircorr(p: PaircorrParams, seed: int, threads: int) -> Table:
    tor = _torus(p)
    sp._check_window(p.a, p.b)
    s = sp.eigenvalues(tor, p.T)
    R = sp.pair_correlation(s, p.a, p.b, p.T)
    target = s.weyl_c**2 * (p.b - p.a)
    return Table(["T", "R", "target", "rel_error"], [[float(p.T), R, target, abs(R / target - 1)]], {})


def run_berry_tabor(p: BerryTaborParams, seed: int, threads: int) -> Table:
    rows = sp.berry_tabor_table(_torus(p), p.a, p.b, _grid(p.T_grid, "parameters.T_grid"))
    return Table(["T", "R", "c2", "target", "rel_error"], [[r.T, r.R, r.c2, r.target, r.rel_error] for r in rows], {})


def run_alpha_moment(p: AlphaMomentParams, seed: int, threads: int) -> Table:
    lat = lg.FullLattice.from_matrix(np.array(p.basis, dtype=float))
    rows = []
    for i in p.i_list:
        for t in _grid(p.t_grid, "parameters.t_grid"):
            m = lg.orbit_alpha_moment(lat, p.s, t, p.k_grid_size, int(i))
            rows.append([m.t, m.i, m.s, m.moment, m.grid_points, m.unsaturated])
    slopes = {}
    for i in p.i_list:
        pts = [(r[0], math.log(r[3])) for r in rows if r[1] == i]
        if len(pts) >= 2:
            x, y = np.array(pts).T
            slopes[str(i)] = float(np.polyfit(x, y, 1)[0])
    return Table(["t", "i", "s", "moment", "grid_points", "unsaturated"], rows, {"log_slopes": slopes})


def run_siegel(p: SiegelParams, seed: int, threads: int) -> Table:
    f = lg.function_from_dict(p.function)
    lat = lg.FullLattice.from_matrix(np.array(p.basis, dtype=float))
    r = lg.siegel_average(f, lat, p.num_shifts, seed)
    return Table(["mean", "stderr", "exact_integral", "z"], [[r.mean, r.stderr, r.exact_integral, r.z]], {})


def run_shrink_profile(p: ShrinkProfileParams, seed: int, threads: int) -> Table:
    L = sub.RationalSubspace.from_vectors(p.plane)
    basis = np.eye(4) if p.basis is None else np.array(p.basis, dtype=float)
    fit = lg.shrink_fit(
        L,
        lg.FullLattice.from_matrix(basis),
        _grid(p.t_grid, "parameters.t_grid"),
        _grid(p.delta_grid, "parameters.delta_grid"),
        p.k_grid,
        p.mode,
    )
    rows = [[t, d, fit.widths[i][j]] for i, t in enumerate(fit.t_grid) for j, d in enumerate(fit.delta_grid)]
    summary = {"delta_exponent": fit.delta_exponent, "t_exponent": fit.t_exponent, "minima": fit.minima, "mode": fit.mode}
    return Table(["t", "delta", "theta_width"], rows, summary)


EXPERIMENTS: dict[str, tuple[type, Callable]] = {
    "count": (CountParams, run_count),
    "asymptotic": (AsymptoticParams, run_asymptotic),
    "volume": (VolumeParams, run_volume),
    "subspaces": (SubspacesParams, run_subspaces),
    "exceptional": (ExceptionalParams, run_exceptional),
    "quasinull-growth": (QuasinullGrowthParams, run_quasinull_growth),
    "diophantine": (DiophantineParams, run_diophantine),
    "ewas": (EwasParams, run_ewas),
    "classify": (ClassifyParams, run_classify),
    "spectrum": (SpectrumParams, run_spectrum),
    "paircorr": (PaircorrParams, run_paircorr),
    "berry-tabor": (BerryTaborParams, run_berry_tabor),
    "alpha-moment": (AlphaMomentParams, run_alpha_moment),
    "siegel": (SiegelParams, run_siegel),
    "shrink-profile": (ShrinkProfileParams, run_shrink_profile),
}


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict
    seed: int = 0
    output: dict = field(default_factory=lambda: {"path": "out.csv", "format": "csv"})

    TOP_KEYS = ("experiment", "parameters", "seed", "output")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        for k in raw:
            if k not in cls.TOP_KEYS:
                raise ConfigError(f"unknown key '{k}'")
        if "experiment" not in raw:
            raise ConfigError("missing key 'experiment'")
        if raw["experiment"] not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment '{raw['experiment']}' (key 'experiment')")
        out = dict(raw.get("output") or {})
        for k in out:
            if k not in ("path", "format"):
                raise ConfigError(f"unknown key 'output.{k}'")
        out.setdefault("path", "out.csv")
        out.setdefault("format", "csv")
        if out["format"] not in ("csv", "json"):
            raise ConfigError(f"unknown format '{out['format']}' (key 'output.format')")
        seed = raw.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigError("'seed' must be an integer in [0, 2^64)")
        return cls(raw["experiment"], raw.get("parameters", {}), seed, out)

    def params(self):
        cls, _ = EXPERIMENTS[self.experiment]
        return parse_params(cls, self.parameters)

    def resolved(self) -> dict:
        return {
            "experiment": self.experiment,
            "parameters": resolved(self.params()),
            "seed": self.seed,
            "output": dict(self.output),
        }


def execute(config: ExperimentConfig, threads: int = 1) -> Table:
    _, runner = EXPERIMENTS[config.experiment]
    return runner(config.params(), config.seed, threads)
