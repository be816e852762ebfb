"""Monte Carlo estimates of shell volumes and of the constant lambda in

    Vol{x in T*Omega : a < Q_xi(x) < b}  ~  lambda (b - a) T^(n-2).

Two unbiased estimators are available.  ``hit`` samples the bounding box of
T*Omega and counts accepted points.  ``slice`` samples the first n-1
coordinates and integrates the last one exactly; its variance is far smaller
because the shell is thin compared to the box.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .forms import InhomForm
from .regions import StarRegion, _Problem

BATCH = 1 << 20
LOW_STAT_HITS = 100


def substream(seed: int, *index: int) -> np.random.Generator:
    """Philox generator keyed by (seed, index...): independent, platform-stable streams."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *index])
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class ShellVolume:
    estimate: float
    std_error: float
    samples: int
    seed: int
    method: str
    accepted: int = -1
    low_statistics: bool = False


@dataclass
class VolumeEstimate:
    lambda_hat: float
    std_error: float
    samples: int
    T_used: list[float]
    seed: int
    drift: float = 0.0
    drift_error: float = 0.0
    per_T: list[dict] = field(default_factory=list)
    method: str = "slice"
    low_statistics: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def shell_volume_mc(
    form: InhomForm,
    region: StarRegion,
    a: float,
    b: float,
    T: float,
    samples: int,
    seed: int,
    method: str = "hit",
    stream: int = 0,
) -> ShellVolume:
    """Unbiased Monte Carlo estimate of the shell volume and its standard error."""
    if samples < 10_000:
        raise ValueError("need at least 1e4 samples")
    prob = _Problem(form, region, a, b, T)
    if method == "hit":
        return _hit(prob, samples, seed, stream)
    if method == "slice":
        return _slice(prob, samples, seed, stream)
    raise ValueError(f"unknown method {method!r}")


def _batches(samples: int):
    done = 0
    k = 0
    while done < samples:
        m = min(BATCH, samples - done)
        yield k, m
        done += m
        k += 1


def _hit(prob: _Problem, samples: int, seed: int, stream: int) -> ShellVolume:
    n = prob.n
    R = prob.R
    box_vol = (2 * R) ** n
    hits = 0
    for k, m in _batches(samples):
        rng = substream(seed, stream, k)
        X = rng.uniform(-R, R, size=(m, n))
        Z = X + prob.xi
        q = np.einsum("ij,jk,ik->i", Z, prob.M, Z)
        ok = (q > prob.a) & (q < prob.b)
        ok[ok] = prob.region.gauge(X[ok]) < prob.T
        hits += int(ok.sum())
    p = hits / samples
    est = box_vol * p
    se = box_vol * math.sqrt(p * (1 - p) / samples)
    return ShellVolume(est, se, samples, seed, "hit", hits, hits < LOW_STAT_HITS)


def _slice(prob: _Problem, samples: int, seed: int, stream: int) -> ShellVolume:
    half = prob.outer_box()
    box_vol = float(np.prod(2 * half))
    s1 = 0.0
    s2 = 0.0
    nonzero = 0
    for k, m in _batches(samples):
        rng = substream(seed, stream, k)
        Y = rng.uniform(-half, half, size=(m, prob.n - 1))
        L = prob.line_length(Y)
        s1 += float(L.sum())
        s2 += float((L * L).sum())
        nonzero += int((L > 0).sum())
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    est = box_vol * mean
    se = box_vol * math.sqrt(var / samples)
    return ShellVolume(est, se, samples, seed, "slice", nonzero, nonzero < LOW_STAT_HITS)


def lambda_fit(
    form: InhomForm,
    region: StarRegion,
    a: float,
    b: float,
    T_grid: Sequence[float],
    samples_per_T: int,
    seed: int,
    method: str = "slice",
) -> VolumeEstimate:
    """Weighted least-squares fit of Vol / ((b - a) T^(n-2)) over a T grid.

    ``drift`` is the slope of the normalized volumes against 1/T, which exposes
    sub-leading finite-size corrections.
    """
    T_grid = [float(t) for t in T_grid]
    if len(T_grid) < 3:
        raise ValueError("T_grid needs at least 3 points")
    if any(y <= x for x, y in zip(T_grid, T_grid[1:])):
        raise ValueError("T_grid must be strictly increasing")
    n = form.dim
    ys, ws, per_T = [], [], []
    low = False
    for i, T in enumerate(T_grid):
        sv = shell_volume_mc(form, region, a, b, T, samples_per_T, seed, method, stream=i + 1)
        norm = (b - a) * T ** (n - 2)
        y = sv.estimate / norm
        s = sv.std_error / norm
        low |= sv.low_statistics
        per_T.append({"T": T, "volume": sv.estimate, "std_error": sv.std_error, "normalized": y})
        ys.append(y)
        ws.append(1.0 / s**2 if s > 0 else 0.0)
    y = np.array(ys)
    w = np.array(ws)
    if w.sum() == 0:
        lam, se = float(y.mean()), 0.0
        low = True
    else:
        lam = float((w * y).sum() / w.sum())
        se = float(1.0 / math.sqrt(w.sum()))
    drift, drift_se = _weighted_slope(1.0 / np.array(T_grid), y, w)
    return VolumeEstimate(
        lam, se, samples_per_T * len(T_grid), T_grid, int(seed), drift, drift_se, per_T, method, low
    )


def _weighted_slope(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    if w.sum() == 0:
        return 0.0, 0.0
    xm = (w * x).sum() / w.sum()
    ym = (w * y).sum() / w.sum()
    sxx = (w * (x - xm) ** 2).sum()
    if sxx == 0:
        return 0.0, 0.0
    slope = (w * (x - xm) * (y - ym)).sum() / sxx
    return float(slope), float(1.0 / math.sqrt(sxx))
