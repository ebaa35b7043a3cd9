"""Model Poincare constants and the sharp constant of the MCP(K, N) class."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .bounds import sphere_eigenvalue
from .geometry import CurvatureParams, DomainError, sample_model_density
from .spectral import DN, NN, spectral_gap

__all__ = [
    "DEFAULT_N",
    "ModelPoincare",
    "ScanRow",
    "ScanProfile",
    "SharpConstantResult",
    "model_poincare",
    "sharp_poincare",
    "scan_profile",
    "golden_section_min",
    "classify_monotonicity",
    "thread_count",
]

DEFAULT_N = 4096
# above this fraction of D_{K,N} the weight degenerates; use the sphere value
ENDPOINT_FRACTION = 0.999
GRID_POINTS = 64
DENSE_POINTS = 512
# D'^2 lambda tends to a positive constant as D' -> 0, so lambda blows up like
# D'^-2 and the infimum cannot sit below this fraction of D_max
FLOOR_FRACTION = 1.0 / 1024
REFINE_RTOL = 1e-4


def thread_count() -> int:
    raw = os.environ.get("MCP_GAP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _ordered_map(fn: Callable, items: Sequence, threads: int | None = None) -> list:
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class ModelPoincare:
    """``lambda[h_{K,N,D}]`` with its provenance."""

    value: float
    error: float
    D: float
    method: str  # "solver" | "closed-form"
    blended: bool = False
    half_interval_value: float | None = None
    cross_check_ok: bool = True

    @property
    def scaled(self) -> float:
        return self.D * self.D * self.value


def model_poincare(params: CurvatureParams, D: float, n: int = DEFAULT_N,
                   engine: str = "lapack") -> ModelPoincare:
    """Neumann gap of the model density on ``[0, D]``.

    Solved at resolutions ``n`` and ``2n``, and cross-checked against the
    Dirichlet-Neumann gap on ``[D/2, D]``.  Diameters within 0.1% of the
    Bonnet-Myers bound return the sphere value instead (``blended`` marks
    the ones strictly below the bound).
    """
    if not D > 0:
        raise DomainError(f"D must be positive, got {D}")
    if n < 4 or n % 2:
        raise DomainError(f"n must be an even integer >= 4, got {n}")
    bound = params.diameter_bound
    if D > bound * (1 + 1e-12):
        raise DomainError(f"D={D} exceeds the diameter bound {bound}")
    if params.K > 0 and D > ENDPOINT_FRACTION * bound * (1 + 1e-12):
        blended = D < bound * (1 - 1e-12)
        return ModelPoincare(sphere_eigenvalue(params), 0.0, D, "closed-form", blended)

    h = sample_model_density(params, D, 2 * n)
    full = spectral_gap(h, NN, engine=engine, eigenfunction=False)
    half = spectral_gap(h.restrict(n, 2 * n), DN, engine=engine, eigenfunction=False)
    tol = full.error_estimate + half.error_estimate + 1e-10 * full.eigenvalue
    agree = abs(full.eigenvalue - half.eigenvalue) <= tol
    return ModelPoincare(full.eigenvalue, full.error_estimate, D, "solver", False,
                         half.eigenvalue, bool(agree))


def golden_section_min(fn: Callable[[float], float], lo: float, hi: float,
                       rtol: float = REFINE_RTOL, max_iter: int = 200):
    """Minimize a unimodal ``fn`` on ``[lo, hi]``; returns ``(argmin, value, evaluations)``.

    Stops once the bracket is narrower than ``rtol`` times its midpoint.
    """
    invphi = (math.sqrt(5) - 1) / 2
    evals = []

    def f(x):
        y = fn(x)
        evals.append((x, y))
        return y

    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if hi - lo <= rtol * 0.5 * (hi + lo):
            break
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    x, y = min(evals, key=lambda p: p[1])
    return x, y, evals


@dataclass(frozen=True)
class ScanRow:
    D_prime: float
    lam: float
    scaled: float
    error: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.D_prime, self.lam, self.scaled, self.error)


@dataclass(frozen=True)
class SharpConstantResult:
    value: float
    minimizing_D_prime: float
    method: str  # "direct" | "grid+refine" | "dense-scan"
    params: CurvatureParams
    D: float
    error: float = 0.0
    disagreement: bool = False
    rows: tuple[ScanRow, ...] | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "argmin": self.minimizing_D_prime,
            "method": self.method,
            "K": self.params.K,
            "N": self.params.N,
            "D": self.D,
            "error": self.error,
            "disagreement": self.disagreement,
        }


def _row(params: CurvatureParams, d: float, n: int, engine: str) -> ScanRow:
    m = model_poincare(params, d, n, engine)
    return ScanRow(d, m.value, m.scaled, m.error)


def sharp_poincare(params: CurvatureParams, D: float, n: int = DEFAULT_N,
                   dense_scan: bool = False, engine: str = "lapack",
                   threads: int | None = None) -> SharpConstantResult:
    """Sharp Poincare constant of MCP(K, N) sets of diameter at most ``D``.

    For ``K <= 0`` this is the model constant at ``D``.  For ``K > 0`` it is
    the infimum over ``D' <= min(D, D_{K,N})``: a 64-point geometric grid
    followed by golden-section refinement around the best grid point.  With
    ``dense_scan`` a 512-point grid double-checks the result, since
    unimodality in ``D'`` is not known.
    """
    if not D > 0:
        raise DomainError(f"D must be positive, got {D}")
    if params.K <= 0:
        m = model_poincare(params, D, n, engine)
        return SharpConstantResult(m.value, D, "direct", params, D, m.error)

    d_max = min(D, params.diameter_bound)
    grid = np.geomspace(d_max * FLOOR_FRACTION, d_max, GRID_POINTS)
    grid[-1] = d_max
    rows = _ordered_map(lambda d: _row(params, float(d), n, engine), list(grid), threads)
    lams = np.array([r.lam for r in rows])
    k = int(np.argmin(lams))

    cache = {r.D_prime: r for r in rows}

    def lam_at(d: float) -> float:
        if d not in cache:
            cache[d] = _row(params, d, n, engine)
        return cache[d].lam

    lo = float(grid[max(k - 1, 0)])
    hi = float(grid[min(k + 1, GRID_POINTS - 1)])
    golden_section_min(lam_at, lo, hi)
    best = min(cache.values(), key=lambda r: r.lam)
    method = "grid+refine"
    disagreement = False

    if dense_scan:
        dense = np.geomspace(d_max * FLOOR_FRACTION, d_max, DENSE_POINTS)
        dense[-1] = d_max
        drows = _ordered_map(lambda d: _row(params, float(d), n, engine), list(dense), threads)
        dbest = min(drows, key=lambda r: r.lam)
        slack = REFINE_RTOL * best.lam + best.error + dbest.error
        disagreement = dbest.lam < best.lam - slack
        if dbest.lam < best.lam:
            best = dbest
        method = "dense-scan"
        rows = drows

    return SharpConstantResult(best.lam, best.D_prime, method, params, D, best.error,
                               bool(disagreement), tuple(rows))


def classify_monotonicity(values: Iterable[float], errors: Iterable[float] | None = None,
                          constant_rtol: float = 1e-6) -> str:
    """One of ``constant``, ``strictly increasing``, ``strictly decreasing``,
    ``non-decreasing``, ``non-increasing`` or ``not monotone``.

    Differences smaller than the two rows' combined error count as ties.
    """
    v = np.asarray(list(values), dtype=float)
    e = np.zeros_like(v) if errors is None else np.asarray(list(errors), dtype=float)
    if v.size < 2:
        return "constant"
    ref = np.max(np.abs(v))
    if np.all(np.abs(v - v[0]) <= constant_rtol * ref + e + e[0]):
        return "constant"
    dv = np.diff(v)
    tie = e[:-1] + e[1:] + 1e-14 * ref
    if np.all(dv > tie):
        return "strictly increasing"
    if np.all(dv < -tie):
        return "strictly decreasing"
    if np.all(dv >= -tie):
        return "non-decreasing"
    if np.all(dv <= tie):
        return "non-increasing"
    return "not monotone"


_EXPECTED = {
    -1: {"non-increasing", "strictly decreasing", "constant"},
    0: {"constant"},
    1: {"non-decreasing", "strictly increasing", "constant"},
}


@dataclass(frozen=True)
class ScanProfile:
    params: CurvatureParams
    rows: tuple[ScanRow, ...]
    lambda_verdict: str
    scaled_verdict: str

    @property
    def scaled_matches_curvature_sign(self) -> bool:
        """Whether ``D'^2 lambda`` moves in the direction fixed by the sign of K."""
        sign = int(np.sign(self.params.K))
        return self.scaled_verdict in _EXPECTED[sign]

    def verdict_line(self) -> str:
        return f"# verdict: lambda {self.lambda_verdict}; scaled {self.scaled_verdict}"


def scan_profile(params: CurvatureParams, D_max: float, count: int, n: int = DEFAULT_N,
                 span: float = 64.0, engine: str = "lapack",
                 threads: int | None = None) -> ScanProfile:
    """``lambda[h_{K,N,D'}]`` at ``count`` geometric points in ``[D_max/span, D_max]``."""
    if count < 8:
        raise DomainError(f"count must be >= 8, got {count}")
    if not D_max > 0:
        raise DomainError(f"D_max must be positive, got {D_max}")
    bound = params.diameter_bound
    if D_max > bound * (1 + 1e-12):
        raise DomainError(f"D_max={D_max} exceeds the diameter bound {bound}")
    grid = np.geomspace(D_max / span, D_max, count)
    grid[-1] = D_max
    rows = tuple(_ordered_map(lambda d: _row(params, float(d), n, engine), list(grid), threads))
    lam_v = classify_monotonicity([r.lam for r in rows], [r.error for r in rows])
    sc_v = classify_monotonicity([r.scaled for r in rows], [r.error * r.D_prime ** 2 for r in rows])
    return ScanProfile(params, rows, lam_v, sc_v)
