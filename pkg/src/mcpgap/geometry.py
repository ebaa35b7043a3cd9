"""Comparison-geometry functions, model densities and the MCP density test.

Everything here is exact (closed form) except the grid validator and the
random density generator, which operate on sampled densities.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "DomainError",
    "CurvatureParams",
    "GridDensity",
    "ModelDensity",
    "EnvelopePair",
    "ValidationReport",
    "s_kappa",
    "log_s_kappa",
    "s_ratio_derivative",
    "bonnet_myers_diameter",
    "sigma_coeff",
    "tau_coeff",
    "model_density",
    "sample_model_density",
    "log_derivative_envelope",
    "validate_mcp_density",
    "random_mixing_field",
    "density_from_mixing_field",
    "random_mcp_density",
]

# below this value of |kappa| * theta**2 the Taylor series is used
_SERIES_CUTOFF = 1e-8
# relative slack when checking theta against the first zero pi/sqrt(kappa)
_ENDPOINT_RTOL = 1e-12


class DomainError(ValueError):
    """An argument lies outside the domain of a formula."""


@dataclass(frozen=True)
class CurvatureParams:
    """Curvature lower bound ``K`` and dimension upper bound ``N`` (N > 1)."""

    K: float
    N: float

    def __post_init__(self):
        if not (math.isfinite(self.K) and math.isfinite(self.N)):
            raise DomainError(f"K and N must be finite, got K={self.K}, N={self.N}")
        if self.N <= 1:
            raise DomainError(f"N must be > 1, got N={self.N}")

    @property
    def kappa(self) -> float:
        """The normalized curvature K/(N-1) used by the comparison sine."""
        return self.K / (self.N - 1)

    @property
    def diameter_bound(self) -> float:
        return bonnet_myers_diameter(self)

    def scaled(self, a: float) -> CurvatureParams:
        """Parameters of the class after dilating lengths by 1/a."""
        return CurvatureParams(self.K * a * a, self.N)


@dataclass(frozen=True)
class GridDensity:
    """Nonnegative density sampled at ``n + 1`` uniform nodes of ``[a, b]``."""

    a: float
    b: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        h = np.array(self.samples, dtype=float)
        h.setflags(write=False)
        object.__setattr__(self, "samples", h)
        if h.ndim != 1:
            raise DomainError("samples must be one-dimensional")
        if not self.b > self.a:
            raise DomainError(f"need b > a, got [{self.a}, {self.b}]")
        if h.size < 3:
            raise DomainError("need at least 2 grid cells")
        if not np.all(np.isfinite(h)):
            raise DomainError("samples must be finite")
        if np.any(h < 0):
            raise DomainError("samples must be nonnegative")
        if not np.any(h > 0):
            raise DomainError("density vanishes identically")

    @property
    def n(self) -> int:
        return self.samples.size - 1

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n + 1)

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                      n: int) -> GridDensity:
        x = np.linspace(a, b, n + 1)
        return cls(a, b, np.asarray(fn(x), dtype=float) * np.ones_like(x))

    def restrict(self, i0: int, i1: int) -> GridDensity:
        """Sub-density on nodes ``i0..i1`` inclusive."""
        if not 0 <= i0 < i1 <= self.n:
            raise DomainError(f"bad node range [{i0}, {i1}] for n={self.n}")
        x = self.x
        return GridDensity(float(x[i0]), float(x[i1]), self.samples[i0:i1 + 1])

    def coarsen(self) -> GridDensity:
        """Every other sample; requires an even number of cells."""
        if self.n % 2:
            raise DomainError(f"cannot coarsen a grid with odd n={self.n}")
        return GridDensity(self.a, self.b, self.samples[::2])

    def same_grid(self, other: GridDensity) -> bool:
        return self.n == other.n and self.a == other.a and self.b == other.b

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "n": self.n, "samples": self.samples.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> GridDensity:
        try:
            a, b, n, samples = float(data["a"]), float(data["b"]), int(data["n"]), data["samples"]
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed grid density: {exc}") from exc
        if len(samples) != n + 1:
            raise DomainError(f"expected {n + 1} samples, got {len(samples)}")
        return cls(a, b, np.asarray(samples, dtype=float))

    @classmethod
    def from_json(cls, text: str) -> GridDensity:
        return cls.from_dict(json.loads(text))


def _check_theta(kappa: float, theta: np.ndarray) -> None:
    if np.any(theta < 0):
        raise DomainError("theta must be nonnegative")
    if kappa > 0:
        limit = math.pi / math.sqrt(kappa)
        if np.any(theta > limit * (1 + _ENDPOINT_RTOL)):
            raise DomainError(f"theta must be < pi/sqrt(kappa) = {limit} for kappa={kappa}")


def s_kappa(kappa: float, theta):
    """Comparison sine: sin, identity or sinh scaled by sqrt(|kappa|).

    For ``kappa > 0`` the first zero ``pi/sqrt(kappa)`` itself is accepted
    and maps to 0, so that model densities can be evaluated at the
    Bonnet-Myers endpoint.
    """
    th = np.asarray(theta, dtype=float)
    _check_theta(kappa, th)
    if kappa == 0:
        out = th.copy()
    else:
        r = math.sqrt(abs(kappa))
        series = abs(kappa) * th * th < _SERIES_CUTOFF
        with np.errstate(over="ignore"):
            exact = np.sin(r * th) / r if kappa > 0 else np.sinh(r * th) / r
        t2 = kappa * th * th
        approx = th * (1 - t2 / 6 + t2 * t2 / 120)
        out = np.where(series, approx, exact)
        if kappa > 0:
            out = np.maximum(out, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def log_s_kappa(kappa: float, theta):
    """``log s_kappa(theta)``, overflow-free for large negative kappa*theta**2."""
    th = np.asarray(theta, dtype=float)
    if kappa < 0:
        _check_theta(kappa, th)
        r = math.sqrt(-kappa)
        z = r * th
        with np.errstate(divide="ignore"):
            # log sinh z = z + log1p(-exp(-2z)) - log 2, valid for large z
            big = z + np.log1p(-np.exp(-2 * np.maximum(z, 1.0))) - math.log(2) - math.log(r)
            small = np.log(s_kappa(kappa, np.minimum(th, 1.0 / r)))
        out = np.where(z > 1.0, big, small)
    else:
        with np.errstate(divide="ignore"):
            out = np.log(s_kappa(kappa, th))
    return float(out) if np.ndim(out) == 0 else out


def s_ratio_derivative(kappa: float, theta):
    """Logarithmic derivative ``s'/s`` of the comparison sine (``+inf`` at 0)."""
    th = np.asarray(theta, dtype=float)
    _check_theta(kappa, th)
    with np.errstate(divide="ignore", invalid="ignore"):
        if kappa == 0:
            out = 1.0 / th
        else:
            r = math.sqrt(abs(kappa))
            series = abs(kappa) * th * th < _SERIES_CUTOFF
            z = r * th
            exact = r / np.tan(z) if kappa > 0 else r / np.tanh(z)
            approx = 1.0 / th - kappa * th / 3
            out = np.where(series, approx, exact)
        out = np.where(th == 0, np.inf, out)
    return float(out) if np.ndim(out) == 0 else out


def bonnet_myers_diameter(params: CurvatureParams) -> float:
    if params.K > 0:
        return math.pi / math.sqrt(params.kappa)
    return math.inf


def _at_or_beyond(theta: float, limit: float) -> bool:
    return math.isfinite(limit) and theta >= limit * (1 - _ENDPOINT_RTOL)


def sigma_coeff(t: float, params: CurvatureParams, theta: float) -> float:
    """Distortion coefficient ``s(t*theta)/s(theta)``; ``+inf`` past the diameter bound."""
    if not 0 <= t <= 1:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    if theta <= 0:
        raise DomainError(f"theta must be positive, got {theta}")
    if _at_or_beyond(theta, params.diameter_bound):
        return math.inf
    k = params.kappa
    if k < 0:
        with np.errstate(divide="ignore"):
            return math.exp(log_s_kappa(k, t * theta) - log_s_kappa(k, theta))
    return s_kappa(k, t * theta) / s_kappa(k, theta)


def tau_coeff(t: float, params: CurvatureParams, theta: float) -> float:
    sig = sigma_coeff(t, params, theta)
    if math.isinf(sig):
        return math.inf if t > 0 else 0.0
    return t ** (1 / params.N) * sig ** ((params.N - 1) / params.N)


@dataclass(frozen=True)
class ModelDensity:
    """The symmetric extremal density on ``[0, D]``."""

    params: CurvatureParams
    D: float

    def __post_init__(self):
        if not self.D > 0:
            raise DomainError(f"D must be positive, got {self.D}")
        bound = self.params.diameter_bound
        if self.D > bound * (1 + _ENDPOINT_RTOL):
            raise DomainError(f"D={self.D} exceeds the diameter bound {bound}")

    def __call__(self, x):
        return model_density(self.params, self.D, x)

    def log(self, x):
        x = np.asarray(x, dtype=float)
        k, D = self.params.kappa, self.D
        arg = np.where(x <= D / 2, D - x, x)
        return (self.params.N - 1) * log_s_kappa(k, np.minimum(arg, D))

    def sample(self, n: int) -> GridDensity:
        return sample_model_density(self.params, self.D, n)


def model_density(params: CurvatureParams, D: float, x):
    """``s(D-x)^(N-1)`` on the left half of ``[0, D]``, ``s(x)^(N-1)`` on the right."""
    if not D > 0:
        raise DomainError(f"D must be positive, got {D}")
    if D > params.diameter_bound * (1 + _ENDPOINT_RTOL):
        raise DomainError(f"D={D} exceeds the diameter bound {params.diameter_bound}")
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0) or np.any(xs > D):
        raise DomainError(f"x must lie in [0, {D}]")
    arg = np.where(xs <= D / 2, D - xs, xs)
    out = s_kappa(params.kappa, arg) ** (params.N - 1)
    return float(out) if np.ndim(out) == 0 else out


def sample_model_density(params: CurvatureParams, D: float, n: int) -> GridDensity:
    x = np.linspace(0.0, D, n + 1)
    # pin the fold exactly so both branches meet on a node
    if n % 2 == 0:
        x[n // 2] = D / 2
    return GridDensity(0.0, D, model_density(params, D, x))


@dataclass(frozen=True)
class EnvelopePair:
    lower: float
    upper: float


def log_derivative_envelope(params: CurvatureParams, D: float, x):
    """Two-sided bound on ``(log h)'`` valid for every MCP density on ``[0, D]``.

    Returns an :class:`EnvelopePair` for scalar ``x`` and a ``(lower, upper)``
    tuple of arrays otherwise.
    """
    if D > params.diameter_bound * (1 + _ENDPOINT_RTOL):
        raise DomainError(f"D={D} exceeds the diameter bound {params.diameter_bound}")
    xs = np.asarray(x, dtype=float)
    if np.any(xs <= 0) or np.any(xs >= D):
        raise DomainError(f"x must lie in the open interval (0, {D})")
    k, m = params.kappa, params.N - 1
    upper = m * s_ratio_derivative(k, xs)
    lower = -m * s_ratio_derivative(k, D - xs)
    if np.ndim(xs) == 0:
        return EnvelopePair(float(lower), float(upper))
    return lower, upper


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    diameter_ok: bool
    worst_ratio: float
    worst_pair: tuple[float, float] | None
    pairs_checked: int

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "diameter_ok": self.diameter_ok,
            "worst_ratio": self.worst_ratio,
            "worst_pair": list(self.worst_pair) if self.worst_pair else None,
            "pairs_checked": self.pairs_checked,
        }


_FULL_SCAN_MAX_N = 256
_VALIDATION_SLACK = 1e-9


def _pair_nodes(n: int) -> np.ndarray:
    """Node indices entering the pairwise scan."""
    if n <= _FULL_SCAN_MAX_N:
        return np.arange(n + 1)
    # one node per stratum, plus the nodes where the envelope is steepest
    rng = np.random.default_rng(0)
    edges = np.linspace(0, n + 1, _FULL_SCAN_MAX_N + 1)
    lo, hi = np.ceil(edges[:-1]).astype(int), np.ceil(edges[1:]).astype(int)
    picks = lo + (rng.random(lo.size) * (hi - lo)).astype(int)
    extra = np.array([0, 1, 2, n // 2, n - 2, n - 1, n])
    return np.unique(np.concatenate([picks, extra]))


def validate_mcp_density(h: GridDensity, params: CurvatureParams) -> ValidationReport:
    """Check the two-sided ratio condition characterizing MCP(K, N) densities.

    The density is taken to be supported on its whole grid interval, with
    positions measured from the left endpoint.
    """
    hs = h.samples
    if np.any(hs[1:-1] <= 0):
        raise DomainError("density has interior zeros")
    D = h.length
    diameter_ok = D <= params.diameter_bound * (1 + _ENDPOINT_RTOL)
    if not diameter_ok:
        return ValidationReport(False, False, math.inf, None, 0)

    idx = _pair_nodes(h.n)
    x = np.linspace(0.0, D, h.n + 1)[idx]
    k, m = params.kappa, params.N - 1
    with np.errstate(divide="ignore"):
        lh = np.log(hs[idx])
    ls = m * log_s_kappa(k, np.minimum(x, D))
    lr = m * log_s_kappa(k, np.clip(D - x, 0.0, None))

    i0, i1 = np.triu_indices(idx.size, k=1)
    with np.errstate(invalid="ignore"):
        dl = lh[i1] - lh[i0]
        over = dl - (ls[i1] - ls[i0])
        under = (lr[i1] - lr[i0]) - dl
    # inf - inf only occurs at vanishing endpoints, where both sides are limits
    excess = np.nan_to_num(np.maximum(over, under), nan=-np.inf)
    worst = int(np.argmax(excess))
    worst_log = float(excess[worst])
    ratio = math.exp(min(worst_log, 700.0)) if worst_log > -np.inf else 0.0
    passed = worst_log <= math.log1p(_VALIDATION_SLACK)
    pair = (float(x[i0[worst]] + h.a), float(x[i1[worst]] + h.a))
    return ValidationReport(passed, True, ratio, pair, int(i0.size))


def random_mixing_field(seed: int, D: float, order: int = 4) -> Callable[[np.ndarray], np.ndarray]:
    """Smooth random field on ``[0, D]`` with values in ``[0, 1]``.

    A low-order trigonometric series pushed through a logistic squash.
    """
    rng = np.random.default_rng(seed)
    k = np.arange(order + 1)
    decay = 1.0 / (1.0 + k)
    a = rng.normal(size=order + 1) * 2.0 * decay
    b = rng.normal(size=order + 1) * 2.0 * decay

    def theta(x):
        x = np.asarray(x, dtype=float)
        phase = np.pi * np.multiply.outer(x / D, k)
        z = np.cos(phase) @ a + np.sin(phase) @ b
        return 0.5 * (1.0 + np.tanh(z))

    return theta


def _envelope_increments(params: CurvatureParams, D: float, n: int):
    """Exact integrals of the two envelope branches over each grid cell."""
    x = np.linspace(0.0, D, n + 1)
    k, m = params.kappa, params.N - 1
    ls = m * log_s_kappa(k, x)
    lr = m * log_s_kappa(k, np.clip(D - x, 0.0, None))
    with np.errstate(invalid="ignore"):
        up = np.diff(ls)
        lo = np.diff(lr)
    # at the Bonnet-Myers diameter the envelope closes: both branches agree
    up = np.where(np.isnan(up), lo, up)
    lo = np.where(np.isnan(lo) | (lo > up), up, lo)
    return up, lo


def density_from_mixing_field(params: CurvatureParams, D: float, theta, n: int) -> GridDensity:
    """Density whose log-slope mixes the two envelope branches with weight ``theta``.

    ``theta`` is a callable on ``[0, D]`` or an array of ``n`` per-cell
    weights; values must lie in ``[0, 1]``.  Each cell increment of
    ``log h`` is the ``theta``-mix of the exact envelope integrals over the
    cell, so the result satisfies the ratio condition exactly on the grid.
    The slope is clamped to ``4n/D`` where the envelope blows up.
    """
    if D > params.diameter_bound * (1 + _ENDPOINT_RTOL):
        raise DomainError(f"D={D} exceeds the diameter bound {params.diameter_bound}")
    dx = D / n
    if callable(theta):
        w = np.asarray(theta(dx * (np.arange(n) + 0.5)), dtype=float)
    else:
        w = np.asarray(theta, dtype=float)
    if w.shape != (n,):
        raise DomainError(f"mixing weights must have shape ({n},), got {w.shape}")
    if np.any(~np.isfinite(w)) or np.any(w < 0) or np.any(w > 1):
        raise DomainError("mixing weights must lie in [0, 1]")

    up, lo = _envelope_increments(params, D, n)
    cap = 4.0 * n / D * dx
    up = np.minimum(up, np.maximum(cap, lo))
    lo = np.maximum(lo, np.minimum(-cap, up))
    up = np.where(np.isinf(up), np.sign(up) * cap, up)
    lo = np.where(np.isinf(lo), np.sign(lo) * cap, lo)
    inc = w * up + (1 - w) * lo

    mid = n // 2
    ell = np.empty(n + 1)
    ell[mid] = 0.0
    ell[mid + 1:] = np.cumsum(inc[mid:])
    ell[:mid] = -np.cumsum(inc[:mid][::-1])[::-1]
    return GridDensity(0.0, D, np.exp(ell - ell.max()))


def random_mcp_density(params: CurvatureParams, D: float, seed: int, n: int = 512) -> GridDensity:
    """Random MCP(K, N) density supported on ``[0, D]``; deterministic in ``seed``."""
    if n < 64:
        raise DomainError(f"need n >= 64, got {n}")
    return density_from_mixing_field(params, D, random_mixing_field(seed, D), n)
