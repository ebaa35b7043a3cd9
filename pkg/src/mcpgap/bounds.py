"""Closed-form and Hardy-type bounds on one-dimensional Poincare constants."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .geometry import CurvatureParams, DomainError, GridDensity, s_kappa, sigma_coeff

__all__ = [
    "BoundsPair",
    "muckenhoupt_A",
    "muckenhoupt_bounds",
    "muckenhoupt_closed_form_A",
    "closed_form_bounds",
    "sphere_eigenvalue",
    "intro_lower_bound",
    "sturm_constant",
    "von_renesse_constant",
]

_REFINE = 8
_DIVERGENCE_CAP = 1e12
_ENDPOINT_RTOL = 1e-12


@dataclass(frozen=True)
class BoundsPair:
    lower: float
    upper: float
    provenance: str

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def scaled(self, factor: float) -> BoundsPair:
        return BoundsPair(self.lower * factor, self.upper * factor, self.provenance)

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "provenance": self.provenance}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def muckenhoupt_A(h: GridDensity) -> float:
    """``sup_x int_a^x dt/h * int_x^b h dt`` over the grid.

    Trapezoid integrals on the grid, followed by one pass on an 8x finer
    grid (linear interpolation of ``h``) over the two cells adjacent to the
    best node.  Returns ``inf`` when ``1/h`` is not integrable at ``a``.
    """
    hs = h.samples
    if np.any(hs[1:] <= 0):
        raise DomainError("density must be positive on (a, b]")
    if hs[0] <= 0:
        return math.inf
    x = h.x
    left = cumulative_trapezoid(1.0 / hs, x, initial=0.0)
    if left[-1] > _DIVERGENCE_CAP:
        return math.inf
    mass = cumulative_trapezoid(hs, x, initial=0.0)
    right = mass[-1] - mass
    prod = left * right
    k = int(np.argmax(prod))
    best = float(prod[k])

    i0, i1 = max(k - 1, 0), min(k + 1, h.n)
    xf = np.linspace(x[i0], x[i1], _REFINE * (i1 - i0) + 1)
    hf = np.interp(xf, x[i0:i1 + 1], hs[i0:i1 + 1])
    lf = left[i0] + cumulative_trapezoid(1.0 / hf, xf, initial=0.0)
    local = cumulative_trapezoid(hf, xf, initial=0.0)
    rf = right[i1] + (local[-1] - local)
    return max(best, float(np.max(lf * rf)))


def muckenhoupt_bounds(h: GridDensity) -> BoundsPair:
    """Bracket for the first Dirichlet(left)-Neumann(right) eigenvalue: ``[1/(4A), 1/A]``."""
    A = muckenhoupt_A(h)
    if math.isinf(A):
        raise DomainError("Muckenhoupt integral diverges at the Dirichlet end")
    return BoundsPair(1.0 / (4 * A), 1.0 / A, "muckenhoupt")


def muckenhoupt_closed_form_A(N: float, x) -> np.ndarray:
    """Product of integrals for ``t^(N-1)`` on ``[1/2, 1]`` as a function of ``x`` (N != 2)."""
    x = np.asarray(x, dtype=float)
    return (2 ** (N - 2) - x ** (2 - N)) / (N - 2) * (1 - x ** N) / N


def _check_diameter(params: CurvatureParams, D: float) -> None:
    if not D > 0:
        raise DomainError(f"D must be positive, got {D}")
    if D > params.diameter_bound * (1 + _ENDPOINT_RTOL):
        raise DomainError(f"D={D} exceeds the diameter bound {params.diameter_bound}")


def _flat_bounds(N: float) -> tuple[float, float]:
    c = N * N * 2.0 ** (-(N - 1))
    return c / 4, math.pi ** 2 * c


def closed_form_bounds(params: CurvatureParams, D: float) -> BoundsPair:
    """Bracket for ``D**2 * lambda[h_{K,N,D}]``."""
    _check_diameter(params, D)
    K, N = params.K, params.N
    lo0, hi0 = _flat_bounds(N)
    if K == 0:
        return BoundsPair(lo0, hi0, "flat: muckenhoupt on model half-interval")
    if K < 0:
        sig = sigma_coeff(0.5, params, D)
        lower = D * D / 4 * max(abs(K) * (N - 1), N * N / (D * D)) * sig ** (N - 1)
        # h_{0,N,D} is itself MCP(K,N) for K < 0, so its gap caps the model's
        return BoundsPair(lower, hi0, "negative: muckenhoupt lower; flat upper by class inclusion")
    if D >= params.diameter_bound * (1 - _ENDPOINT_RTOL):
        exact = D * D * sphere_eigenvalue(params)
        return BoundsPair(lo0, exact, "positive: flat lower; sphere value at the diameter bound")
    r = math.sqrt(params.kappa)
    ratio = 2 * math.sin(r * D / 2) / math.sin(r * D)
    return BoundsPair(lo0, hi0 * ratio ** (N - 1), "positive: flat comparison, two-sided")


def sphere_eigenvalue(params: CurvatureParams) -> float:
    """``N K / (N - 1)``: the gap of ``sin(sqrt(K/(N-1)) t)^(N-1)`` on ``[0, D_{K,N}]``.

    The eigenfunction is ``cos(sqrt(K/(N-1)) t)``.
    """
    if params.K <= 0:
        raise DomainError(f"sphere value needs K > 0, got K={params.K}")
    return params.N * params.K / (params.N - 1)


def intro_lower_bound(params: CurvatureParams, D: float) -> float:
    if not D > 0:
        raise DomainError(f"D must be positive, got {D}")
    K, N = params.K, params.N
    if K >= 0:
        return 0.25 * N * N / (D * D) * 2.0 ** (-(N - 1))
    r = math.sqrt(-K / (N - 1))
    # sinh(rD/2)/sinh(rD) = 1/(2 cosh(rD/2)), stable for large rD
    ratio = 0.5 / math.cosh(r * D / 2)
    return 0.25 * max(abs(K) * (N - 1), N * N / (D * D)) * ratio ** (N - 1)


def sturm_constant(params: CurvatureParams, r: float) -> float:
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    N = params.N
    base = (2 + N) / (N * 2.0 ** N) / (2 * r) ** 2
    if params.K >= 0:
        return base
    return base * (2 * r / s_kappa(params.kappa, 2 * r)) ** (N - 1)


def von_renesse_constant(params: CurvatureParams, r: float) -> float:
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    N = params.N
    if params.K >= 0:
        return 0.5 / (2 * r) * 2.0 ** (-(N - 1))
    return 0.5 / (2 * r) * sigma_coeff(0.5, params, 2 * r) ** (N - 1)
