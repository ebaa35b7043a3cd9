"""First eigenvalues of the weighted Sturm-Liouville operator ``-(h u')'/h``.

The operator is discretized in flux form on the uniform grid of a
:class:`~mcpgap.geometry.GridDensity`:

    (A u)_i = [w_{i-1/2} (u_i - u_{i-1}) + w_{i+1/2} (u_i - u_{i+1})] / dx**2
    (M u)_i = m_i h_i u_i

with ``w_{i+1/2} = (h_i + h_{i+1}) / 2`` and trapezoid weights ``m_i``
(1/2 at a Neumann end, which is what ghost-node reflection reduces to once
the boundary row is symmetrized).  Dirichlet ends are eliminated.  The
pencil ``(A, M)`` is reduced to the symmetric tridiagonal matrix
``M^{-1/2} A M^{-1/2}`` whose eigenvalues are located by Sturm-sequence
bisection.  Each solve runs on the given grid and on its every-other-node
coarsening, and the pair is Richardson-extrapolated.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from .geometry import (
    CurvatureParams,
    DomainError,
    GridDensity,
    density_from_mixing_field,
    sample_model_density,
)

__all__ = [
    "SolverError",
    "BC",
    "BoundaryConditions",
    "NN",
    "DN",
    "ND",
    "DD",
    "SpectralResult",
    "TridiagonalPencil",
    "assemble",
    "sturm_count",
    "bisect_eigenvalue",
    "discrete_eigenvalue",
    "spectral_gap",
    "rayleigh_quotient",
    "eigenfunction_zero",
    "osc",
    "ComparisonReport",
    "check_ode_comparison",
]

FLOOR_REL = 1e-13
INVERSE_ITERATIONS = 3
MAX_BISECTIONS = 200
# bisect to relative accuracy: the default LAPACK tolerance eps*||T|| is far
# too loose once floored weights make ||T|| huge
_ABS_TOL = np.finfo(float).tiny


class SolverError(RuntimeError):
    """The discrete eigenproblem could not be solved."""


class BC(enum.Enum):
    DIRICHLET = "D"
    NEUMANN = "N"


@dataclass(frozen=True)
class BoundaryConditions:
    left: BC
    right: BC

    @classmethod
    def parse(cls, code: str) -> BoundaryConditions:
        code = code.upper()
        if len(code) != 2 or any(c not in "DN" for c in code):
            raise DomainError(f"boundary code must be two letters from D/N, got {code!r}")
        return cls(BC(code[0]), BC(code[1]))

    @property
    def code(self) -> str:
        return self.left.value + self.right.value

    @property
    def pure_neumann(self) -> bool:
        return self.left is BC.NEUMANN and self.right is BC.NEUMANN


NN = BoundaryConditions(BC.NEUMANN, BC.NEUMANN)
DN = BoundaryConditions(BC.DIRICHLET, BC.NEUMANN)
ND = BoundaryConditions(BC.NEUMANN, BC.DIRICHLET)
DD = BoundaryConditions(BC.DIRICHLET, BC.DIRICHLET)


@dataclass(frozen=True)
class SpectralResult:
    eigenvalue: float
    error_estimate: float
    eigenfunction: np.ndarray = field(repr=False)
    zero_location: float | None
    n: int
    bc: BoundaryConditions
    lambda_fine: float
    lambda_coarse: float
    a: float
    b: float
    floored: bool = False

    def to_dict(self, include_eigenfunction: bool = False) -> dict:
        out = {
            "lambda": self.eigenvalue,
            "error": self.error_estimate,
            "zero": self.zero_location,
            "n": self.n,
        }
        if include_eigenfunction:
            out["eigenfunction"] = self.eigenfunction.tolist()
        return out

    def to_json(self, include_eigenfunction: bool = False) -> str:
        return json.dumps(self.to_dict(include_eigenfunction))


@dataclass(frozen=True)
class TridiagonalPencil:
    """Symmetrized pencil: ``diag``/``off`` of ``M^{-1/2} A M^{-1/2}`` plus ``M``."""

    diag: np.ndarray
    off: np.ndarray
    mass: np.ndarray
    free: slice  # grid nodes carrying an unknown


def _floored(h: np.ndarray) -> tuple[np.ndarray, bool]:
    floor = FLOOR_REL * h.max()
    low = h < floor
    if not low.any():
        return h, False
    return np.where(low, floor, h), True


def assemble(samples: np.ndarray, dx: float, bc: BoundaryConditions) -> TridiagonalPencil:
    h = np.asarray(samples, dtype=float)
    n = h.size - 1
    w = 0.5 * (h[:-1] + h[1:]) / (dx * dx)  # flux coefficient per cell
    m = h.copy()
    stiff = np.zeros(n + 1)
    stiff[:-1] += w
    stiff[1:] += w
    if bc.left is BC.NEUMANN:
        m[0] *= 0.5
        stiff[0] = w[0]
    if bc.right is BC.NEUMANN:
        m[-1] *= 0.5
        stiff[-1] = w[-1]
    lo = 1 if bc.left is BC.DIRICHLET else 0
    hi = n if bc.right is BC.DIRICHLET else n + 1
    if hi - lo < 1:
        raise DomainError("grid too small for the requested boundary conditions")
    stiff, m = stiff[lo:hi], m[lo:hi]
    off = -w[lo:hi - 1] if hi - lo > 1 else np.zeros(0)
    if np.any(m <= 0):
        raise SolverError("degenerate weight: nonpositive mass on an unknown")
    r = 1.0 / np.sqrt(m)
    return TridiagonalPencil(stiff * r * r, off * r[:-1] * r[1:], m, slice(lo, hi))


def sturm_count(diag: np.ndarray, off: np.ndarray, x: float) -> int:
    """Number of eigenvalues of the symmetric tridiagonal matrix below ``x``."""
    count = 0
    q = 1.0
    tiny = np.finfo(float).tiny
    e2 = off * off
    for i in range(diag.size):
        q = diag[i] - x - (e2[i - 1] / q if i else 0.0)
        if q == 0.0:
            q = -tiny
        if q < 0:
            count += 1
    return count


def bisect_eigenvalue(diag: np.ndarray, off: np.ndarray, k: int, rtol: float = 1e-14,
                      max_iter: int = MAX_BISECTIONS) -> float:
    """``k``-th smallest eigenvalue (0-based) by Sturm-sequence bisection."""
    radius = np.zeros_like(diag)
    radius[:-1] += np.abs(off)
    radius[1:] += np.abs(off)
    lo, hi = float(np.min(diag - radius)), float(np.max(diag + radius))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if sturm_count(diag, off, mid) > k:
            hi = mid
        else:
            lo = mid
        if hi - lo <= rtol * max(abs(lo), abs(hi)) or hi - lo <= _ABS_TOL:
            return 0.5 * (lo + hi)
    raise SolverError(f"bisection did not bracket eigenvalue {k} within {max_iter} iterations")


def _eigenvalue(pencil: TridiagonalPencil, k: int, engine: str) -> float:
    if engine == "python":
        return bisect_eigenvalue(pencil.diag, pencil.off, k)
    if engine != "lapack":
        raise ValueError(f"unknown engine {engine!r}")
    try:
        vals = eigh_tridiagonal(pencil.diag, pencil.off, eigvals_only=True, select="i",
                                select_range=(k, k), lapack_driver="stebz", tol=_ABS_TOL)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"Sturm bisection failed: {exc}") from exc
    if vals.size != 1 or not np.isfinite(vals[0]):
        raise SolverError("Sturm bisection returned no eigenvalue")
    return float(vals[0])


def _inverse_iteration(pencil: TridiagonalPencil, lam: float) -> np.ndarray:
    d, e = pencil.diag, pencil.off
    size = d.size
    shift = lam * (1 + 1e-12)
    ab = np.zeros((3, size))
    ab[0, 1:] = e
    ab[1] = d - shift
    ab[2, :-1] = e
    y = np.ones(size) + np.linspace(0.0, 1.0, size)
    for _ in range(INVERSE_ITERATIONS):
        y = solve_banded((1, 1), ab, y, check_finite=False)
        y /= np.linalg.norm(y)
    return y


def _pencil_index(bc: BoundaryConditions) -> int:
    # the constant vector is an exact null mode of the pure Neumann pencil
    return 1 if bc.pure_neumann else 0


def discrete_eigenvalue(h: GridDensity, bc: BoundaryConditions, engine: str = "lapack") -> float:
    """Single-resolution eigenvalue of the discrete pencil (no extrapolation)."""
    samples, _ = _floored(h.samples)
    pencil = assemble(samples, h.dx, bc)
    return _eigenvalue(pencil, _pencil_index(bc), engine)


def _sign_changes(u: np.ndarray) -> int:
    s = np.sign(u)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _zero_crossing(x: np.ndarray, u: np.ndarray) -> float:
    if _sign_changes(u) != 1:
        raise SolverError(f"eigenfunction has {_sign_changes(u)} sign changes, expected 1")
    nz = np.flatnonzero(u)
    for j0, j1 in zip(nz[:-1], nz[1:]):
        if np.sign(u[j0]) != np.sign(u[j1]):
            if j1 - j0 > 1:
                return float(x[j0 + 1])
            return float(x[j0] - u[j0] * (x[j1] - x[j0]) / (u[j1] - u[j0]))
    raise SolverError("no sign change located")


def spectral_gap(h: GridDensity, bc: BoundaryConditions = NN, engine: str = "lapack",
                 eigenfunction: bool = True) -> SpectralResult:
    """First (nonzero, for Neumann-Neumann) eigenvalue with a Richardson error estimate.

    The supplied grid is the fine level; the coarse level keeps every other
    node, so ``h.n`` must be even.  Samples below ``1e-13 * max(h)`` are
    raised to that floor.
    """
    if h.n % 2:
        raise DomainError(f"grid must have an even number of cells, got n={h.n}")
    samples, floored = _floored(h.samples)
    if samples.max() <= 0:
        raise SolverError("degenerate weight")
    k = _pencil_index(bc)
    fine = assemble(samples, h.dx, bc)
    coarse = assemble(samples[::2], 2 * h.dx, bc)
    lam_f = _eigenvalue(fine, k, engine)
    lam_c = _eigenvalue(coarse, k, engine)
    lam = (4 * lam_f - lam_c) / 3
    err = abs(lam_f - lam_c) / 3

    u = np.zeros(h.n + 1)
    zero = None
    if eigenfunction:
        y = _inverse_iteration(fine, lam_f)
        u[fine.free] = y / np.sqrt(fine.mass)
        # unit norm in the trapezoid-weighted L2(h) inner product
        trap = np.full(h.n + 1, h.dx)
        trap[[0, -1]] *= 0.5
        u /= math.sqrt(float(np.sum(trap * samples * u * u)))
        ref = u[-1] if bc.right is BC.NEUMANN else u[u.size // 2]
        if ref < 0:
            u = -u
        if bc.pure_neumann:
            zero = _zero_crossing(h.x, u)
    u.setflags(write=False)
    return SpectralResult(lam, err, u, zero, h.n, bc, lam_f, lam_c, h.a, h.b, floored)


def spectral_gap_of(fn: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                    bc: BoundaryConditions = NN, n: int = 4096, **kw) -> SpectralResult:
    """Sample ``fn`` on ``2n`` cells and solve at resolutions ``n`` and ``2n``."""
    return spectral_gap(GridDensity.from_function(fn, a, b, 2 * n), bc, **kw)


def rayleigh_quotient(h: GridDensity, f) -> float:
    """Discrete ``int |f'|^2 h / int |f - mean|^2 h`` on the grid of ``h``.

    Derivatives are centered at cell midpoints and paired with the
    midpoint-averaged density; the variance uses trapezoid weights.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != h.samples.shape:
        raise DomainError(f"f must have {h.n + 1} samples")
    hs = h.samples
    dx = h.dx
    num = float(np.sum(np.diff(f) ** 2 * 0.5 * (hs[:-1] + hs[1:]))) / dx
    trap = np.full(h.n + 1, dx)
    trap[[0, -1]] *= 0.5
    wt = trap * hs
    mean = float(np.sum(wt * f) / np.sum(wt))
    var = float(np.sum(wt * (f - mean) ** 2))
    scale = float(np.sum(wt * f * f))
    if not var > 1e-24 * scale or var <= 0:
        raise DomainError("f is constant up to rounding; Rayleigh quotient undefined")
    return num / var


def eigenfunction_zero(result: SpectralResult) -> float:
    """Location of the unique sign change of a Neumann-Neumann eigenfunction."""
    if not result.bc.pure_neumann:
        raise DomainError("zero location is defined for Neumann-Neumann results only")
    x = np.linspace(result.a, result.b, result.n + 1)
    return _zero_crossing(x, result.eigenfunction)


def osc(h1: GridDensity, h2: GridDensity) -> float:
    """``max(h2/h1) * max(h1/h2)`` over the common grid."""
    if not h1.same_grid(h2):
        raise DomainError("densities live on different grids")
    if np.any(h1.samples <= 0) or np.any(h2.samples <= 0):
        raise DomainError("osc requires strictly positive densities")
    r = h2.samples / h1.samples
    return float(r.max() / r.min())


@dataclass(frozen=True)
class ComparisonReport:
    lambda_model: float
    lambda_perturbed: float
    error_model: float
    error_perturbed: float
    holds: bool

    @property
    def relative_gap(self) -> float:
        return (self.lambda_perturbed - self.lambda_model) / self.lambda_model


def check_ode_comparison(params: CurvatureParams, D: float, perturbation, n: int = 4096,
                         engine: str = "lapack") -> ComparisonReport:
    """Compare the Neumann gap of a perturbed density with that of the model.

    The perturbed log-density has slope ``theta*upper + (1-theta)*lower``
    (cellwise exact envelope integrals), where ``theta`` in ``[0, 1]`` is
    the given mixing field.  Such a slope dominates the model's on the left
    half and is dominated by it on the right half.
    """
    if not D < params.diameter_bound:
        raise DomainError(f"need D < {params.diameter_bound}, got {D}")
    if n % 2:
        raise DomainError("n must be even")
    model = sample_model_density(params, D, n)
    perturbed = density_from_mixing_field(params, D, perturbation, n)
    r0 = spectral_gap(model, NN, engine=engine, eigenfunction=False)
    r1 = spectral_gap(perturbed, NN, engine=engine, eigenfunction=False)
    tol = r0.error_estimate + r1.error_estimate
    holds = r1.eigenvalue >= r0.eigenvalue - tol
    return ComparisonReport(r0.eigenvalue, r1.eigenvalue, r0.error_estimate,
                            r1.error_estimate, bool(holds))
