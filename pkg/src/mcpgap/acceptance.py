"""Exit criteria for the package, runnable from pytest and from ``mcpgap selftest``.

Each criterion returns a :class:`CriterionResult`; ``detail`` carries the
worst observed margin so that reports are comparable across runs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bounds import closed_form_bounds, intro_lower_bound, muckenhoupt_bounds, sphere_eigenvalue
from .geometry import CurvatureParams, GridDensity, random_mcp_density, random_mixing_field
from .sharp import model_poincare, scan_profile
from .spectral import DN, NN, check_ode_comparison, discrete_eigenvalue, spectral_gap

__all__ = ["AcceptanceConfig", "CriterionResult", "CRITERIA", "run_all", "format_report"]


@dataclass(frozen=True)
class AcceptanceConfig:
    n: int = 4096
    seed: int = 0

    @property
    def n_random(self) -> int:
        """Grid size for random densities (multiple of 4, at least 64)."""
        return max(64, (self.n // 2) // 4 * 4)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d}. {self.title}: {self.detail}"


P = CurvatureParams

# (K, N, D) settings for the random-density campaigns
RANDOM_SETTINGS = ((0.0, 3.0, 1.0), (-1.0, 2.0, 2.0), (1.0, 5.0, 4.0))


def _unit(n: int) -> GridDensity:
    return GridDensity(0.0, 1.0, np.ones(n + 1))


def c01_uniform(cfg: AcceptanceConfig) -> CriterionResult:
    t0 = time.perf_counter()
    nn = spectral_gap(_unit(cfg.n), NN, eigenfunction=False)
    dn = spectral_gap(_unit(cfg.n), DN, eigenfunction=False)
    elapsed = time.perf_counter() - t0
    e_nn = abs(nn.eigenvalue / math.pi ** 2 - 1)
    e_dn = abs(dn.eigenvalue / (math.pi ** 2 / 4) - 1)
    ok = e_nn <= 1e-6 and e_dn <= 1e-6 and elapsed < 1.0
    return CriterionResult(1, "uniform density calibration", ok,
                           f"NN rel err {e_nn:.2e}, DN rel err {e_dn:.2e} (tol 1e-6)")


def c02_sphere(cfg: AcceptanceConfig) -> CriterionResult:
    worst = 0.0
    exact_ok = True
    for N in (2.0, 3.0, 5.0, 10.0):
        p = P(1.0, N)
        target = N / (N - 1)
        near = model_poincare(p, 0.999 * p.diameter_bound, cfg.n)
        worst = max(worst, abs(near.value / target - 1))
        exact_ok &= near.method == "solver"
        at = model_poincare(p, p.diameter_bound, cfg.n)
        exact_ok &= at.method == "closed-form" and at.value == sphere_eigenvalue(p)
    ok = worst <= 2e-2 and exact_ok
    return CriterionResult(2, "sphere value", ok,
                           f"worst rel err at 0.999 D_KN {worst:.2e} (tol 2e-2), "
                           f"closed form exact: {exact_ok}")


def c03_flat_sandwich(cfg: AcceptanceConfig) -> CriterionResult:
    margin = math.inf
    for N in (1.5, 2.0, 4.0, 10.0, 20.0):
        m = model_poincare(P(0.0, N), 1.0, cfg.n)
        b = closed_form_bounds(P(0.0, N), 1.0)
        margin = min(margin, (m.value + m.error) / b.lower - 1, 1 - (m.value - m.error) / b.upper)
    return CriterionResult(3, "K=0 sandwich", margin >= 0,
                           f"min relative margin to bounds {margin:.3e}")


def c04_scaling(cfg: AcceptanceConfig) -> CriterionResult:
    worst = 0.0
    for N in (1.5, 3.0, 10.0):
        vals = [model_poincare(P(0.0, N), D, cfg.n).scaled for D in (0.1, 1.0, 10.0)]
        worst = max(worst, (max(vals) - min(vals)) / min(vals))
    neg = scan_profile(P(-1.0, 3.0), 5.0, 32, cfg.n)
    pos_p = P(1.0, 5.0)
    pos = scan_profile(pos_p, pos_p.diameter_bound, 32, cfg.n)
    ok = worst <= 1e-6 and neg.scaled_matches_curvature_sign and pos.scaled_matches_curvature_sign
    return CriterionResult(4, "scaling laws", ok,
                           f"K=0 D^2*lambda spread {worst:.2e} (tol 1e-6); "
                           f"K=-1 scaled {neg.scaled_verdict}; K=1 scaled {pos.scaled_verdict}")


def c05_non_monotone(cfg: AcceptanceConfig) -> CriterionResult:
    p = P(1.0, 13.0)
    half = model_poincare(p, p.diameter_bound / 2, cfg.n)
    full = model_poincare(p, p.diameter_bound, cfg.n)
    margin = full.value - half.value - (full.error + half.error)
    ok = full.value == 13.0 / 12.0 and margin > 0
    return CriterionResult(5, "non-monotonicity for K>0", ok,
                           f"lambda(D_KN/2)={half.value:.6g} < lambda(D_KN)={full.value:.6g}, "
                           f"margin {margin:.3e}")


def c06_muckenhoupt(cfg: AcceptanceConfig) -> CriterionResult:
    n = cfg.n_random
    violations = 0
    tightest = math.inf
    for i in range(100):
        K, N, D = RANDOM_SETTINGS[i % 3]
        h = random_mcp_density(P(K, N), D, cfg.seed + i, n)
        right = h.restrict(n // 2, n)
        r = spectral_gap(right, DN, eigenfunction=False)
        b = muckenhoupt_bounds(right)
        lo_m = (r.eigenvalue + r.error_estimate) / b.lower - 1
        hi_m = 1 - (r.eigenvalue - r.error_estimate) / b.upper
        tightest = min(tightest, lo_m, hi_m)
        violations += lo_m < 0 or hi_m < 0
    return CriterionResult(6, "Muckenhoupt bracketing", violations == 0,
                           f"{violations} violations in 100 densities, "
                           f"min relative margin {tightest:.3e}")


def c07_sharpness(cfg: AcceptanceConfig) -> CriterionResult:
    n = cfg.n_random
    models = {s: model_poincare(P(s[0], s[1]), s[2], cfg.n) for s in RANDOM_SETTINGS}
    violations = 0
    margin = math.inf
    for i in range(200):
        s = RANDOM_SETTINGS[i % 3]
        m = models[s]
        h = random_mcp_density(P(s[0], s[1]), s[2], cfg.seed + 1000 + i, n)
        r = spectral_gap(h, NN, eigenfunction=False)
        slack = 1e-6 * m.value + m.error + r.error_estimate
        gap = (r.eigenvalue - m.value + slack) / m.value
        margin = min(margin, gap)
        violations += gap < 0
    return CriterionResult(7, "sharpness over random MCP densities", violations == 0,
                           f"{violations} violations in 200 densities, "
                           f"min relative margin {margin:.3e}")


def c08_ode_comparison(cfg: AcceptanceConfig) -> CriterionResult:
    p, D = P(0.0, 3.0), 1.0
    n = cfg.n_random
    failures = 0
    for i in range(50):
        rep = check_ode_comparison(p, D, random_mixing_field(cfg.seed + 5000 + i, D), n)
        failures += not rep.holds
    identity = check_ode_comparison(p, D, lambda x: (np.asarray(x) > D / 2).astype(float), n)
    rel = abs(identity.relative_gap)
    ok = failures == 0 and rel <= 1e-8
    return CriterionResult(8, "ODE comparison", ok,
                           f"{failures} failures in 50 perturbations; identity rel diff {rel:.2e} "
                           f"(tol 1e-8)")


def c09_positive_two_sided(cfg: AcceptanceConfig) -> CriterionResult:
    margin = math.inf
    for N in (2.0, 5.0):
        p = P(1.0, N)
        r = math.sqrt(p.kappa)
        for frac in (0.3, 0.6, 0.9):
            D = frac * p.diameter_bound
            mk = model_poincare(p, D, cfg.n)
            m0 = model_poincare(P(0.0, N), D, cfg.n)
            factor = (2 * math.sin(r * D / 2) / math.sin(r * D)) ** (N - 1)
            lo = (mk.value + mk.error - (m0.value - m0.error)) / mk.value
            hi = ((m0.value + m0.error) * factor - (mk.value - mk.error)) / mk.value
            margin = min(margin, lo, hi)
    return CriterionResult(9, "K>0 two-sided control", margin >= 0,
                           f"min relative margin {margin:.3e}")


def c10_negative_lower(cfg: AcceptanceConfig) -> CriterionResult:
    margin = math.inf
    for N in (2.0, 5.0):
        for D in (1.0, 3.0):
            p = P(-1.0, N)
            m = model_poincare(p, D, cfg.n)
            margin = min(margin, (m.value + m.error) / intro_lower_bound(p, D) - 1)
    return CriterionResult(10, "K<0 lower bound", margin >= 0,
                           f"min relative margin {margin:.3e}")


def c11_convergence(cfg: AcceptanceConfig) -> CriterionResult:
    sizes = [256 * 2 ** k for k in range(6)]
    errs = [abs(discrete_eigenvalue(_unit(s), NN) - math.pi ** 2) for s in sizes]
    ratios = [a / b for a, b in zip(errs[:-1], errs[1:])]
    worst = min(ratios)
    return CriterionResult(11, "convergence order", worst >= 3.5,
                           f"n={sizes[0]}..{sizes[-1]}, min error ratio per doubling "
                           f"{worst:.4f} (tol 3.5)")


CRITERIA: tuple[Callable[[AcceptanceConfig], CriterionResult], ...] = (
    c01_uniform,
    c02_sphere,
    c03_flat_sandwich,
    c04_scaling,
    c05_non_monotone,
    c06_muckenhoupt,
    c07_sharpness,
    c08_ode_comparison,
    c09_positive_two_sided,
    c10_negative_lower,
    c11_convergence,
)


def run_all(cfg: AcceptanceConfig = AcceptanceConfig()) -> list[CriterionResult]:
    out = []
    for crit in CRITERIA:
        try:
            out.append(crit(cfg))
        except Exception as exc:  # a crash is a failed criterion, not an aborted report
            num = CRITERIA.index(crit) + 1
            out.append(CriterionResult(num, crit.__name__, False, f"error: {exc}"))
    return out


def format_report(results: list[CriterionResult], cfg: AcceptanceConfig) -> str:
    lines = [f"# acceptance n={cfg.n} seed={cfg.seed}"]
    lines += [r.line() for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"# {passed}/{len(results)} criteria passed")
    return "\n".join(lines) + "\n"
