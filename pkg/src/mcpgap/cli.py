"""Command-line front end.

Usage:
    mcpgap compute --K 0 --N 5 --D 1
    mcpgap scan --K 1 --N 13 --count 32
    mcpgap bounds --K -1 --N 3 --D 2
    mcpgap density --K 0 --N 3 --D 1 --seed 7 > h.json
    mcpgap validate --K 0 --N 3 --density h.json
    mcpgap gap --density h.json --bc NN
    mcpgap selftest

JSON and CSV go to standard output, diagnostics to standard error.  Exit
status: 0 success, 1 selftest failure, 2 invalid input, 3 solver failure.
"""

from __future__ import annotations

import functools
import json
import math
import sys

import click

from .acceptance import AcceptanceConfig, format_report, run_all
from .bounds import (
    closed_form_bounds,
    intro_lower_bound,
    muckenhoupt_bounds,
    sphere_eigenvalue,
    sturm_constant,
    von_renesse_constant,
)
from .geometry import (
    CurvatureParams,
    DomainError,
    GridDensity,
    random_mcp_density,
    sample_model_density,
    validate_mcp_density,
)
from .sharp import DEFAULT_N, model_poincare, scan_profile, sharp_poincare
from .spectral import BoundaryConditions, SolverError, spectral_gap

__all__ = ["cli", "main"]

EXIT_FAILED = 1
EXIT_DOMAIN = 2
EXIT_SOLVER = 3


def fmt(x: float) -> str:
    return f"{x:.12g}"


def _round(obj):
    """12 significant digits for every float; non-finite values become null."""
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def emit_json(obj) -> None:
    click.echo(json.dumps(_round(obj), indent=2))


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DomainError as exc:
            _fail(EXIT_DOMAIN, str(exc).splitlines()[0])
        except SolverError as exc:
            _fail(EXIT_SOLVER, str(exc).splitlines()[0])
    return wrapper


def _params(K: float, N: float) -> CurvatureParams:
    return CurvatureParams(K, N)


def _effective_D(p: CurvatureParams, D: float | None) -> float:
    if D is None:
        if not math.isfinite(p.diameter_bound):
            raise DomainError("--D is required when K <= 0")
        return p.diameter_bound
    if not D > 0:
        raise DomainError(f"--D must be positive, got {D}")
    return min(D, p.diameter_bound)


def _read_density(path: str) -> GridDensity:
    try:
        with click.open_file(path) as fh:
            return GridDensity.from_json(fh.read())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read density from {path}: {exc}") from exc


def _check_n(n: int) -> None:
    if n < 4 or n % 2:
        raise DomainError(f"--n must be an even integer >= 4, got {n}")


K_OPT = click.option("--K", "K", type=float, required=True, help="curvature lower bound")
N_OPT = click.option("--N", "N", type=float, required=True, help="dimension upper bound (> 1)")
N_GRID_OPT = click.option("--n", "n", type=int, default=DEFAULT_N, show_default=True,
                          help="grid cells (solved at n and 2n)")


@click.group()
def cli():
    """Sharp Poincare constants of one-dimensional MCP(K, N) densities."""


@cli.command()
@K_OPT
@N_OPT
@click.option("--D", "D", type=float, required=True, help="diameter upper bound")
@N_GRID_OPT
@click.option("--dense-scan", is_flag=True, help="double-check the K>0 infimum on 512 points")
@guarded
def compute(K, N, D, n, dense_scan):
    """Sharp constant and comparison bounds for diameter D."""
    _check_n(n)
    p = _params(K, N)
    d = _effective_D(p, D)
    res = sharp_poincare(p, d, n, dense_scan=dense_scan)
    model = model_poincare(p, d, n)
    cf = closed_form_bounds(p, d)
    out = res.to_dict()
    out["D"] = D
    out["D_effective"] = d
    out["model"] = {"value": model.value, "error": model.error, "method": model.method}
    out["intro_lower_bound"] = intro_lower_bound(p, d)
    out["closed_form_bounds"] = cf.to_dict()
    out["closed_form_bounds_lambda"] = cf.scaled(1 / (d * d)).to_dict()
    out["sturm_constant"] = sturm_constant(p, d / 2)
    out["von_renesse_constant"] = von_renesse_constant(p, d / 2)
    emit_json(out)


@cli.command()
@K_OPT
@N_OPT
@click.option("--D", "D", type=float, default=None,
              help="largest diameter (defaults to the Bonnet-Myers bound when K > 0)")
@click.option("--count", type=int, default=32, show_default=True)
@N_GRID_OPT
@click.option("--output", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@guarded
def scan(K, N, D, count, n, output):
    """Profile of lambda and D'^2 lambda over geometrically spaced D'."""
    _check_n(n)
    p = _params(K, N)
    prof = scan_profile(p, _effective_D(p, D), count, n)
    if output == "json":
        emit_json({
            "K": K, "N": N,
            "rows": [dict(zip(("D_prime", "lambda", "scaled", "error"), r.as_tuple()))
                     for r in prof.rows],
            "lambda_verdict": prof.lambda_verdict,
            "scaled_verdict": prof.scaled_verdict,
        })
        return
    click.echo("D_prime,lambda,scaled,error")
    for r in prof.rows:
        click.echo(",".join(fmt(v) for v in r.as_tuple()))
    click.echo(prof.verdict_line())


@cli.command()
@K_OPT
@N_OPT
@click.option("--D", "D", type=float, required=True)
@click.option("--density", "density_path", default=None,
              help="grid density JSON for the Muckenhoupt bracket ('-' for stdin)")
@guarded
def bounds(K, N, D, density_path):
    """Closed-form bounds and prior-art constants."""
    p = _params(K, N)
    d = _effective_D(p, D)
    cf = closed_form_bounds(p, d)
    out = {
        "K": K, "N": N, "D": d,
        "closed_form_bounds": cf.to_dict(),
        "closed_form_bounds_lambda": cf.scaled(1 / (d * d)).to_dict(),
        "intro_lower_bound": intro_lower_bound(p, d),
        "sphere_eigenvalue": sphere_eigenvalue(p) if K > 0 else None,
        "sturm_constant": sturm_constant(p, d / 2),
        "von_renesse_constant": von_renesse_constant(p, d / 2),
    }
    if density_path:
        out["muckenhoupt"] = muckenhoupt_bounds(_read_density(density_path)).to_dict()
    emit_json(out)


@cli.command()
@K_OPT
@N_OPT
@click.option("--density", "density_path", required=True,
              help="grid density JSON ('-' for stdin)")
@guarded
def validate(K, N, density_path):
    """Check the MCP(K, N) ratio condition on a sampled density."""
    report = validate_mcp_density(_read_density(density_path), _params(K, N))
    emit_json(report.to_dict())


@cli.command()
@K_OPT
@N_OPT
@click.option("--D", "D", type=float, required=True)
@click.option("--n", "n", type=int, default=512, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--model", is_flag=True, help="emit the model density instead of a random one")
@guarded
def density(K, N, D, n, seed, model):
    """Emit a grid density as JSON."""
    p = _params(K, N)
    h = sample_model_density(p, D, n) if model else random_mcp_density(p, D, seed, n)
    click.echo(h.to_json())


@cli.command()
@click.option("--density", "density_path", required=True,
              help="grid density JSON ('-' for stdin)")
@click.option("--bc", default="NN", show_default=True, help="boundary conditions, e.g. NN, DN")
@click.option("--eigenfunction", is_flag=True, help="include eigenfunction samples")
@guarded
def gap(density_path, bc, eigenfunction):
    """First (nonzero) eigenvalue of a grid density."""
    h = _read_density(density_path)
    res = spectral_gap(h, BoundaryConditions.parse(bc), eigenfunction=True)
    emit_json(res.to_dict(include_eigenfunction=eigenfunction))


@cli.command()
@click.option("--n", "n", type=int, default=DEFAULT_N, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@guarded
def selftest(n, seed):
    """Run every acceptance criterion and print a pass/fail table."""
    _check_n(n)
    cfg = AcceptanceConfig(n=n, seed=seed)
    results = run_all(cfg)
    click.echo(format_report(results, cfg), nl=False)
    if not all(r.passed for r in results):
        sys.exit(EXIT_FAILED)


def main():
    cli()


if __name__ == "__main__":
    main()
