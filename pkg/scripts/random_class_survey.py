"""Distribution of lambda[h] / lambda[h_{K,N,D}] over random MCP densities.

Every ratio should be at least 1; the minimum shows how close random
mixing fields get to the extremal density.

    python3 scripts/random_class_survey.py --K 0 --N 3 --D 1 --count 500
"""

import click
import numpy as np

from mcpgap import CurvatureParams, model_poincare, random_mcp_density, spectral_gap


@click.command()
@click.option("--K", "K", type=float, default=0.0)
@click.option("--N", "N", type=float, default=3.0)
@click.option("--D", "D", type=float, default=1.0)
@click.option("--count", default=200, show_default=True)
@click.option("--n", default=1024, show_default=True)
@click.option("--seed", default=0, show_default=True)
def main(K, N, D, count, n, seed):
    p = CurvatureParams(K, N)
    model = model_poincare(p, D, n // 2)
    ratios = np.array([
        spectral_gap(random_mcp_density(p, D, seed + i, n), eigenfunction=False).eigenvalue
        for i in range(count)
    ]) / model.value
    q = np.quantile(ratios, [0.0, 0.05, 0.5, 0.95, 1.0])
    click.echo(f"model lambda {model.value:.10g} (+/- {model.error:.2g})")
    click.echo("ratio quantiles min/5%/50%/95%/max: " + " ".join(f"{v:.5f}" for v in q))
    click.echo(f"violations: {int(np.sum(ratios < 1 - 1e-6))} of {count}")


if __name__ == "__main__":
    main()
