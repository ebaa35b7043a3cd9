"""Side-by-side table of the sharp constant and earlier lower bounds.

For each (K, N, D) prints the sharp Poincare constant, the closed-form
lower bound, and the Sturm and von Renesse constants at r = D/2, together
with the ratio of the sharp value to the best of the other three.

    python3 scripts/compare_constants.py
"""

import click

from mcpgap import (
    CurvatureParams,
    intro_lower_bound,
    sharp_poincare,
    sturm_constant,
    von_renesse_constant,
)

CASES = [(-1.0, 2.0, 1.0), (-1.0, 2.0, 3.0), (-1.0, 5.0, 1.0), (-1.0, 5.0, 3.0),
         (0.0, 2.0, 1.0), (0.0, 5.0, 1.0), (1.0, 2.0, 3.0), (1.0, 5.0, 2.0), (1.0, 13.0, 10.0)]


@click.command()
@click.option("--n", default=1024, show_default=True)
def main(n):
    header = f"{'K':>4} {'N':>4} {'D':>5} {'sharp':>12} {'lower':>12} {'sturm':>12} {'renesse':>12} {'gain':>8}"
    click.echo(header)
    for K, N, D in CASES:
        p = CurvatureParams(K, N)
        d = min(D, p.diameter_bound)
        s = sharp_poincare(p, d, n).value
        lo = intro_lower_bound(p, d)
        st = sturm_constant(p, d / 2)
        vr = von_renesse_constant(p, d / 2)
        gain = s / max(lo, st, vr)
        click.echo(f"{K:4g} {N:4g} {d:5.3g} {s:12.6g} {lo:12.6g} {st:12.6g} {vr:12.6g} {gain:8.3g}")


if __name__ == "__main__":
    main()
