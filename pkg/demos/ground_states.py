"""Glued ground states for two parameter pairs.

At (a, d) = (0.2, 0.2) the family of discontinuous states is bounded and
x0 stays below 1.  At (0.35, 0.05) the front is pinned and x0 grows without
bound as v0 approaches v_c.  The script writes family CSVs and one SVG of
profiles per pair into ``demo_out/ground_states``.

    python demos/ground_states.py
"""

from pathlib import Path

import numpy as np

from nonlocal_pinning import io
from nonlocal_pinning import model as M
from nonlocal_pinning import phaseplane as P

OUT = Path("demo_out/ground_states")


def show(a, d):
    gp = P.build_potentials(M.Problem.cubic(a, d))
    case = P.classify_case(gp)
    fam = P.build_family(gp)
    print(f"(a, d) = ({a}, {d}): {case.describe()}, v0 in ({fam.v_lo:.4g}, {fam.v_hi:.4g})")
    v0s, x0s, vstars = P.family_table(gp, 40, fam)
    io.family_csv(OUT / f"family_a{a}_d{d}.csv", v0s, x0s, vstars)

    # three members of the family, from small to large plateau
    xs = np.linspace(-12, 12, 1201)
    series = []
    for v0 in fam.sample(5)[1:4]:
        gs = P.ground_state(gp, v0)
        series.append((f"v0={v0:.3f}, x0={gs.x0:.3f}", xs, gs.U(xs)))
        jump = gs.U([gs.x0 - 1e-9])[0] - gs.U([gs.x0 + 1e-9])[0]
        print(f"  v0 = {v0:.4f}: x0 = {gs.x0:.5f}, U jumps down by {jump:.4f}")
    io.svg_lines(OUT / f"profiles_a{a}_d{d}.svg", series, title=f"ground states a={a} d={d}",
                 xlabel="x", ylabel="U")


if __name__ == "__main__":
    show(0.2, 0.2)
    show(0.35, 0.05)
    print(f"files in {OUT}/")
