"""Region map of the (a, d) plane from the closed-form boundaries.

Prints the critical value a_c where the pinning and extinction lines cross,
then labels a 40 x 40 grid and writes it as CSV and SVG into
``demo_out/regions``.  No simulations are run.

    python demos/region_map.py
"""

from pathlib import Path

import numpy as np

from nonlocal_pinning import classify as C
from nonlocal_pinning import io
from nonlocal_pinning import model as M

OUT = Path("demo_out/regions")

if __name__ == "__main__":
    ac = M.critical_a()
    print(f"a_c = {ac:.10f}, where d_pin = d_ext = {M.d_ext(ac):.6f}")
    for a in (0.1, 0.3, 0.45):
        print(f"  a = {a}: d_ext = {M.d_ext(a):.5f}, d_pin = {M.d_pin(a):.5f}")

    rows = []
    for a in np.linspace(0.01, 0.49, 40):
        for d in np.linspace(0.005, 0.35, 40):
            r = C.region_label(a, d)
            rows.append((a, d, r.label, r.sub or "", r.boundary))
    io.write_csv(OUT / "regions.csv", ["a", "d", "region", "sub", "boundary"], rows)
    io.svg_scatter(OUT / "regions.svg", [r[0] for r in rows], [r[1] for r in rows],
                   [r[2] for r in rows], title="regions of the (a, d) plane",
                   xlabel="a", ylabel="d")
    counts = {lab: sum(r[2] == lab for r in rows) for lab in C.TABLE_PATTERN}
    print("grid counts:", counts)
    print(f"files in {OUT}/")
