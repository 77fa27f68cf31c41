"""Extinction and propagation thresholds along a line of fixed a.

For each d the script bisects the initial half-width ell of the indicator
datum for the onset of non-extinction (ell0) and of propagation (ell1), on
the desk preset (N = 2^12, T_f = 200).  Above d = 1/4 the two agree; below,
a stagnation window opens and ell1 is compared with the ground-state
plateau x0.  Expect a few minutes per d value.

    python demos/threshold_scan.py [d ...]
"""

import sys
import time

from nonlocal_pinning import classify as C
from nonlocal_pinning import model as M
from nonlocal_pinning import phaseplane as P

A = 0.3
SETUP, PARAMS = C.PRESETS["desk"]

if __name__ == "__main__":
    d_values = [float(s) for s in sys.argv[1:]] or [0.3, 0.2]
    for d in d_values:
        t0 = time.perf_counter()
        p = M.Problem.cubic(A, d)
        cache = C.VerdictCache(p, PARAMS, SETUP)
        r0 = C.threshold_ell0(p, PARAMS, SETUP, cache=cache, strict=False)
        r1 = C.threshold_ell1(p, PARAMS, SETUP, cache=cache, strict=False)
        region = C.region_label(A, d).label
        line = (f"d = {d}: {region}, ell0 {r0.status} [{r0.ell_lo:.4f}, {r0.ell_hi:.4f}], "
                f"ell1 {r1.status} [{r1.ell_lo:.4f}, {r1.ell_hi:.4f}]")
        if region in ("R2", "R3"):
            _, x0s = P.x0_star(P.build_potentials(p))
            line += f", x0(a) = {x0s:.4f}"
        print(line + f"  ({len(cache.verdicts)} runs, {time.perf_counter() - t0:.0f} s)")
