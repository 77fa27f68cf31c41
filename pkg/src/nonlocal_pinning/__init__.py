"""Pinning and propagation for a nonlocal bistable equation.

``u_t = d(-u + K*u) + f(u)`` on the line, with a bistable ``f``.

Modules:

* ``model``: nonlinearity, kernel, the auxiliary function ``g`` and its branches;
* ``phaseplane``: glued Hamiltonian potentials and ground-state construction
  for the exponential kernel;
* ``solver``: spectral splitting integrator on a periodic grid;
* ``classify``: run verdicts, threshold bisection, regions and sweeps;
* ``cli``: command-line driver; ``io``: CSV/JSON/SVG output.
"""

from .errors import (BranchDomainError, CaseError, HypothesisError, InstabilityError,
                     NumericalError, ParameterError, PinningError, PreconditionError)
from .model import (BistableNonlinearity, Kernel, Problem, branch_inverse, critical_a,
                    critical_points, d_ext, d_pin, g_eval, kappa)
from .phaseplane import (build_family, build_potentials, classify_case, ground_state,
                         ground_state_profile, pinning_residual, smooth_ground_state,
                         x0_of_v0, x0_star, x0_sup)
from .solver import SchemeParams, SimState, evolve, indicator_ic, make_grid
from .classify import (ClassifyParams, PRESETS, SimSetup, classify_run, region_label,
                       threshold_ell0, threshold_ell1)

__version__ = "0.1.0"

__all__ = [
    "PinningError", "ParameterError", "HypothesisError", "BranchDomainError", "CaseError",
    "PreconditionError", "NumericalError", "InstabilityError",
    "BistableNonlinearity", "Kernel", "Problem", "branch_inverse", "critical_a",
    "critical_points", "d_ext", "d_pin", "g_eval", "kappa",
    "build_family", "build_potentials", "classify_case", "ground_state", "ground_state_profile",
    "pinning_residual", "smooth_ground_state", "x0_of_v0", "x0_star", "x0_sup",
    "SchemeParams", "SimState", "evolve", "indicator_ic", "make_grid",
    "ClassifyParams", "PRESETS", "SimSetup", "classify_run", "region_label",
    "threshold_ell0", "threshold_ell1",
]
