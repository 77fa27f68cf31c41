"""Long-time behavior of indicator data and the thresholds in ``ell``.

A run started from ``1_[-ell, ell]`` is declared

* ``Extinction`` as soon as ``max u < a - eps_zero``;
* ``Propagation`` once the solution is near 1 on the central interval,
  its mass has grown strictly over the trailing window and the level-1/2
  front has moved out by ``front_advance`` past ``max(ell, halfwidth)``;
* ``Stagnation`` once ``u`` changes by less than ``eps_steady`` (sup norm)
  over the trailing window while staying localized with ``max u > a``;
* ``Undecided`` if none of these fired before ``T_f``.
"""

from __future__ import annotations

import math
import os
import warnings
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import NumericalError, ParameterError, PinningError, PreconditionError
from .model import Problem, critical_a, d_ext, d_pin, f_critical_points, g_eval
from .solver import (
    BoundaryContaminationWarning,
    SchemeParams,
    SimState,
    evolve,
    indicator_ic,
    make_grid,
)

EXTINCTION = "Extinction"
PROPAGATION = "Propagation"
STAGNATION = "Stagnation"
UNDECIDED = "Undecided"

BOUNDARY_TOL = 1e-10


@dataclass(frozen=True)
class SimSetup:
    """Grid and time stepping shared by every run of a study."""

    N: int = 2 ** 14
    L: float = 10.0 * math.pi
    dt: float = 0.01
    scheme: str = "richardson4"

    def grid(self):
        return make_grid(self.N, self.L)

    def scheme_params(self) -> SchemeParams:
        return SchemeParams(self.dt, self.scheme)


@dataclass(frozen=True)
class ClassifyParams:
    T_f: float = 500.0
    check_window: float = 20.0
    eps_zero: float = 1e-3
    eps_one: float = 1e-2
    eps_steady: float = 1e-5
    prop_interval_halfwidth: float = 5.0
    front_advance: float = 1.0
    every: int = 10

    def __post_init__(self):
        for name in ("T_f", "check_window", "eps_zero", "eps_one", "eps_steady",
                     "prop_interval_halfwidth", "front_advance"):
            if not getattr(self, name) > 0.0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if int(self.every) < 1:
            raise ParameterError("every must be >= 1")


PRESETS = {
    "full": (SimSetup(), ClassifyParams()),
    "desk": (SimSetup(N=2 ** 12), ClassifyParams(T_f=200.0)),
}


@dataclass(frozen=True)
class Verdict:
    label: str
    t_decided: float
    final_mass: float
    final_max: float
    final_energy: float
    steady_residual: float
    boundary_warning: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


class _Judge:
    """Observer deciding the verdict from the diagnostic stream."""

    def __init__(self, p: Problem, ell: float, grid, params: ClassifyParams, dt: float):
        self.p, self.ell, self.params = p, ell, params
        self.a = p.a
        x = grid.x
        self.x = x
        self.central = np.abs(x) <= params.prop_interval_halfwidth
        self.right = x >= 0.0
        self.front_goal = max(ell, params.prop_interval_halfwidth) + params.front_advance
        n_window = int(round(params.check_window / (params.every * dt)))
        self.hist = deque(maxlen=n_window + 1)
        self.label = None
        self.residual = math.inf

    def front(self, u) -> float:
        """Rightmost crossing of the level 1/2 (linear interpolation)."""
        ur, xr = u[self.right], self.x[self.right]
        above = np.nonzero(ur >= 0.5)[0]
        if len(above) == 0:
            return -math.inf
        k = above[-1]
        if k + 1 >= len(ur):
            return xr[k]
        u0, u1 = ur[k], ur[k + 1]
        return xr[k] + (u0 - 0.5) / (u0 - u1) * (xr[k + 1] - xr[k])

    def __call__(self, diag, s: SimState) -> bool:
        P = self.params
        u = s.u
        self.hist.append((diag.t, diag.mass, u.copy()))
        if diag.max < self.a - P.eps_zero:
            self.label = EXTINCTION
            return True
        if len(self.hist) < self.hist.maxlen:
            return False
        u_old = self.hist[0][2]
        self.residual = float(np.max(np.abs(u - u_old)))
        if (self.residual < P.eps_steady and diag.max > self.a
                and diag.min < P.eps_zero):
            self.label = STAGNATION
            return True
        masses = np.array([h[1] for h in self.hist])
        if (np.min(u[self.central]) > 1.0 - P.eps_one and np.all(np.diff(masses) > 0.0)
                and self.front(u) >= self.front_goal):
            self.label = PROPAGATION
            return True
        return False


def classify_run(p: Problem, ell: float, params: ClassifyParams = ClassifyParams(),
                 setup: SimSetup = SimSetup()) -> Verdict:
    """Run indicator data of half-width ``ell`` and classify its fate."""
    grid = setup.grid()
    if not 0.0 < ell <= 0.8 * grid.L:
        raise ParameterError(f"need 0 < ell <= 0.8 L = {0.8 * grid.L:g}, got ell={ell}")
    if not params.eps_zero < p.a:
        raise ParameterError("eps_zero must be smaller than a")
    judge = _Judge(p, ell, grid, params, setup.dt)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryContaminationWarning)
        traj = evolve(p, indicator_ic(grid, ell), params.T_f, setup.scheme_params(),
                      observers=[judge], every=params.every)
    label = judge.label or UNDECIDED
    return Verdict(label, float(traj.t[-1]), float(traj.mass[-1]), float(traj.max[-1]),
                   float(traj.energy[-1]), judge.residual, traj.boundary_warning)


# --------------------------------------------------------------------------
# Thresholds
# --------------------------------------------------------------------------

BRACKETED = "Bracketed"
OPEN_BELOW = "OpenBelow"
OPEN_ABOVE = "OpenAbove"


class MonotonicityError(NumericalError):
    """Verdicts are not ordered in ``ell`` as the comparison principle implies."""


@dataclass(frozen=True)
class ThresholdResult:
    """Bracket ``[ell_lo, ell_hi]`` for a threshold, or an open result.

    ``OpenBelow`` means the transition lies below ``tol`` (threshold 0);
    ``OpenAbove`` means no transition up to ``ell_max`` (threshold infinite).
    """

    kind: str
    status: str
    ell_lo: float
    ell_hi: float
    verdict_lo: Optional[Verdict]
    verdict_hi: Optional[Verdict]
    tol: float

    @property
    def value(self) -> float:
        if self.status == OPEN_BELOW:
            return 0.0
        if self.status == OPEN_ABOVE:
            return math.inf
        return 0.5 * (self.ell_lo + self.ell_hi)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "status": self.status, "ell_lo": self.ell_lo,
            "ell_hi": self.ell_hi, "value": self.value, "tol": self.tol,
            "verdict_lo": self.verdict_lo.label if self.verdict_lo else None,
            "verdict_hi": self.verdict_hi.label if self.verdict_hi else None,
        }


class VerdictCache:
    """Memoized ``classify_run`` for one problem, shared by both thresholds."""

    def __init__(self, p: Problem, params: ClassifyParams, setup: SimSetup):
        self.p, self.params, self.setup = p, params, setup
        self.verdicts = {}

    def __call__(self, ell: float) -> Verdict:
        key = float(ell)
        if key not in self.verdicts:
            self.verdicts[key] = classify_run(self.p, key, self.params, self.setup)
        return self.verdicts[key]

    def check_order(self):
        """Raise unless verdicts read Extinction, then Stagnation/Undecided, then Propagation."""
        rank = {EXTINCTION: 0, STAGNATION: 1, UNDECIDED: 1, PROPAGATION: 2}
        items = sorted(self.verdicts.items())
        seq = [rank[v.label] for _, v in items]
        for k in range(1, len(seq)):
            if seq[k] < seq[k - 1]:
                raise MonotonicityError(
                    f"verdict order violated at ell={items[k - 1][0]:.6g} "
                    f"({items[k - 1][1].label}) < ell={items[k][0]:.6g} ({items[k][1].label})")


def _threshold(cache: VerdictCache, kind: str, hit, tol: float, ell_max: float):
    """Transition from ``hit`` true (small ell) to false, or false to true.

    For ``ell0`` the predicate is "extinction" and holds below the threshold;
    for ``ell1`` it is "propagation" and holds above.
    """
    below = kind == "ell0"
    inside = (lambda v: hit(v)) if below else (lambda v: not hit(v))
    ell = tol
    v = cache(ell)
    if not inside(v):
        return ThresholdResult(kind, OPEN_BELOW, 0.0, ell, None, v, tol)
    lo, vlo = ell, v
    while True:
        ell = 2.0 * lo
        if ell > ell_max:
            ell = ell_max
        v = cache(ell)
        if not inside(v):
            hi, vhi = ell, v
            break
        lo, vlo = ell, v
        if ell >= ell_max:
            return ThresholdResult(kind, OPEN_ABOVE, lo, math.inf, vlo, None, tol)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        v = cache(mid)
        if inside(v):
            lo, vlo = mid, v
        else:
            hi, vhi = mid, v
    return ThresholdResult(kind, BRACKETED, lo, hi, vlo, vhi, tol)


def _defaults(setup, tol, ell_max):
    L = setup.L
    return (1e-3 * L if tol is None else tol), (0.8 * L if ell_max is None else ell_max)


def threshold_ell0(p: Problem, params: ClassifyParams = ClassifyParams(),
                   setup: SimSetup = SimSetup(), tol: Optional[float] = None,
                   ell_max: Optional[float] = None, cache: Optional[VerdictCache] = None,
                   strict: bool = True) -> ThresholdResult:
    """Onset of non-extinction, by doubling scan and bisection."""
    cache = cache or VerdictCache(p, params, setup)
    tol, ell_max = _defaults(setup, tol, ell_max)
    res = _threshold(cache, "ell0", lambda v: v.label == EXTINCTION, tol, ell_max)
    if strict:
        cache.check_order()
    return res


def threshold_ell1(p: Problem, params: ClassifyParams = ClassifyParams(),
                   setup: SimSetup = SimSetup(), tol: Optional[float] = None,
                   ell_max: Optional[float] = None, cache: Optional[VerdictCache] = None,
                   strict: bool = True) -> ThresholdResult:
    """Onset of propagation, by doubling scan and bisection."""
    cache = cache or VerdictCache(p, params, setup)
    tol, ell_max = _defaults(setup, tol, ell_max)
    res = _threshold(cache, "ell1", lambda v: v.label == PROPAGATION, tol, ell_max)
    if strict:
        cache.check_order()
    return res


# --------------------------------------------------------------------------
# Regions of the (a, d) plane
# --------------------------------------------------------------------------

TABLE_PATTERN = {
    # (extinction, stagnation, propagation) over open ell-intervals
    "R1": (True, False, True),
    "R2": (True, True, True),
    "R3": (False, True, True),
    "R4": (True, True, False),
    "R5": (False, True, False),
}


@dataclass(frozen=True)
class RegionLabel:
    label: str
    sub: Optional[str]
    boundary: bool = False
    near: tuple = ()

    def pattern(self):
        return TABLE_PATTERN[self.label]


def region_label(a: float, d: float) -> RegionLabel:
    """Region of ``(a, d)`` from the lines ``d = 1/4``, ``d_ext`` and ``d_pin``."""
    if not 0.0 < a < 0.5:
        raise ParameterError(f"need 0 < a < 1/2, got a={a}")
    if not d > 0.0:
        raise ParameterError(f"need d > 0, got d={d}")
    ac = critical_a()
    de, dp = d_ext(a), d_pin(a)
    near = tuple(name for name, val in (("1/4", 0.25), ("d_ext", de), ("d_pin", dp))
                 if abs(d - val) <= BOUNDARY_TOL)
    if abs(a - ac) <= BOUNDARY_TOL:
        sub = "="
    else:
        sub = "<" if a < ac else ">"
    if d > 0.25:
        return RegionLabel("R1", None, bool(near), near)
    lo, hi = (dp, de) if sub == "<" else (de, dp)
    if d > hi:
        label = "R2"
    elif d > lo:
        label = "R3" if sub == "<" else "R4"
    else:
        label = "R5"
    if sub == "=":
        label = "R2" if d > de else "R5"
    return RegionLabel(label, sub if label in ("R2", "R5") else None, bool(near), near)


def observed_pattern(verdicts: Iterable[Verdict]):
    labels = {v.label for v in verdicts}
    return (EXTINCTION in labels, STAGNATION in labels, PROPAGATION in labels)


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepTask:
    a: float
    d: float
    ell: float
    kernel: str = "exponential"


@dataclass(frozen=True)
class SweepRow:
    a: float
    d: float
    ell: float
    verdict: str
    t_decided: float
    final_mass: float
    final_max: float
    error: Optional[str] = None


def _run_task(args):
    task, params, setup = args
    try:
        v = classify_run(Problem.cubic(task.a, task.d, task.kernel), task.ell, params, setup)
        return SweepRow(task.a, task.d, task.ell, v.label, v.t_decided, v.final_mass, v.final_max)
    except PinningError as exc:
        return SweepRow(task.a, task.d, task.ell, "Error", math.nan, math.nan, math.nan,
                        f"{type(exc).__name__}: {exc}")


def sweep(tasks: Sequence[SweepTask], params: ClassifyParams = ClassifyParams(),
          setup: SimSetup = SimSetup(), jobs: int = 1) -> list:
    """Classify every task; rows come back in task order whatever ``jobs`` is."""
    args = [(t, params, setup) for t in tasks]
    if not args:
        return []
    if jobs <= 1 or len(args) == 1:
        return [_run_task(x) for x in args]
    with ProcessPoolExecutor(max_workers=min(jobs, len(args), os.cpu_count() or 1)) as pool:
        return list(pool.map(_run_task, args))


def grid_tasks(a_values, d_values, ell_values, kernel="exponential"):
    return [SweepTask(float(a), float(d), float(ell), kernel)
            for a in a_values for d in d_values for ell in ell_values]


# --------------------------------------------------------------------------
# Checks against the ground-state construction
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConjectureReport:
    a: float
    d: float
    ell1: ThresholdResult
    x0_star: float
    v0_star: float
    gap: float
    dx: float
    tol: float


def conjecture_check(a: float, d: float, params: ClassifyParams = ClassifyParams(),
                     setup: SimSetup = SimSetup(), tol: Optional[float] = None,
                     cache: Optional[VerdictCache] = None) -> ConjectureReport:
    """Compare the numerical propagation threshold with ``x0*``."""
    from .phaseplane import build_potentials, x0_star

    reg = region_label(a, d)
    if reg.label not in ("R2", "R3"):
        raise PreconditionError(f"(a, d) = ({a}, {d}) lies in {reg.label}, not in R2 or R3")
    p = Problem.cubic(a, d)
    v0s, x0s = x0_star(build_potentials(p))
    res = threshold_ell1(p, params, setup, tol=tol, cache=cache)
    gap = abs(res.value - x0s)
    return ConjectureReport(a, d, res, x0s, v0s, gap, setup.L * 2 / setup.N, res.tol)


@dataclass(frozen=True)
class SandwichReport:
    lower_x0: float
    upper_x0: float
    lower_v0: float
    upper_v0: float
    max_below: float    # max of (U_lower - u) away from the jumps
    max_above: float    # max of (u - U_upper) away from the jumps
    tol: float
    verdict: Optional[str]
    t_final: float

    @property
    def lower_ok(self) -> bool:
        return self.max_below <= self.tol

    @property
    def upper_ok(self) -> bool:
        return self.max_above <= self.tol

    @property
    def holds(self) -> bool:
        return self.lower_ok and self.upper_ok


def sandwich_hypotheses(p: Problem) -> dict:
    """Inequalities needed to trap the solution between two ground states."""
    from .phaseplane import build_family, build_potentials, classify_case

    gp = build_potentials(p)
    case = classify_case(gp)
    u_lo, u_hi = f_critical_points(p.f)
    checks = {"pinned": case.pinned, "g(u+) < 0": float(g_eval(p, u_hi)) < 0.0}
    if case.pinned:
        fam = build_family(gp)
        checks["0 < v_c < g(u-)"] = 0.0 < fam.v_c < float(g_eval(p, u_lo))
    else:
        checks["0 < v_c < g(u-)"] = False
    return checks


def sandwich_check(p: Problem, ell: float, params: ClassifyParams = ClassifyParams(),
                   setup: SimSetup = SimSetup(), lower_only: bool = False,
                   tol: float = 1e-3, upper_margin: float = 1.0) -> SandwichReport:
    """Evolve ``1_[-ell, ell]`` and compare with ground states glued below and above ``ell``.

    The lower state has ``x0 = ell/2`` and the upper one ``x0 = ell + upper_margin``;
    two grid cells around each jump are excluded.  With ``lower_only`` only
    ``U_lower <= u`` is tested and the pinned hypotheses are not required.
    """
    from scipy import optimize

    from .phaseplane import build_family, build_potentials, ground_state, x0_of_v0

    checks = sandwich_hypotheses(p)
    failed = [k for k, ok in checks.items() if not ok]
    gp = build_potentials(p)
    if lower_only:
        failed = []
    if failed:
        raise PreconditionError("sandwich hypotheses fail: " + ", ".join(failed))
    fam = build_family(gp)
    lo = max(fam.v_lo, 1e-8) + (1e-12 if fam.lo_open else 0.0)

    def v0_for(target, hi):
        return optimize.brentq(lambda v: x0_of_v0(gp, v) - target, lo, hi, xtol=1e-13)

    hi_cap = fam.v_hi - 1e-12 if fam.hi_open else fam.v_hi
    v_lower = v0_for(0.5 * ell, hi_cap)
    low = ground_state(gp, v_lower)
    up = None
    if not lower_only:
        v_upper = v0_for(ell + upper_margin, hi_cap)
        up = ground_state(gp, v_upper)

    grid = setup.grid()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryContaminationWarning)
        traj = evolve(p, indicator_ic(grid, ell), params.T_f, setup.scheme_params(),
                      every=params.every)
    u = traj.final.u
    x = grid.x
    away = lambda x0: np.abs(np.abs(x) - x0) > 2.0 * grid.dx
    mask = away(low.x0)
    max_below = float(np.max((low.U(x) - u)[mask]))
    max_above = -math.inf
    if up is not None:
        mask_u = away(up.x0)
        max_above = float(np.max((u - up.U(x))[mask_u]))
    return SandwichReport(low.x0, up.x0 if up else math.nan, v_lower,
                          up.v0 if up else math.nan, max_below, max_above, tol, None,
                          float(traj.t[-1]))


__all__ = [
    "EXTINCTION", "PROPAGATION", "STAGNATION", "UNDECIDED", "BRACKETED", "OPEN_BELOW",
    "OPEN_ABOVE", "SimSetup", "ClassifyParams", "PRESETS", "Verdict", "ThresholdResult",
    "RegionLabel", "VerdictCache", "MonotonicityError", "SweepTask", "SweepRow",
    "ConjectureReport", "SandwichReport", "TABLE_PATTERN", "classify_run", "threshold_ell0",
    "threshold_ell1", "region_label", "observed_pattern", "sweep", "grid_tasks",
    "conjecture_check", "sandwich_hypotheses", "sandwich_check",
]
