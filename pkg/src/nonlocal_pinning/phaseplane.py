"""Ground states of the exponential-kernel problem by phase-plane gluing.

With ``K(x) = exp(-|x|)/2`` a stationary solution ``U`` gives ``V = K*U``
solving ``V - V'' = g^{-1}(V)``, where ``g(u) = u - f(u)/d`` is inverted on
one of its increasing branches.  Each branch has a conserved Hamiltonian
``V'^2/2 + G(V)``; ground states are made by gluing an orbit of the upper
branch (around ``x = 0``) to the homoclinic level of the lower branch at
two symmetric points ``+-x0`` where ``U`` jumps.

All potentials are evaluated in the ``u`` variable through

    G(g(u)) = -(f(u)/d)^2/2 - F(u)/d   (+ a constant on the upper branch),

which is exact and avoids nested quadratures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicHermiteSpline

from .errors import CaseError, NumericalError, ParameterError
from .model import (
    GBranches,
    Problem,
    branch_inverse,
    critical_points,
    g_eval,
    g_prime,
    potential_F,
    solve_increasing,
)

SIGN_TOL = 1e-10
V0_FLOOR = 1e-8
TAIL_FLOOR = 1e-10
X0_RTOL = 1e-8

_GL64 = np.polynomial.legendre.leggauss(64)
_GL16 = np.polynomial.legendre.leggauss(16)

MONOTONE = "Monotone"
TWO_JUMP = "TwoJumpFamily"
SMOOTH_PLUS_JUMPS = "SmoothPlusMaybeJumps"
HOMOCLINIC_BOUNDARY = "HomoclinicBoundary"
DEGENERATE = "Degenerate"


# --------------------------------------------------------------------------
# Potentials
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GluedPotentials:
    """Branch inverses of ``g`` and the two potentials ``G_-``, ``G_+``.

    ``G_minus`` lives on ``[0, g(beta)]`` and ``G_plus`` on ``[g(gamma), 1]``.
    When ``g`` is monotone both use the single global inverse and
    ``g_of_beta``/``g_of_gamma`` are ``None``.
    """

    problem: Problem
    branches: GBranches
    g_of_beta: Optional[float]
    g_of_gamma: Optional[float]
    plus_offset: float = field(repr=False)

    @property
    def d(self) -> float:
        return self.problem.d

    @property
    def v_minus_max(self) -> float:
        return 1.0 if self.branches.monotone else self.g_of_beta

    @property
    def v_plus_min(self) -> float:
        return 0.0 if self.branches.monotone else self.g_of_gamma

    def u_plus_range(self):
        return (0.0, 1.0) if self.branches.monotone else (self.branches.gamma, 1.0)

    def u_minus(self, v):
        return branch_inverse(self.problem, v, "minus", self.branches)

    def u_plus(self, v):
        return branch_inverse(self.problem, v, "plus", self.branches)

    def Gamma(self, u):
        """``G_-(g(u))`` written as a function of ``u``."""
        p = self.problem
        u = np.asarray(u, dtype=float)
        d = p.d
        if p.f.kind == "cubic":
            a = p.a
            v = np.asarray(g_eval(p, u))
            out = (-0.5 * v * v + 0.75 / d * u**4 - 2.0 / (3.0 * d) * (1.0 + a) * u**3
                   + 0.5 * (1.0 + a / d) * u * u)
        else:
            fu = np.asarray(p.f(u)) / d
            out = -0.5 * fu * fu - np.asarray(potential_F(p.f, u)) / d
        return float(out) if out.ndim == 0 else out

    def Gamma_prime(self, u):
        p = self.problem
        u = np.asarray(u, dtype=float)
        out = (u - np.asarray(g_eval(p, u))) * np.asarray(g_prime(p, u))
        return float(out) if out.ndim == 0 else out

    def Omega(self, s):
        """``Gamma(1) - Gamma(1 - s)``, free of cancellation near ``s = 0``."""
        p = self.problem
        s = np.asarray(s, dtype=float)
        d = p.d
        fu = np.asarray(p.f(1.0 - s)) / d
        if p.f.kind == "cubic":
            b = 1.0 - p.a
            tail = b * s * s / 2.0 - (1.0 + b) * s**3 / 3.0 + s**4 / 4.0
        else:
            x, w = _GL16
            nodes = 1.0 - s[..., None] * 0.5 * (x + 1.0)
            tail = 0.5 * s * np.sum(w * np.asarray(p.f(nodes)), axis=-1)
        out = 0.5 * fu * fu + tail / d
        return float(out) if out.ndim == 0 else out

    def Omega_prime(self, s):
        return self.Gamma_prime(1.0 - np.asarray(s, dtype=float))

    def G_minus(self, v):
        return self.Gamma(self.u_minus(v))

    def G_plus(self, v):
        return self.G_plus_of_u(self.u_plus(v))

    def G_plus_of_u(self, u):
        return self.Gamma(u) + self.plus_offset

    def G_minus_prime(self, v):
        return -np.asarray(v, dtype=float) + self.u_minus(v)

    def G_plus_prime(self, v):
        return -np.asarray(v, dtype=float) + self.u_plus(v)

    def gap(self, v):
        """``G_+(v) - G_-(v)``; gluing at ``v`` needs this below ``G_+(1)``."""
        return self.G_plus(v) - self.G_minus(v)


def build_potentials(p: Problem) -> GluedPotentials:
    if p.K.kind != "exponential":
        raise ParameterError("phase-plane reduction requires K(x)=e^{-|x|}/2")
    br = critical_points(p)
    if br.monotone:
        gb = gg = None
    else:
        gb, gg = float(g_eval(p, br.beta)), float(g_eval(p, br.gamma))
    d = p.d
    offset = float(potential_F(p.f, 1.0)) / d - 0.5
    return GluedPotentials(p, br, gb, gg, offset)


# --------------------------------------------------------------------------
# Case classification and the admissible family
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CaseLabel:
    """Which ground-state structure the parameters produce.

    ``kind`` is one of ``Monotone``, ``TwoJumpFamily``,
    ``SmoothPlusMaybeJumps``, ``HomoclinicBoundary`` or ``Degenerate``;
    ``sub`` is ``"i"``/``"ii"``/``"iii"`` where the kind splits further.
    """

    kind: str
    sub: Optional[str]
    pinned: bool
    G_minus_at_beta: Optional[float]
    G_minus_at_gamma: Optional[float]

    @property
    def has_jump_family(self) -> bool:
        if self.kind in (TWO_JUMP, HOMOCLINIC_BOUNDARY):
            return True
        if self.kind == SMOOTH_PLUS_JUMPS:
            return self.sub == "ii"
        if self.kind == DEGENERATE:
            return self.sub == "iii"
        return False

    @property
    def has_smooth_state(self) -> bool:
        return self.kind in (MONOTONE, SMOOTH_PLUS_JUMPS, HOMOCLINIC_BOUNDARY) or (
            self.kind == DEGENERATE and self.sub in ("i", "ii"))

    def describe(self) -> str:
        name = self.kind + (f"({self.sub})" if self.sub else "")
        return name + (", pinned" if self.pinned else "")


def _is_pinned(gp: GluedPotentials, Gb: float) -> bool:
    if Gb > SIGN_TOL:
        return False
    if gp.g_of_beta >= 1.0:
        return True
    return -Gb >= gp.G_plus(1.0) - gp.G_plus(gp.g_of_beta)


def classify_case(gp: GluedPotentials) -> CaseLabel:
    br = gp.branches
    if br.monotone:
        return CaseLabel(MONOTONE, None, False, None, None)
    Gb = float(gp.G_minus(gp.g_of_beta))
    gg = gp.g_of_gamma
    Gg = float(gp.G_minus(gg)) if gg >= 0.0 else None
    pinned = _is_pinned(gp, Gb)
    if br.degenerate:
        sub = "ii" if abs(Gb) < SIGN_TOL else ("i" if Gb > 0 else "iii")
        return CaseLabel(DEGENERATE, sub, pinned, Gb, Gg)
    if abs(Gb) < SIGN_TOL:
        return CaseLabel(HOMOCLINIC_BOUNDARY, None, pinned, Gb, Gg)
    if Gb < 0.0:
        return CaseLabel(TWO_JUMP, None, pinned, Gb, Gg)
    sub = "i" if (gg > 0.0 and Gg >= 0.0) else "ii"
    return CaseLabel(SMOOTH_PLUS_JUMPS, sub, pinned, Gb, Gg)


@dataclass(frozen=True)
class GroundStateFamily:
    """Admissible gluing parameters ``v0`` of the discontinuous family."""

    potentials: GluedPotentials
    case: CaseLabel
    v_lo: float
    v_hi: float
    lo_open: bool
    hi_open: bool
    v_m: Optional[float]
    v_c: Optional[float]

    def contains(self, v0: float) -> bool:
        above = v0 > self.v_lo if self.lo_open else v0 >= self.v_lo
        below = v0 < self.v_hi if self.hi_open else v0 <= self.v_hi
        return bool(above and below)

    def sample(self, n: int, margin: float = 1e-6) -> np.ndarray:
        """``n`` admissible points, kept ``margin`` away from open ends."""
        lo = max(self.v_lo + (margin if self.lo_open else 0.0), V0_FLOOR)
        hi = self.v_hi - (margin if self.hi_open else 0.0)
        return np.linspace(lo, hi, n)


def v_m_root(gp: GluedPotentials) -> float:
    """Positive zero of the lower potential (top of the smooth homoclinic)."""
    top = gp.v_minus_max
    if float(gp.G_minus(top)) <= 0.0:
        raise CaseError("v_m exists only when G_-(g(beta)) > 0")
    lo = 1e-8 * top
    G = lambda v: float(gp.G_minus(v))
    if G(lo) >= 0.0:
        raise NumericalError(f"no sign change of G_- on [{lo:.3g}, {top:.6g}]")
    return optimize.brentq(G, lo, top, xtol=1e-15, rtol=1e-15, maxiter=500)


def v_c_root(gp: GluedPotentials) -> float:
    """Gluing value whose upper orbit is the separatrix through ``(1, 0)``."""
    case = classify_case(gp)
    if not case.pinned:
        raise CaseError(f"v_c exists only in the pinned case, got {case.describe()}")
    lo = max(gp.g_of_gamma, 0.0)
    hi = min(gp.g_of_beta, 1.0)
    h = lambda v: float(gp.gap(v)) + 0.5
    hlo, hhi = h(lo), h(hi)
    if not (hlo < 0.0 <= hhi):
        raise NumericalError(
            f"G_+ - G_- - G_+(1) does not change sign on [{lo:.12g}, {hi:.12g}]"
            f" (values {hlo:.3g}, {hhi:.3g})")
    if hhi == 0.0:
        return hi
    return optimize.brentq(h, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)


def build_family(gp: GluedPotentials) -> GroundStateFamily:
    case = classify_case(gp)
    if not case.has_jump_family:
        raise CaseError(f"no discontinuous ground states for case {case.describe()}")
    gg = gp.g_of_gamma
    v_lo, lo_open = max(gg, 0.0), gg <= 0.0
    v_m = v_m_root(gp) if case.kind == SMOOTH_PLUS_JUMPS else None
    v_hi, hi_open = (v_m if v_m is not None else gp.g_of_beta), False
    v_c = None
    if case.pinned:
        v_c = v_c_root(gp)
        v_hi, hi_open = v_c, True
    return GroundStateFamily(gp, case, v_lo, v_hi, lo_open, hi_open, v_m, v_c)


# --------------------------------------------------------------------------
# Gluing: v*, x0
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class _Orbit:
    """Upper-branch orbit glued at ``v0``, in the variable ``s = 1 - u``.

    Along the orbit ``Omega(s) = omega_star + (t_star sin(theta))^2 / 2``
    with ``t = t_star cos(theta)``; ``s_star`` is the turning point.
    """

    v0: float
    s0: float
    t_star: float
    omega_star: float
    s_star: float


def _orbit(gp: GluedPotentials, v0: float) -> _Orbit:
    if gp.branches.monotone:
        raise CaseError("g is monotone: no discontinuous ground states")
    v0 = float(v0)
    if not (max(gp.g_of_gamma, 0.0) <= v0 <= gp.g_of_beta) or v0 < V0_FLOOR:
        raise ParameterError(
            f"v0={v0!r} outside [max(g(gamma),0), g(beta)] = "
            f"[{max(gp.g_of_gamma, 0.0):.12g}, {gp.g_of_beta:.12g}] or below {V0_FLOOR}")
    Gm = float(gp.G_minus(v0))
    if 0.0 < Gm <= 1e-15:
        Gm = 0.0    # v0 = v_m up to rounding
    if Gm > 0.0:
        raise ParameterError(f"v0={v0!r} lies above v_m (G_-(v0) = {Gm:.3g} > 0)")
    if v0 > 1.0:
        raise ParameterError(f"v0={v0!r} outside admissible family: no v* <= 1")
    s0 = 1.0 - float(gp.u_plus(v0))
    omega_star = float(gp.Omega(s0)) + Gm
    if omega_star <= 0.0:
        raise ParameterError(f"v0={v0!r} outside admissible family: no v* <= 1")
    s_star = float(solve_increasing(gp.Omega, gp.Omega_prime, np.float64(omega_star), 0.0, s0))
    return _Orbit(v0, s0, math.sqrt(-2.0 * Gm), omega_star, s_star)


def v_star(gp: GluedPotentials, v0: float) -> float:
    """Turning point ``v* >= v0`` of the upper orbit, ``G_+(v*) = G_+(v0) - G_-(v0)``."""
    orb = _orbit(gp, v0)
    return float(g_eval(gp.problem, 1.0 - orb.s_star))


def _orbit_u(gp: GluedPotentials, orb: _Orbit, theta):
    """``u = g_+^{-1}(Psi)`` at ``t = t* cos(theta)``."""
    st = orb.t_star * np.sin(theta)
    s = solve_increasing(gp.Omega, gp.Omega_prime, orb.omega_star + 0.5 * st * st,
                         orb.s_star, orb.s0)
    return 1.0 - s


def _dpsi(gp: GluedPotentials, orb: _Orbit, theta):
    """``d Psi/dt`` at ``t = t* cos(theta)``, using ``u - g(u) = f(u)/d``."""
    u = _orbit_u(gp, orb, theta)
    t = orb.t_star * np.cos(theta)
    return t * gp.d / np.asarray(gp.problem.f(u))


def _gl_panels(fun, lo, hi, rule=_GL64):
    """Gauss-Legendre integral of ``fun`` over each panel ``[lo[k], hi[k]]``."""
    x, w = rule
    half = 0.5 * (hi - lo)
    nodes = lo[:, None] + half[:, None] * (x + 1.0)
    vals = np.asarray(fun(nodes.ravel())).reshape(nodes.shape)
    return np.sum(vals * w, axis=1) * half


def _adaptive_panels(fun, a, b, rtol=X0_RTOL, max_panels=4096):
    """Composite 64-node Gauss-Legendre with adaptive panel halving.

    A panel is accepted once its two halves agree with the whole panel to
    its share of ``rtol`` (never less than 1/64 of it, so that narrow
    peaks are not refined into roundoff).  Returns the integral and the sorted panel edges.
    """
    edges = np.linspace(a, b, 5)
    lo, hi = edges[:-1], edges[1:]
    coarse = _gl_panels(fun, lo, hi)
    acc_lo, acc_hi, acc_val = [], [], []
    while True:
        mid = 0.5 * (lo + hi)
        left, right = _gl_panels(fun, lo, mid), _gl_panels(fun, mid, hi)
        pair = left + right
        total = abs(sum(acc_val) + pair.sum())
        share = np.maximum((hi - lo) / (b - a), 1.0 / 64.0)
        ok = np.abs(pair - coarse) <= rtol * total * share + 1e-300
        acc_lo.extend(lo[ok])
        acc_hi.extend(hi[ok])
        acc_val.extend(pair[ok])
        bad = ~ok
        if not bad.any():
            break
        if len(acc_val) + 2 * int(bad.sum()) > max_panels:
            raise NumericalError(
                f"quadrature did not reach rtol={rtol:g} within {max_panels} panels")
        lo, hi = np.concatenate([lo[bad], mid[bad]]), np.concatenate([mid[bad], hi[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
    order = np.argsort(acc_lo)
    vals = np.asarray(acc_val)[order]
    return float(np.sum(vals)), np.asarray(acc_lo)[order], np.asarray(acc_hi)[order]


def x0_of_v0(gp: GluedPotentials, v0: float) -> float:
    """Right discontinuity point of the ground state glued at ``v0``."""
    orb = _orbit(gp, v0)
    if orb.t_star == 0.0:
        return 0.0
    fun = lambda th: _dpsi(gp, orb, th)
    value, _, _ = _adaptive_panels(fun, 0.0, 0.5 * math.pi)
    return value


def x0_star(gp: GluedPotentials, family: Optional[GroundStateFamily] = None):
    """``(v0*, x0(v0*))`` with ``v0* = a`` whenever ``a`` is admissible.

    ``v0 = a`` maximizes ``-G_-``; when ``a`` is outside the family the
    maximizer of ``x0`` is located numerically instead (see :func:`x0_sup`).
    """
    family = family or build_family(gp)
    a = gp.problem.a
    if family.contains(a):
        return a, x0_of_v0(gp, a)
    return x0_sup(gp, family)


def x0_sup(gp: GluedPotentials, family: Optional[GroundStateFamily] = None, n_scan: int = 41):
    """Supremum of ``x0`` over the family: coarse scan, then golden section.

    In the pinned case ``x0`` is unbounded and ``(v_c, inf)`` is returned.
    """
    family = family or build_family(gp)
    if family.v_c is not None:
        return family.v_c, math.inf
    vs = family.sample(n_scan, margin=V0_FLOOR)
    xs = np.array([x0_of_v0(gp, v) for v in vs])
    k = int(np.argmax(xs))
    if k in (0, len(vs) - 1):
        return float(vs[k]), float(xs[k])
    res = optimize.minimize_scalar(lambda v: -x0_of_v0(gp, v), bracket=(vs[k - 1], vs[k], vs[k + 1]),
                                   method="golden", tol=1e-10)
    return float(res.x), float(-res.fun)


def family_table(gp: GluedPotentials, n: int = 50, family: Optional[GroundStateFamily] = None):
    """Sample the family: arrays ``v0``, ``x0``, ``v_star``."""
    family = family or build_family(gp)
    vs = family.sample(n)
    x0 = np.array([x0_of_v0(gp, v) for v in vs])
    vst = np.array([v_star(gp, v) for v in vs])
    return vs, x0, vst


# --------------------------------------------------------------------------
# Profile reconstruction
# --------------------------------------------------------------------------

class _Table:
    """Monotone map ``param -> x`` tabulated with exact slopes."""

    def __init__(self, s, x, dxds):
        self.s, self.x = np.asarray(s), np.asarray(x)
        self.spline = CubicHermiteSpline(self.s, self.x, np.asarray(dxds))

    def invert(self, xq):
        """Parameter with ``x(param) = xq`` by bisection on the spline."""
        xq = np.asarray(xq, dtype=float)
        k = np.clip(np.searchsorted(self.x, xq), 1, len(self.x) - 1)
        lo, hi = self.s[k - 1].copy(), self.s[k].copy()
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            right = self.spline(mid) < xq
            lo = np.where(right, mid, lo)
            hi = np.where(right, hi, mid)
        return 0.5 * (lo + hi)


def _cumulative(fun, edges, sub=8):
    """Cumulative integral of ``fun`` at ``edges`` using 16-node rules on sub-panels."""
    pts = [edges[0]]
    for lo, hi in zip(edges[:-1], edges[1:]):
        pts.extend(np.linspace(lo, hi, sub + 1)[1:])
    pts = np.asarray(pts)
    vals = _gl_panels(fun, pts[:-1], pts[1:], rule=_GL16)
    return pts, np.concatenate([[0.0], np.cumsum(vals)])


class _Tail:
    """Lower-branch orbit on the zero level, ``V' = -sqrt(-2 G_-(V))``.

    Parametrized by ``sigma = -ln V`` starting at ``V = v_top`` where
    ``x = x_top``, down to ``V = TAIL_FLOOR``; beyond the table the decay is
    continued with the linearized rate at the origin.
    """

    def __init__(self, gp: GluedPotentials, v_top: float, x_top: float):
        self.gp = gp
        self.x_top = x_top
        s0, s1 = -math.log(v_top), -math.log(TAIL_FLOOR)
        n = max(int(math.ceil((s1 - s0) / 0.05)), 4)
        edges = np.linspace(s0, s1, n + 1)
        pts, cum = _cumulative(self.slope, edges, sub=1)
        self.table = _Table(pts, x_top + cum, self.slope(pts))
        self.x_end = float(self.table.x[-1])
        gp0 = float(g_prime(gp.problem, 0.0))
        self.rate = math.sqrt(1.0 - 1.0 / gp0)

    def slope(self, sigma):
        w = np.exp(-np.asarray(sigma, dtype=float))
        G = np.asarray(self.gp.G_minus(w))
        return w / np.sqrt(np.maximum(-2.0 * G, 1e-300))

    def V(self, x):
        x = np.asarray(x, dtype=float)
        inside = x <= self.x_end
        out = np.empty_like(x)
        if inside.any():
            out[inside] = np.exp(-self.table.invert(x[inside]))
        out[~inside] = TAIL_FLOOR * np.exp(-self.rate * (x[~inside] - self.x_end))
        return out


@dataclass(frozen=True)
class GroundStateProfile:
    """Sampled even ground state ``U`` with its smoothed companion ``V = K*U``.

    ``x0`` is ``None`` for a smooth state.  ``branch`` holds ``"plus"`` for
    ``|x| <= x0`` and ``"minus"`` outside (all ``"minus"`` when smooth).
    """

    v0: Optional[float]
    x0: Optional[float]
    v_star: float
    x: np.ndarray
    U: np.ndarray
    V: np.ndarray
    Vp: np.ndarray
    branch: np.ndarray
    evaluator: "GroundState" = field(repr=False, compare=False)
    x_tail_end: float = math.inf

    @property
    def smooth(self) -> bool:
        return self.x0 is None


class GroundState:
    """Evaluator for ``U``, ``V`` and ``V'`` at arbitrary points."""

    def __init__(self, gp, v0, x0, v_top, inner, tail):
        self.gp, self.v0, self.x0, self.v_top = gp, v0, x0, v_top
        self._inner = inner
        self._tail = tail

    @property
    def smooth(self) -> bool:
        return self.v0 is None

    def branch(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        if self.smooth:
            return np.full(ax.shape, "minus", dtype=object)
        return np.where(ax <= self.x0, "plus", "minus").astype(object)

    def _split(self, x):
        ax = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
        return ax, ax <= self._inner.x_end

    def V(self, x):
        ax, inner = self._split(x)
        out = np.empty_like(ax)
        out[inner] = self._inner.V(ax[inner])
        out[~inner] = self._tail.V(ax[~inner])
        return out

    def Vp(self, x):
        """``V'``, odd in ``x`` and read off the Hamiltonian level."""
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        ax, inner = self._split(xa)
        out = np.empty_like(ax)
        out[inner] = self._inner.Vp(ax[inner])
        v = self._tail.V(ax[~inner])
        out[~inner] = -np.sqrt(np.maximum(-2.0 * np.asarray(self.gp.G_minus(v)), 0.0))
        return np.where(xa < 0, -out, out)

    def U(self, x):
        ax, inner = self._split(x)
        out = np.empty_like(ax)
        out[inner] = self._inner.U(ax[inner])
        out[~inner] = np.asarray(self.gp.u_minus(np.minimum(self._tail.V(ax[~inner]),
                                                           self.gp.v_minus_max)))
        return out

    def sample(self, xs) -> GroundStateProfile:
        xs = np.asarray(xs, dtype=float)
        return GroundStateProfile(
            self.v0, self.x0, self.v_top, xs, self.U(xs), self.V(xs), self.Vp(xs),
            self.branch(xs), self, self._tail.x_end)


class _JumpInner:
    """Upper-branch arc on ``[0, x0]`` via the angle ``theta``."""

    def __init__(self, gp: GluedPotentials, orb: _Orbit, x0: float, panels_lo, panels_hi):
        self.gp, self.orb = gp, orb
        edges = np.concatenate([panels_lo, panels_hi[-1:]])
        fun = lambda th: _dpsi(gp, orb, th)
        pts, cum = _cumulative(fun, edges, sub=8)
        # Re-anchor on the converged x0 to remove last-digit drift of the table.
        scale = x0 / cum[-1]
        self.table = _Table(pts, cum * scale, fun(pts) * scale)
        self.x_end = x0

    def theta(self, x):
        return self.table.invert(x)

    def V(self, x):
        return np.asarray(g_eval(self.gp.problem, self.U(x)))

    def U(self, x):
        th = self.theta(x)
        return _orbit_u(self.gp, self.orb, th)

    def Vp(self, x):
        return -self.orb.t_star * np.sin(self.theta(x))


class _SmoothInner:
    """Top of a homoclinic at ``v_top``: ``V = v_top - r^2`` for ``V >= v_top/2``."""

    def __init__(self, gp: GluedPotentials, v_top: float, G, u_of_v):
        self.gp, self.v_top, self.G, self.u_of_v = gp, v_top, G, u_of_v
        self.G_top = float(G(v_top))
        slope_top = float(-v_top + u_of_v(v_top))
        if not slope_top > 0.0:
            raise NumericalError("homoclinic top is degenerate (G'(v_top) = 0)")
        self.limit = 2.0 / math.sqrt(2.0 * slope_top)
        r1 = math.sqrt(0.5 * v_top)
        edges = np.linspace(0.0, r1, 65)
        pts, cum = _cumulative(self.slope, edges, sub=4)
        self.table = _Table(pts, cum, self.slope(pts))
        self.x_end = float(cum[-1])

    def slope(self, r):
        r = np.asarray(r, dtype=float)
        w = self.v_top - r * r
        G = np.asarray(self.G(w)) - self.G_top
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 2.0 * r / np.sqrt(np.maximum(-2.0 * G, 1e-300))
        return np.where(r == 0.0, self.limit, out)

    def V(self, x):
        r = self.table.invert(x)
        return self.v_top - r * r

    def U(self, x):
        return np.asarray(self.u_of_v(self.V(x)))

    def Vp(self, x):
        v = self.V(x)
        return -np.sqrt(np.maximum(-2.0 * (np.asarray(self.G(v)) - self.G_top), 0.0))


def ground_state(gp: GluedPotentials, v0: float) -> GroundState:
    """Discontinuous ground state glued at ``v0``."""
    orb = _orbit(gp, v0)
    if orb.t_star == 0.0:
        raise ParameterError("v0 = v_m gives the smooth state; use smooth_ground_state")
    fun = lambda th: _dpsi(gp, orb, th)
    x0, plo, phi = _adaptive_panels(fun, 0.0, 0.5 * math.pi)
    inner = _JumpInner(gp, orb, x0, plo, phi)
    tail = _Tail(gp, orb.v0, x0)
    return GroundState(gp, orb.v0, x0, float(g_eval(gp.problem, 1.0 - orb.s_star)), inner, tail)


def smooth_ground_state(gp: GluedPotentials) -> GroundState:
    """The smooth homoclinic ground state (monotone ``g`` or ``G_-(g(beta)) >= 0``)."""
    case = classify_case(gp)
    if not case.has_smooth_state:
        raise CaseError(f"no smooth ground state for case {case.describe()}")
    if case.kind == HOMOCLINIC_BOUNDARY or (case.kind == DEGENERATE and case.sub == "ii"):
        v_top = gp.g_of_beta
    else:
        v_top = v_m_root(gp)
    inner = _SmoothInner(gp, v_top, gp.G_minus, gp.u_minus)
    tail = _Tail(gp, 0.5 * v_top, inner.x_end)
    return GroundState(gp, None, None, v_top, inner, tail)


def ground_state_profile(gp: GluedPotentials, v0: Optional[float], xs) -> GroundStateProfile:
    """Sample the ground state glued at ``v0`` (``None``: the smooth one) on ``xs``."""
    gs = smooth_ground_state(gp) if v0 is None else ground_state(gp, v0)
    return gs.sample(xs)


# --------------------------------------------------------------------------
# Pinning boundary
# --------------------------------------------------------------------------

def pinning_residual(p: Problem) -> float:
    """Equal-area residual for the front connecting 0 to 1 at zero speed.

    Positive inside the pinning region, negative outside, zero on its boundary.
    """
    br = critical_points(p)
    if br.monotone or br.degenerate:
        raise CaseError("pinning residual needs beta < gamma")
    gb = float(g_eval(p, br.beta))
    gg = float(g_eval(p, br.gamma))
    if not gg < gb <= 1.0:
        raise CaseError(f"g(beta)={gb:.6g} outside the plus-branch range ({gg:.6g}, 1]")
    beta_t = float(branch_inverse(p, gb, "plus", br))
    g = lambda u: float(g_eval(p, u))
    i1, _ = integrate.quad(g, 0.0, br.beta, epsabs=1e-12, epsrel=1e-12)
    i2, _ = integrate.quad(g, beta_t, 1.0, epsabs=1e-12, epsrel=1e-12)
    return i1 + i2 + (beta_t - br.beta) * gb - 0.5


__all__ = [
    "GluedPotentials", "CaseLabel", "GroundStateFamily", "GroundStateProfile", "GroundState",
    "build_potentials", "classify_case", "build_family", "v_m_root", "v_c_root", "v_star",
    "x0_of_v0", "x0_star", "x0_sup", "family_table", "ground_state", "smooth_ground_state",
    "ground_state_profile", "pinning_residual",
    "MONOTONE", "TWO_JUMP", "SMOOTH_PLUS_JUMPS", "HOMOCLINIC_BOUNDARY", "DEGENERATE",
]
