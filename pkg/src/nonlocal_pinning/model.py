"""Nonlinearities, kernels and closed-form parameter boundaries.

The model is ``u_t = d(-u + K*u) + f(u)`` with a bistable ``f`` (zeros
``0 < a < 1``) and an even probability kernel ``K``.  Everything here is a
pure function of immutable objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from .errors import BranchDomainError, HypothesisError, ParameterError

ROOT_TOL = 1e-12

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


# --------------------------------------------------------------------------
# Nonlinearity
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BistableNonlinearity:
    """Bistable reaction term with zeros ``0 < a < 1``.

    Build instances with :meth:`cubic` or :meth:`custom`; the latter checks
    the bistability assumptions numerically.
    """

    kind: str
    a: float
    f: Callable = field(repr=False, compare=False)
    fprime: Callable = field(repr=False, compare=False)

    @classmethod
    def cubic(cls, a: float) -> "BistableNonlinearity":
        if not 0.0 < a < 0.5:
            raise ParameterError(f"cubic nonlinearity needs 0 < a < 1/2, got a={a}")
        a = float(a)

        def f(u):
            u = np.asarray(u, dtype=float)
            return _scalar_or_array(u * (1.0 - u) * (u - a), u)

        def fprime(u):
            u = np.asarray(u, dtype=float)
            return _scalar_or_array(-3.0 * u * u + 2.0 * (1.0 + a) * u - a, u)

        return cls("cubic", a, f, fprime)

    @classmethod
    def custom(cls, f: Callable, fprime: Callable, a: float) -> "BistableNonlinearity":
        """Wrap user callables after checking they are of bistable type.

        ``f`` and ``fprime`` must accept numpy arrays.
        """
        if not 0.0 < a < 1.0:
            raise ParameterError(f"middle zero must satisfy 0 < a < 1, got a={a}")
        nl = cls("custom", float(a), f, fprime)
        check_bistable(nl)
        return nl

    def __call__(self, u):
        return self.f(u)

    def to_dict(self) -> dict:
        if self.kind != "cubic":
            raise ParameterError("only the cubic nonlinearity is serializable")
        return {"kind": "cubic", "a": self.a}


def check_bistable(nl: BistableNonlinearity) -> None:
    """Raise :class:`HypothesisError` unless ``nl`` is of bistable type."""
    a = nl.a
    for z in (0.0, a, 1.0):
        if abs(float(nl.f(np.float64(z)))) > 1e-12:
            raise HypothesisError(f"f({z}) = {nl.f(z)!r} is not zero")
    left = np.linspace(0.0, a, 102)[1:-1]
    right = np.linspace(a, 1.0, 102)[1:-1]
    if np.any(np.asarray(nl.f(left)) >= 0.0):
        raise HypothesisError("f must be negative on (0, a)")
    if np.any(np.asarray(nl.f(right)) <= 0.0):
        raise HypothesisError("f must be positive on (a, 1)")
    fp0, fpa, fp1 = (float(nl.fprime(np.float64(z))) for z in (0.0, a, 1.0))
    if not (fp0 < 0.0 and fp1 < 0.0 and fpa > 0.0):
        raise HypothesisError(
            f"need f'(0)<0, f'(a)>0, f'(1)<0; got {fp0:.3g}, {fpa:.3g}, {fp1:.3g}")
    mass, _ = integrate.quad(lambda s: float(nl.f(np.float64(s))), 0.0, 1.0)
    if mass <= 0.0:
        raise HypothesisError(f"need int_0^1 f > 0, got {mass:.3g}")


def f_eval(nl: BistableNonlinearity, u):
    return nl.f(u)


def potential_F(nl: BistableNonlinearity, u):
    """``F(u) = -int_0^u f``; closed form for the cubic."""
    u = np.asarray(u, dtype=float)
    if nl.kind == "cubic":
        a = nl.a
        out = u**4 / 4.0 - (1.0 + a) * u**3 / 3.0 + a * u**2 / 2.0
    else:
        s = 0.5 * (_GL_NODES + 1.0)
        vals = nl.f(u[..., None] * s)
        out = -0.5 * u * np.sum(_GL_WEIGHTS * vals, axis=-1)
    return _scalar_or_array(out, u)


def _golden_max(fun, lo, hi, tol=ROOT_TOL):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = fun(c), fun(d)
    while hi - lo > tol:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = fun(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = fun(d)
    x = 0.5 * (lo + hi)
    return x, fun(x)


def kappa(nl: BistableNonlinearity, numeric: bool = False) -> float:
    """``sup_{u in (a,1)} f(u)/u``.

    The cubic returns ``(1-a)^2/4`` unless ``numeric`` is set.  The numeric
    path scans 1000 points and refines the best one by golden section.
    """
    a = nl.a
    if nl.kind == "cubic" and not numeric:
        return (1.0 - a) ** 2 / 4.0
    ratio = lambda u: float(nl.f(np.float64(u))) / u
    grid = np.linspace(a, 1.0, 1001)
    vals = np.asarray(nl.f(grid)) / grid
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    _, best = _golden_max(ratio, lo, hi)
    return best


def _check_a(a):
    if not 0.0 < a < 0.5:
        raise ParameterError(f"need 0 < a < 1/2, got a={a}")


def d_ext(a: float) -> float:
    """Extinction boundary ``(1-a)^2/4`` for the cubic."""
    _check_a(a)
    return (1.0 - a) ** 2 / 4.0


def d_pin(a: float) -> float:
    """Pinning boundary for the cubic with the exponential kernel."""
    _check_a(a)
    return (1.0 - a + a * a - math.sqrt(1.0 - 2.0 * a)) / 3.0


def d_monotone(a: float) -> float:
    """Above this diffusion ``g`` is increasing on [0, 1] (cubic)."""
    return (1.0 - a + a * a) / 3.0


@lru_cache(maxsize=None)
def critical_a() -> float:
    """The unique ``a_c`` in (0, 1/2) with ``d_pin(a_c) = d_ext(a_c)``."""
    phi = lambda a: d_pin(a) - d_ext(a)
    return optimize.bisect(phi, 1e-6, 0.5 - 1e-9, xtol=1e-15, maxiter=200)


# --------------------------------------------------------------------------
# Kernels
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Kernel:
    """Even probability kernel described by its Fourier symbol."""

    kind: str
    symbol: Callable = field(repr=False, compare=False)
    pointwise: Optional[Callable] = field(default=None, repr=False, compare=False)
    second_moment: float = 1.0

    @classmethod
    def exponential(cls) -> "Kernel":
        return cls(
            "exponential",
            lambda xi: 1.0 / (1.0 + np.asarray(xi, dtype=float) ** 2),
            lambda x: 0.5 * np.exp(-np.abs(np.asarray(x, dtype=float))),
            1.0,
        )

    @classmethod
    def gaussian(cls) -> "Kernel":
        return cls(
            "gaussian",
            lambda xi: np.exp(-np.asarray(xi, dtype=float) ** 2),
            lambda x: np.exp(-np.asarray(x, dtype=float) ** 2 / 4.0) / math.sqrt(4.0 * math.pi),
            1.0,
        )

    @classmethod
    def custom(cls, symbol: Callable, pointwise: Optional[Callable] = None,
               second_moment: float = float("nan")) -> "Kernel":
        """Kernel given by its sampled symbol (``pointwise`` is optional)."""
        k0 = float(np.asarray(symbol(np.zeros(1)))[0])
        if abs(k0 - 1.0) > 1e-12:
            raise HypothesisError(f"kernel must have unit mass, symbol(0) = {k0}")
        xi = np.linspace(0.0, 50.0, 201)
        if not np.allclose(symbol(xi), symbol(-xi), rtol=0, atol=1e-14):
            raise HypothesisError("kernel symbol must be even")
        if pointwise is not None:
            x = np.linspace(0.0, 20.0, 201)
            kx = np.asarray(pointwise(x))
            if np.any(kx < 0) or not np.allclose(kx, pointwise(-x), rtol=0, atol=1e-14):
                raise HypothesisError("kernel must be even and nonnegative")
        return cls("custom", symbol, pointwise, second_moment)

    def to_dict(self) -> dict:
        if self.kind == "custom":
            raise ParameterError("custom kernels are not serializable")
        return {"kind": self.kind}


KERNELS = {"exponential": Kernel.exponential, "gaussian": Kernel.gaussian}


# --------------------------------------------------------------------------
# Problem and the auxiliary function g
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    f: BistableNonlinearity
    K: Kernel
    d: float

    def __post_init__(self):
        if not self.d > 0.0:
            raise ParameterError(f"diffusion coefficient must be positive, got d={self.d}")

    @classmethod
    def cubic(cls, a: float, d: float, kernel: str = "exponential") -> "Problem":
        try:
            K = KERNELS[kernel]()
        except KeyError:
            raise ParameterError(f"unknown kernel {kernel!r}") from None
        return cls(BistableNonlinearity.cubic(a), K, float(d))

    @property
    def a(self) -> float:
        return self.f.a

    def to_dict(self) -> dict:
        return {"nonlinearity": self.f.to_dict(), "kernel": self.K.to_dict(), "d": self.d}

    @classmethod
    def from_dict(cls, data: dict) -> "Problem":
        nl = data["nonlinearity"]
        if nl.get("kind") != "cubic":
            raise ParameterError(f"unsupported nonlinearity {nl.get('kind')!r}")
        return cls.cubic(nl["a"], data["d"], data["kernel"]["kind"])


def g_eval(p: Problem, u):
    """``g(u) = u - f(u)/d``."""
    u = np.asarray(u, dtype=float)
    return _scalar_or_array(u - np.asarray(p.f(u)) / p.d, u)


def g_prime(p: Problem, u):
    u = np.asarray(u, dtype=float)
    return _scalar_or_array(1.0 - np.asarray(p.f.fprime(u)) / p.d, u)


@dataclass(frozen=True)
class GBranches:
    """Critical points ``beta <= gamma`` of ``g`` (absent when monotone)."""

    d: float
    beta: Optional[float]
    gamma: Optional[float]
    monotone: bool

    @property
    def degenerate(self) -> bool:
        return not self.monotone and abs(self.gamma - self.beta) <= 1e-12


def _bisect_sign_change(fun, lo, hi, tol=ROOT_TOL):
    flo = fun(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_points(p: Problem) -> GBranches:
    """Zeros of ``g'`` in (0, 1); closed form for the cubic."""
    if p.f.kind == "cubic":
        a, d = p.a, p.d
        disc = (1.0 + a) ** 2 - 3.0 * (a + d)
        if disc < 0.0:
            return GBranches(d, None, None, True)
        root = math.sqrt(disc)
        return GBranches(d, (1.0 + a - root) / 3.0, (1.0 + a + root) / 3.0, False)

    gp = lambda u: float(g_prime(p, np.float64(u)))
    grid = np.linspace(0.0, 1.0, 4001)
    vals = np.asarray(g_prime(p, grid))
    flips = np.nonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))[0]
    if len(flips) == 0:
        return GBranches(p.d, None, None, True)
    if len(flips) != 2:
        raise HypothesisError(
            f"g must have exactly two critical points: g' changes sign {len(flips)} times on (0,1)")
    roots = [_bisect_sign_change(gp, grid[k], grid[k + 1]) for k in flips]
    return GBranches(p.d, roots[0], roots[1], False)


def branch_interval(p: Problem, branch: str, br: Optional[GBranches] = None):
    """``(u_lo, u_hi)`` on which the requested branch of ``g`` is increasing."""
    br = br or critical_points(p)
    if branch not in ("minus", "plus"):
        raise ParameterError(f"branch must be 'minus' or 'plus', got {branch!r}")
    if br.monotone:
        return 0.0, 1.0
    return (0.0, br.beta) if branch == "minus" else (br.gamma, 1.0)


def solve_increasing(fun, dfun, target, lo, hi, maxiter=200):
    """Solve ``fun(u) = target`` elementwise for increasing ``fun`` on [lo, hi].

    Newton steps that leave the running bracket fall back to bisection, so
    the iteration converges even where ``dfun`` vanishes at an endpoint.
    """
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    flo = np.asarray(fun(lo), dtype=float)
    fhi = np.asarray(fun(hi), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.clip((target - flo) / (fhi - flo), 0.0, 1.0)
    u = np.where(np.isfinite(w), lo + w * (hi - lo), 0.5 * (lo + hi))
    for _ in range(maxiter):
        r = np.asarray(fun(u), dtype=float) - target
        hi = np.where(r > 0.0, u, hi)
        lo = np.where(r <= 0.0, u, lo)
        slope = np.asarray(dfun(u), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            un = u - r / slope
        bad = ~np.isfinite(un) | (un < lo) | (un > hi)
        un = np.where(bad, 0.5 * (lo + hi), un)
        done = (np.abs(un - u) <= 2e-16 * np.abs(un) + 1e-300) | (hi - lo <= 2e-16 * np.abs(hi) + 1e-300)
        u = un
        if np.all(done):
            break
    return u



def branch_inverse(p: Problem, v, branch: str, br: Optional[GBranches] = None):
    """Invert ``g`` on one of its increasing branches.

    Vectorized safeguarded Newton iteration; every iterate that leaves the
    current bracket is replaced by a bisection step.
    """
    u_lo, u_hi = branch_interval(p, branch, br)
    g_lo, g_hi = float(g_eval(p, u_lo)), float(g_eval(p, u_hi))
    v_arr = np.asarray(v, dtype=float)
    slack = 1e-13
    if np.any(v_arr < g_lo - slack) or np.any(v_arr > g_hi + slack) or np.any(np.isnan(v_arr)):
        raise BranchDomainError(
            f"value outside the {branch} branch range [{g_lo:.6g}, {g_hi:.6g}]")
    vv = np.clip(v_arr, g_lo, g_hi)
    u = solve_increasing(lambda w: g_eval(p, w), lambda w: g_prime(p, w), vv, u_lo, u_hi)
    return _scalar_or_array(u, v_arr)


def f_critical_points(nl: BistableNonlinearity):
    """``(u_-, u_+)``: zeros of ``f'`` in (0, a) and (a, 1)."""
    a = nl.a
    if nl.kind == "cubic":
        root = math.sqrt((1.0 + a) ** 2 - 3.0 * a)
        return (1.0 + a - root) / 3.0, (1.0 + a + root) / 3.0
    fp = lambda u: float(nl.fprime(np.float64(u)))
    return _bisect_sign_change(fp, 0.0, a), _bisect_sign_change(fp, a, 1.0)


def g_zero_above(p: Problem, u_from: float) -> Optional[float]:
    """Zero of ``g`` in (u_from, 1) when ``g(u_from) < 0``, else None."""
    if g_eval(p, u_from) >= 0.0:
        return None
    return _bisect_sign_change(lambda u: float(g_eval(p, u)), u_from, 1.0)


__all__ = [
    "BistableNonlinearity", "Kernel", "Problem", "GBranches", "KERNELS",
    "check_bistable", "f_eval", "potential_F", "kappa", "d_ext", "d_pin",
    "d_monotone", "critical_a", "g_eval", "g_prime", "critical_points",
    "branch_interval", "branch_inverse", "solve_increasing", "f_critical_points", "g_zero_above",
    "BranchDomainError",
]
