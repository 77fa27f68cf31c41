"""Independent reference computations used by the tests.

Nothing here calls the package's phase-plane machinery: potentials are
integrated with ``scipy.integrate.quad``, branch inverses use ``brentq`` on
the raw cubic, and convolutions use direct Gauss-Legendre quadrature.
"""

import math
import warnings

import numpy as np
from scipy import integrate, optimize


def f_cubic(u, a):
    return u * (1.0 - u) * (u - a)


def fp_cubic(u, a):
    return -3.0 * u * u + 2.0 * (1.0 + a) * u - a


def g_raw(u, a, d):
    return u - f_cubic(u, a) / d


def gp_raw(u, a, d):
    return 1.0 - fp_cubic(u, a) / d


def beta_gamma(a, d):
    """Critical points of ``g``, from ``g' = 0`` solved by hand."""
    disc = (1.0 + a) ** 2 - 3.0 * (a + d)
    s = math.sqrt(disc)
    return (1.0 + a - s) / 3.0, (1.0 + a + s) / 3.0


def d_ext_formula(a):
    return (1.0 - a) ** 2 / 4.0


def d_pin_formula(a):
    return (1.0 - a + a * a - math.sqrt(1.0 - 2.0 * a)) / 3.0


def kappa_numeric(a):
    """``max f(u)/u`` over ``(a, 1)`` by bounded scalar minimization."""
    res = optimize.minimize_scalar(lambda u: -f_cubic(u, a) / u, bounds=(a, 1.0),
                                   method="bounded", options={"xatol": 1e-13})
    return -res.fun


def inv_minus(v, a, d):
    b, _ = beta_gamma(a, d)
    return optimize.brentq(lambda u: g_raw(u, a, d) - v, 0.0, b, xtol=1e-15, rtol=1e-15)


def inv_plus(v, a, d):
    _, c = beta_gamma(a, d)
    return optimize.brentq(lambda u: g_raw(u, a, d) - v, c, 1.0 + 1e-9, xtol=1e-15, rtol=1e-15)


def _dG(s, a, d):
    # dG/dv = u - v along a branch; in the variable u, with dv = g'(u) du
    return (s - g_raw(s, a, d)) * gp_raw(s, a, d)


def G_minus_raw(v, a, d):
    """Lower potential at ``v``, normalised by ``G_-(0) = 0``."""
    u = inv_minus(v, a, d)
    val, _ = integrate.quad(_dG, 0.0, u, args=(a, d), epsabs=1e-15, epsrel=1e-13)
    return val


def upper_climb(u_from, u_to, a, d):
    """``G_+(g(u_to)) - G_+(g(u_from))`` along the plus branch."""
    val, _ = integrate.quad(_dG, u_from, u_to, args=(a, d), epsabs=1e-15, epsrel=1e-13)
    return val


def x0_raw(a, d, v0):
    """Jump point of the ground state glued at ``v0``, by singular quadrature.

    The upper orbit starts at ``(v0, V')`` with ``V'^2/2 = -G_-(v0)`` and
    climbs to its turning point ``v*``; ``x0`` is the travel time.
    """
    w = -G_minus_raw(v0, a, d)
    u0 = inv_plus(v0, a, d)
    if w <= 0.0:
        return 0.0, v0
    h = lambda u: upper_climb(u0, u, a, d) - w
    u_star = optimize.brentq(h, u0, 1.0, xtol=1e-15, rtol=1e-15)
    v_star = g_raw(u_star, a, d)

    def integrand(u):
        # 1/|V'| dv with the (u* - u)^(-1/2) factor taken by the weight
        climb = upper_climb(u, u_star, a, d)
        return gp_raw(u, a, d) * math.sqrt((u_star - u) / (2.0 * climb)) if climb > 0 else 0.0

    with warnings.catch_warnings():
        # the climb integral is tiny and noisy right at the turning point
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(integrand, u0, u_star, weight="alg", wvar=(0.0, -0.5),
                                epsabs=1e-13, epsrel=1e-11, limit=200)
    return val, v_star


_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


def convolve_direct(U, x, breaks, half_width=60.0, panels=241):
    """``(e^{-|.|}/2 * U)(x)`` by composite Gauss-Legendre on ``[-W, W]``.

    Panels are split at ``breaks`` (the jumps of ``U``) and at ``x`` (the kink
    of the kernel), so every panel integrand is smooth.
    """
    base = np.linspace(-half_width, half_width, panels + 1)
    out = np.empty(len(x))
    for k, xv in enumerate(x):
        edges = np.unique(np.concatenate([base, breaks, [xv]]))
        lo, hi = edges[:-1], edges[1:]
        mid, rad = 0.5 * (lo + hi), 0.5 * (hi - lo)
        y = (mid[:, None] + rad[:, None] * _GL_X[None, :]).ravel()
        w = (rad[:, None] * _GL_W[None, :]).ravel()
        out[k] = np.sum(w * 0.5 * np.exp(-np.abs(xv - y)) * U(y))
    return out


def x0_mp(a, d, v0, dps=40):
    """``(x0, v*)`` in extended precision with mpmath.

    Potentials are the exact polynomials in ``u``, so small ``v0`` (where
    the double-precision quadratures lose relative accuracy) is safe.
    """
    import mpmath as mp

    with mp.workdps(dps):
        a, d, v0 = mp.mpf(a), mp.mpf(d), mp.mpf(v0)
        f = lambda u: u * (1 - u) * (u - a)
        g = lambda u: u - f(u) / d
        gp = lambda u: 1 + (3 * u * u - 2 * (1 + a) * u + a) / d
        F = lambda u: u ** 4 / 4 - (1 + a) * u ** 3 / 3 + a * u ** 2 / 2
        gam = lambda u: -(f(u) / d) ** 2 / 2 - F(u) / d
        disc = mp.sqrt((1 + a) ** 2 - 3 * (a + d))
        b, c = (1 + a - disc) / 3, (1 + a + disc) / 3

        def bisect(h, lo, hi):
            # h increasing on [lo, hi]; bisection is immune to zero slopes
            for _ in range(4 * dps):
                mid = (lo + hi) / 2
                lo, hi = (mid, hi) if h(mid) < 0 else (lo, mid)
            return (lo + hi) / 2

        um = bisect(lambda u: g(u) - v0, mp.mpf(0), b)
        up = bisect(lambda u: g(u) - v0, c, mp.mpf(1))
        w = gam(mp.mpf(0)) - gam(um)
        us = bisect(lambda u: gam(u) - gam(up) - w, up, mp.mpf(1))

        def integrand(u):
            climb = gam(us) - gam(u)
            # nodes that round onto the turning point carry negligible weight
            return gp(u) / mp.sqrt(2 * climb) if climb > 0 else mp.mpf(0)

        x0 = mp.quad(integrand, [up, us])
        return float(x0), float(g(us))
