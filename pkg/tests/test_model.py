import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from nonlocal_pinning import model as M
from nonlocal_pinning.errors import (BranchDomainError, HypothesisError, ParameterError)

import oracles as O


# ---- nonlinearity ----------------------------------------------------------

def test_cubic_zeros_and_signs():
    nl = M.BistableNonlinearity.cubic(0.3)
    assert nl(0.0) == 0.0 and nl(0.3) == 0.0 and nl(1.0) == 0.0
    assert nl(0.1) < 0.0 < nl(0.6)
    M.check_bistable(nl)


@pytest.mark.parametrize("a", [0.0, 0.5, 0.7, -0.1])
def test_cubic_rejects_a_outside_range(a):
    with pytest.raises(ParameterError):
        M.BistableNonlinearity.cubic(a)


def test_custom_nonlinearity_rejects_wrong_sign():
    f = lambda u: -u * (1 - u) * (u - 0.3)
    fp = lambda u: -(-3 * u * u + 2.6 * u - 0.3)
    with pytest.raises(HypothesisError):
        M.BistableNonlinearity.custom(f, fp, 0.3)


def test_custom_nonlinearity_rejects_nonpositive_mass():
    # a = 0.6 makes int_0^1 f < 0
    f = lambda u: u * (1 - u) * (u - 0.6)
    fp = lambda u: -3 * u * u + 3.2 * u - 0.6
    with pytest.raises(HypothesisError):
        M.BistableNonlinearity.custom(f, fp, 0.6)


def test_custom_potential_matches_cubic_closed_form():
    a = 0.27
    cub = M.BistableNonlinearity.cubic(a)
    cus = M.BistableNonlinearity.custom(cub.f, cub.fprime, a)
    u = np.linspace(0.0, 1.0, 11)
    assert np.max(np.abs(M.potential_F(cus, u) - M.potential_F(cub, u))) < 1e-14


def test_potential_derivative_is_minus_f():
    nl = M.BistableNonlinearity.cubic(0.2)
    u, h = 0.63, 1e-6
    dF = (M.potential_F(nl, u + h) - M.potential_F(nl, u - h)) / (2 * h)
    assert dF == pytest.approx(-nl(u), abs=1e-9)


# ---- closed forms ------------------------------------------------------------

@pytest.mark.parametrize("a", [0.1, 0.2, 0.3, 0.4])
def test_kappa_numeric_matches_closed_form(a):
    nl = M.BistableNonlinearity.cubic(a)
    assert M.kappa(nl, numeric=True) == pytest.approx((1 - a) ** 2 / 4, abs=1e-10)
    assert M.kappa(nl) == pytest.approx(O.kappa_numeric(a), abs=1e-10)


def test_d_pin_reference_value():
    assert M.d_pin(0.35) == pytest.approx(0.0749258, abs=1e-7)
    assert M.d_pin(0.3) == pytest.approx(0.05251, abs=1e-5)


def test_critical_a_value():
    ac = M.critical_a()
    assert ac == pytest.approx(0.3850096851, abs=1e-9)
    assert M.d_ext(ac) == pytest.approx(0.094553, abs=1e-6)
    assert M.d_pin(ac) == pytest.approx(M.d_ext(ac), abs=1e-12)


@given(st.floats(0.01, 0.49))
def test_d_pin_below_d_ext_exactly_left_of_a_c(a):
    assume(abs(a - M.critical_a()) > 1e-6)
    assert (M.d_pin(a) < M.d_ext(a)) == (a < M.critical_a())


# ---- kernels -----------------------------------------------------------------

@pytest.mark.parametrize("kind", ["exponential", "gaussian"])
def test_kernel_symbol_matches_pointwise_transform(kind):
    from scipy import integrate

    K = M.KERNELS[kind]()
    for xi in (0.0, 0.7, 2.5):
        val, _ = integrate.quad(lambda x: 2 * K.pointwise(x) * math.cos(xi * x), 0, 60,
                                limit=400, epsabs=1e-13)
        assert val == pytest.approx(float(K.symbol(xi)), abs=1e-9)


def test_custom_kernel_requires_unit_mass():
    with pytest.raises(HypothesisError):
        M.Kernel.custom(lambda xi: 2.0 / (1.0 + np.asarray(xi) ** 2))


def test_problem_round_trip_dict():
    p = M.Problem.cubic(0.25, 0.15, "gaussian")
    q = M.Problem.from_dict(p.to_dict())
    assert (q.a, q.d, q.K.kind) == (0.25, 0.15, "gaussian")


def test_problem_rejects_nonpositive_d():
    with pytest.raises(ParameterError):
        M.Problem.cubic(0.3, 0.0)


# ---- g and its branches --------------------------------------------------------

def test_critical_points_reference():
    br = M.critical_points(M.Problem.cubic(0.2, 0.1))
    assert br.beta == pytest.approx(0.1550510, abs=1e-7)
    assert br.gamma == pytest.approx(0.6449490, abs=1e-7)
    b, c = O.beta_gamma(0.2, 0.1)
    assert abs(br.beta - b) < 1e-15 and abs(br.gamma - c) < 1e-15


def test_monotone_above_d_monotone():
    a = 0.3
    br = M.critical_points(M.Problem.cubic(a, M.d_monotone(a) + 1e-3))
    assert br.monotone


def test_custom_path_finds_same_critical_points():
    a, d = 0.2, 0.1
    cub = M.BistableNonlinearity.cubic(a)
    p = M.Problem(M.BistableNonlinearity.custom(cub.f, cub.fprime, a), M.Kernel.exponential(), d)
    br = M.critical_points(p)
    b, c = O.beta_gamma(a, d)
    assert br.beta == pytest.approx(b, abs=1e-10)
    assert br.gamma == pytest.approx(c, abs=1e-10)


def test_branch_inverse_out_of_range():
    p = M.Problem.cubic(0.2, 0.1)
    br = M.critical_points(p)
    with pytest.raises(BranchDomainError):
        M.branch_inverse(p, float(M.g_eval(p, br.beta)) + 1e-6, "minus", br)
    with pytest.raises(BranchDomainError):
        M.branch_inverse(p, 1.1, "plus", br)


nonmonotone = st.tuples(st.floats(0.05, 0.45), st.floats(0.02, 0.3)).filter(
    lambda ad: ad[1] < M.d_monotone(ad[0]) - 1e-3)


@settings(max_examples=60, deadline=None)
@given(nonmonotone, st.floats(0.0, 1.0))
def test_branch_inverse_round_trip(ad, s):
    a, d = ad
    p = M.Problem.cubic(a, d)
    br = M.critical_points(p)
    for branch in ("minus", "plus"):
        u_lo, u_hi = M.branch_interval(p, branch, br)
        v = float(M.g_eval(p, u_lo + s * (u_hi - u_lo)))
        u = M.branch_inverse(p, v, branch, br)
        assert u_lo - 1e-12 <= u <= u_hi + 1e-12
        assert abs(float(M.g_eval(p, u)) - v) < 1e-13


@settings(max_examples=40, deadline=None)
@given(nonmonotone)
def test_g_increasing_on_branches(ad):
    a, d = ad
    p = M.Problem.cubic(a, d)
    br = M.critical_points(p)
    for branch in ("minus", "plus"):
        u = np.linspace(*M.branch_interval(p, branch, br), 200)
        assert np.all(np.diff(M.g_eval(p, u)) > -1e-15)


def test_f_critical_points_are_zeros_of_fprime():
    nl = M.BistableNonlinearity.cubic(0.3)
    lo, hi = M.f_critical_points(nl)
    assert 0 < lo < 0.3 < hi < 1
    assert abs(nl.fprime(lo)) < 1e-12 and abs(nl.fprime(hi)) < 1e-12
