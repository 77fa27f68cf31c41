import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from nonlocal_pinning import classify as C
from nonlocal_pinning import model as M
from nonlocal_pinning.errors import ParameterError, PreconditionError

DESK_SETUP, DESK_PARAMS = C.PRESETS["desk"]


# ---- regions -----------------------------------------------------------------

@pytest.mark.parametrize("a, d, label", [
    (0.3, 0.3, "R1"), (0.3, 0.2, "R2"), (0.2, 0.1, "R3"), (0.45, 0.11, "R4"),
    (0.35, 0.05, "R5"), (0.45, 0.065, "R5"), (0.45, 0.2, "R2"), (0.1, 0.004, "R5"),
])
def test_region_sample_points(a, d, label):
    assert C.region_label(a, d).label == label


def test_region_boundary_flag():
    r = C.region_label(0.3, M.d_ext(0.3))
    assert r.boundary and "d_ext" in r.near


@settings(max_examples=200)
@given(st.floats(0.01, 0.49), st.floats(0.001, 0.4))
def test_region_matches_closed_form_inequalities(a, d):
    ac, de, dp = M.critical_a(), M.d_ext(a), M.d_pin(a)
    assume(abs(a - ac) > 1e-9 and min(abs(d - de), abs(d - dp), abs(d - 0.25)) > 1e-9)
    lab = C.region_label(a, d).label
    ext = d > de           # extinction for small data
    prop = d > dp          # not pinned: large data propagate
    if d > 0.25:
        assert lab == "R1"
    else:
        want = {(True, True): "R2", (False, True): "R3", (True, False): "R4",
                (False, False): "R5"}[(ext, prop)]
        assert lab == want
    assert C.TABLE_PATTERN[lab][0] == ext
    assert C.TABLE_PATTERN[lab][2] == prop


def test_region_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        C.region_label(0.5, 0.1)
    with pytest.raises(ParameterError):
        C.region_label(0.3, 0.0)


# ---- threshold logic on synthetic verdicts -------------------------------------

class FakeCache(C.VerdictCache):
    """Verdicts from a rule in ``ell`` instead of simulations."""

    def __init__(self, rule):
        super().__init__(None, DESK_PARAMS, DESK_SETUP)
        self.rule = rule

    def __call__(self, ell):
        key = float(ell)
        if key not in self.verdicts:
            self.verdicts[key] = C.Verdict(self.rule(key), 0.0, 0.0, 0.0, 0.0, 0.0)
        return self.verdicts[key]


def staircase(l0, l1):
    def rule(ell):
        if ell < l0:
            return C.EXTINCTION
        return C.PROPAGATION if ell > l1 else C.STAGNATION
    return rule


@settings(max_examples=100)
@given(st.floats(0.01, 20.0), st.floats(0.0, 5.0))
def test_bisection_brackets_synthetic_thresholds(l0, gap):
    l1 = l0 + gap
    assume(l1 < 0.8 * DESK_SETUP.L - 0.1)
    cache = FakeCache(staircase(l0, l1))
    tol = 1e-3 * DESK_SETUP.L
    r0 = C._threshold(cache, "ell0", lambda v: v.label == C.EXTINCTION, tol, 0.8 * DESK_SETUP.L)
    r1 = C._threshold(cache, "ell1", lambda v: v.label == C.PROPAGATION, tol, 0.8 * DESK_SETUP.L)
    for r, true in ((r0, l0), (r1, l1)):
        if r.status == C.BRACKETED:
            assert r.ell_lo <= true <= r.ell_hi and r.ell_hi - r.ell_lo <= tol
        else:
            assert r.status == C.OPEN_BELOW and true <= tol
    cache.check_order()


def test_open_results():
    tol, top = 0.03, 25.0
    never = FakeCache(lambda ell: C.STAGNATION)
    r = C._threshold(never, "ell1", lambda v: v.label == C.PROPAGATION, tol, top)
    assert r.status == C.OPEN_ABOVE and r.value == math.inf
    r = C._threshold(never, "ell0", lambda v: v.label == C.EXTINCTION, tol, top)
    assert r.status == C.OPEN_BELOW and r.value == 0.0


def test_order_violation_is_reported():
    bad = FakeCache(lambda ell: C.PROPAGATION if ell < 1 else C.EXTINCTION)
    bad(0.5), bad(2.0)
    with pytest.raises(C.MonotonicityError):
        bad.check_order()


def test_threshold_result_dict():
    r = C.ThresholdResult("ell0", C.BRACKETED, 1.0, 1.2, None, None, 0.1)
    d = r.to_dict()
    assert d["value"] == pytest.approx(1.1) and d["status"] == "Bracketed"


# ---- real runs at desk resolution ------------------------------------------------

@pytest.mark.parametrize("a, d, ell, label", [
    (0.3, 0.4, 0.05, C.EXTINCTION),
    (0.3, 0.4, 6.0, C.PROPAGATION),
    (0.35, 0.05, 2.0, C.STAGNATION),
])
def test_classify_run_verdicts(a, d, ell, label):
    v = C.classify_run(M.Problem.cubic(a, d), ell, DESK_PARAMS, DESK_SETUP)
    assert v.label == label
    assert v.t_decided <= DESK_PARAMS.T_f


def test_stagnation_final_state_is_steady():
    v = C.classify_run(M.Problem.cubic(0.35, 0.05), 2.0, DESK_PARAMS, DESK_SETUP)
    assert v.steady_residual < DESK_PARAMS.eps_steady and v.final_max > 0.35


def test_classify_run_rejects_large_ell():
    with pytest.raises(ParameterError):
        C.classify_run(M.Problem.cubic(0.3, 0.3), 0.85 * DESK_SETUP.L, DESK_PARAMS, DESK_SETUP)


def test_sweep_keeps_order_and_embeds_errors():
    tasks = C.grid_tasks([0.3], [0.4], [0.05, 0.1]) + [C.SweepTask(0.3, 0.4, 30.0)]
    rows = C.sweep(tasks, DESK_PARAMS, DESK_SETUP, jobs=2)
    assert [r.ell for r in rows] == [0.05, 0.1, 30.0]
    assert rows[0].verdict == rows[1].verdict == C.EXTINCTION
    assert rows[2].verdict == "Error" and "ParameterError" in rows[2].error
    serial = C.sweep(tasks[:2], DESK_PARAMS, DESK_SETUP, jobs=1)
    assert [r.final_mass for r in serial] == [r.final_mass for r in rows[:2]]


def test_conjecture_check_precondition():
    with pytest.raises(PreconditionError):
        C.conjecture_check(0.35, 0.05)


def test_sandwich_hypotheses():
    assert all(C.sandwich_hypotheses(M.Problem.cubic(0.35, 0.05)).values())
    assert not C.sandwich_hypotheses(M.Problem.cubic(0.2, 0.2))["pinned"]
    with pytest.raises(PreconditionError):
        C.sandwich_check(M.Problem.cubic(0.2, 0.2), 1.0)


def test_lower_sandwich_without_pinning():
    params = C.ClassifyParams(T_f=40.0)
    rep = C.sandwich_check(M.Problem.cubic(0.3, 0.08), 1.0, params, DESK_SETUP, lower_only=True)
    assert rep.lower_ok and math.isnan(rep.upper_x0)


def test_observed_pattern():
    vs = [C.Verdict(lab, 0, 0, 0, 0, 0) for lab in (C.EXTINCTION, C.PROPAGATION)]
    assert C.observed_pattern(vs) == (True, False, True)


def test_doubling_scan_may_reach_ell_max():
    # the scan's cap 0.8 L is itself an admissible length
    setup = C.SimSetup(N=512)
    v = C.classify_run(M.Problem.cubic(0.3, 0.4), 0.8 * setup.L, C.ClassifyParams(T_f=1.0), setup)
    assert v.label in (C.UNDECIDED, C.PROPAGATION, C.STAGNATION)
