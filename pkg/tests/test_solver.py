import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from nonlocal_pinning import model as M
from nonlocal_pinning import solver as S
from nonlocal_pinning.errors import InstabilityError, ParameterError


@pytest.fixture
def p():
    return M.Problem.cubic(0.3, 0.3)


def test_grid_layout():
    g = S.make_grid(16, 2.0)
    assert g.dx == 0.25 and g.x[0] == -2.0 and g.x[-1] == pytest.approx(1.75)
    assert g.xi[1] == pytest.approx(math.pi / 2.0) and len(g.xi) == 9


@pytest.mark.parametrize("N", [1000, 4, 0])
def test_grid_rejects_bad_sizes(N):
    with pytest.raises(ParameterError):
        S.make_grid(N, 1.0)


def test_scheme_params_validation():
    with pytest.raises(ParameterError):
        S.SchemeParams(dt=0.0)
    with pytest.raises(ParameterError):
        S.SchemeParams(scheme="euler")


def test_indicator_ic_width():
    g = S.make_grid(4096, 10 * math.pi)
    s = S.indicator_ic(g, 2.0)
    width = np.count_nonzero(s.u) * g.dx
    assert abs(width - 4.0) <= g.dx and s.u.max() == 1.0
    with pytest.raises(ParameterError):
        S.indicator_ic(g, 40.0)


@pytest.mark.parametrize("kind", ["exponential", "gaussian"])
def test_single_mode_is_exact(kind):
    q = M.Problem.cubic(0.3, 0.4, kind)
    g = S.make_grid(4096, 10 * math.pi)
    for k in (0, 1, 7, 300):
        xi = math.pi * k / g.L
        u = np.cos(xi * g.x)
        t = 1.7
        out = S.diffusion_flow(q, S.SimState(g, u), t).u
        lam = math.exp(q.d * (float(q.K.symbol(xi)) - 1.0) * t)
        assert np.max(np.abs(out - lam * u)) < 1e-12


def test_diffusion_conserves_mass_and_sign(p):
    g = S.make_grid(1024, 20.0)
    s = S.indicator_ic(g, 3.0)
    out = S.diffusion_flow(p, s, 5.0)
    assert float(S.mass(out)) == pytest.approx(float(S.mass(s)), abs=1e-12)
    assert out.u.min() > -1e-12


def test_reaction_flow_matches_ode_solver(p):
    g = S.make_grid(8, 1.0)
    u0 = np.linspace(0.05, 0.95, 8)
    out = S.reaction_flow(p, S.SimState(g, u0), 0.5, substeps=50).u
    ref = integrate.solve_ivp(lambda t, u: p.f(u), (0, 0.5), u0, rtol=1e-12, atol=1e-14).y[:, -1]
    assert np.max(np.abs(out - ref)) < 1e-10


def _run(p, g, u0, dt, scheme, T=1.0):
    st_ = S.Stepper(p, g, S.SchemeParams(dt, scheme))
    u = u0.copy()
    for _ in range(int(round(T / dt))):
        u = st_.step(u)
    return u


def test_splitting_orders(p):
    g = S.make_grid(512, 10 * math.pi)
    u0 = np.exp(-g.x ** 2)
    ref = _run(p, g, u0, 1 / 512, "richardson4")
    for scheme, lo, hi in (("richardson4", 3.5, 4.5), ("strang", 1.8, 2.2)):
        e = [np.max(np.abs(_run(p, g, u0, h, scheme) - ref)) for h in (1 / 8, 1 / 16)]
        assert lo <= math.log2(e[0] / e[1]) <= hi


def test_step_functions_agree_with_stepper(p):
    g = S.make_grid(256, 10.0)
    s = S.SimState(g, np.exp(-g.x ** 2))
    st_ = S.Stepper(p, g, S.SchemeParams(0.05, "strang"))
    assert np.array_equal(S.strang_step(p, s, 0.05).u, st_.strang(s.u))
    st_ = S.Stepper(p, g, S.SchemeParams(0.05, "richardson4"))
    out = S.richardson_step(p, s, 0.05)
    assert np.array_equal(out.u, st_.richardson(s.u)) and out.t == pytest.approx(0.05)


def test_batched_fields_match_single_runs(p):
    g = S.make_grid(256, 10.0)
    u = np.stack([np.exp(-g.x ** 2), 0.8 * np.exp(-(g.x - 1) ** 2 / 3)])
    st_ = S.Stepper(p, g, S.SchemeParams(0.01))
    both = st_.step(u)
    for k in range(2):
        assert np.max(np.abs(both[k] - st_.step(u[k]))) < 1e-15


def test_energy_of_constant_state(p):
    g = S.make_grid(64, 5.0)
    c = 0.7
    e = float(S.energy(p, S.SimState(g, np.full(g.N, c))))
    assert e == pytest.approx(2 * g.L * float(M.potential_F(p.f, c)), rel=1e-13)


def test_energy_quadratic_part_matches_symbol(p):
    # for u = cos(xi x): (d/2) int u (u - K*u) = (d/2) (1 - K^(xi)) L
    g = S.make_grid(256, 10.0)
    xi = math.pi * 3 / g.L
    u = np.cos(xi * g.x)
    quad = float(S.energy(p, S.SimState(g, u))) - float(np.sum(M.potential_F(p.f, u)) * g.dx)
    assert quad == pytest.approx(0.5 * p.d * (1 - float(p.K.symbol(xi))) * g.L, rel=1e-12)


@pytest.mark.filterwarnings("ignore::nonlocal_pinning.solver.BoundaryContaminationWarning")
def test_evolve_cadence_and_snapshots(p):
    g = S.make_grid(256, 10.0)
    tr = S.evolve(p, S.indicator_ic(g, 2.0), 1.05, S.SchemeParams(0.01), every=10,
                  snapshot_times=(0.0, 0.5))
    assert len(tr.t) == math.ceil(105 / 10) + 1
    assert tr.t[0] == 0.0 and tr.t[-1] == pytest.approx(1.05)
    assert sorted(tr.snapshots) == [0.0, 0.5]
    assert tr.snapshots[0.0].u.max() == 1.0


@pytest.mark.filterwarnings("ignore::nonlocal_pinning.solver.BoundaryContaminationWarning")
def test_evolve_observer_stops_run(p):
    g = S.make_grid(256, 10.0)
    tr = S.evolve(p, S.indicator_ic(g, 2.0), 10.0, observers=[lambda d, s: d.t >= 1.0])
    assert tr.stopped_early and tr.final.t == pytest.approx(1.0)


def test_evolve_detects_non_finite_field(p):
    g = S.make_grid(64, 10.0)
    u = np.zeros(g.N)
    u[3] = np.nan
    with pytest.raises(InstabilityError):
        S.evolve(p, S.SimState(g, u), 1.0)


def test_boundary_warning(p):
    g = S.make_grid(256, 10.0)
    with pytest.warns(S.BoundaryContaminationWarning):
        tr = S.evolve(p, S.indicator_ic(g, 8.0), 0.2)
    assert tr.boundary_warning


smooth_data = st.lists(st.tuples(st.floats(-6, 6), st.floats(0.3, 2.0), st.floats(0.0, 1.0)),
                       min_size=1, max_size=4)


def _bumps(x, spec):
    return np.clip(sum(h * np.exp(-((x - c) / w) ** 2) for c, w, h in spec), 0.0, 1.0)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 0.45), st.floats(0.05, 0.5), smooth_data)
def test_energy_non_increasing(a, d, spec):
    q = M.Problem.cubic(a, d)
    g = S.make_grid(512, 10 * math.pi)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", S.BoundaryContaminationWarning)
        tr = S.evolve(q, S.SimState(g, _bumps(g.x, spec)), 2.0, S.SchemeParams(0.01), every=1)
    assert np.max(np.diff(tr.energy)) <= 1e-8


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 0.45), st.floats(0.05, 0.5), smooth_data, smooth_data)
def test_order_preserved(a, d, spec, extra):
    q = M.Problem.cubic(a, d)
    g = S.make_grid(512, 10 * math.pi)
    u = _bumps(g.x, spec)
    v = np.minimum(u + _bumps(g.x, extra), 1.0)
    st_ = S.Stepper(q, g, S.SchemeParams(0.01))
    w = np.stack([u, v])
    for _ in range(200):
        w = st_.step(w)
    assert np.min(w[1] - w[0]) >= -1e-8


def test_random_seeded_data_stays_in_unit_interval(p):
    g = S.make_grid(512, 10 * math.pi)
    rng = np.random.default_rng(5)
    u = rng.uniform(0, 1, g.N) * (np.abs(g.x) < 8)
    tr = S.evolve(p, S.SimState(g, u), 3.0)
    assert -1e-8 <= min(tr.min) and max(tr.max) <= 1 + 1e-8
