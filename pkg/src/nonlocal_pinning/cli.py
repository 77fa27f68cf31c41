"""Command-line driver: ``nonlocal-pinning <command> [options]``.

Settings are resolved lowest to highest priority: built-in defaults, the
``--preset`` bundle, the ``--config`` JSON file, then explicit flags.  The
config file is a flat JSON object; see ``CONFIG_KEYS`` for the accepted keys.

Exit codes: 0 success, 2 configuration error, 3 numerical error,
4 precondition or case error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import classify as C
from . import io
from . import model as M
from . import phaseplane as P
from . import solver as S
from .errors import (BranchDomainError, CaseError, HypothesisError, NumericalError,
                     ParameterError, PinningError, PreconditionError)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CASE = 0, 2, 3, 4


class ConfigError(ParameterError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs; deterministic, no seeds."""

    a: float = 0.3
    d: float = 0.3
    kernel: str = "exponential"
    N: int = 2 ** 14
    L: float = 10.0 * math.pi
    dt: float = 0.01
    scheme: str = "richardson4"
    classify: C.ClassifyParams = field(default_factory=C.ClassifyParams)
    out: str = "out"
    jobs: int = 1
    ell: float = 2.0
    v0: Optional[str] = None
    tol: Optional[float] = None
    snapshot_times: Optional[tuple] = None
    a_values: tuple = ()
    d_values: tuple = ()
    ell_values: tuple = ()

    @property
    def problem(self) -> M.Problem:
        return M.Problem.cubic(self.a, self.d, self.kernel)

    @property
    def setup(self) -> C.SimSetup:
        return C.SimSetup(self.N, self.L, self.dt, self.scheme)

    def to_dict(self) -> dict:
        out = {k.name: getattr(self, k.name) for k in fields(self) if k.name != "classify"}
        out.update(asdict(self.classify))
        return out


_CLASSIFY_KEYS = {f.name for f in fields(C.ClassifyParams)}
_RUN_KEYS = {f.name for f in fields(RunConfig)} - {"classify"}
CONFIG_KEYS = sorted(_RUN_KEYS | _CLASSIFY_KEYS)
_TUPLE_KEYS = ("snapshot_times", "a_values", "d_values", "ell_values")


def _preset(name: Optional[str]) -> dict:
    if name is None:
        return {}
    try:
        setup, params = C.PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(C.PRESETS)}") from None
    out = {"N": setup.N, "L": setup.L, "dt": setup.dt, "scheme": setup.scheme}
    out.update(asdict(params))
    return out


def _load_config_file(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {', '.join(unknown)}; "
                          f"accepted keys: {', '.join(CONFIG_KEYS)}")
    return data


def build_config(values: dict) -> RunConfig:
    """Validate merged settings and build a :class:`RunConfig`."""
    unknown = sorted(set(values) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    run = {k: v for k, v in values.items() if k in _RUN_KEYS}
    cls = {k: v for k, v in values.items() if k in _CLASSIFY_KEYS}
    for k in _TUPLE_KEYS:
        if run.get(k) is not None:
            run[k] = tuple(float(x) for x in run[k])
    if "v0" in run and run["v0"] is not None:
        run["v0"] = str(run["v0"])
    try:
        params = C.ClassifyParams(**{**asdict(C.ClassifyParams()), **cls})
        cfg = RunConfig(**run, classify=params)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    if not 0.0 < cfg.a < 0.5:
        raise ConfigError(f"a must satisfy 0 < a < 1/2, got a={cfg.a}")
    if not cfg.d > 0.0:
        raise ConfigError(f"d must be positive, got d={cfg.d}")
    if cfg.kernel not in M.KERNELS:
        raise ConfigError(f"unknown kernel {cfg.kernel!r}; choose from {sorted(M.KERNELS)}")
    if not isinstance(cfg.N, int) or cfg.N < 8 or cfg.N & (cfg.N - 1):
        raise ConfigError(f"N must be a power of two >= 8, got N={cfg.N}")
    if not cfg.L > 0.0:
        raise ConfigError(f"L must be positive, got L={cfg.L}")
    if not 0.0 < cfg.ell < cfg.L:
        raise ConfigError(f"ell must satisfy 0 < ell < L = {cfg.L:g}, got ell={cfg.ell}; "
                          "increase L or reduce ell")
    if int(cfg.jobs) < 1:
        raise ConfigError(f"jobs must be >= 1, got {cfg.jobs}")
    for name, vals, hi in (("a_values", cfg.a_values, 0.5), ("d_values", cfg.d_values, math.inf)):
        bad = [v for v in vals if not 0.0 < v < hi]
        if bad:
            raise ConfigError(f"{name} out of range: {bad}")
    bad = [v for v in cfg.ell_values if not 0.0 < v < cfg.L]
    if bad:
        raise ConfigError(f"ell_values must lie in (0, L = {cfg.L:g}): {bad}")
    cfg.setup.scheme_params()    # validates dt and scheme
    return cfg


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _range(text: str) -> tuple:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("grid size must be >= 1")
    return tuple(np.linspace(lo, hi, n).tolist())


_FLAG_KEYS = {"a": "a", "d": "d", "ell": "ell", "v0": "v0", "dt": "dt", "N": "N", "L": "L",
              "Tf": "T_f", "out": "out", "jobs": "jobs", "kernel": "kernel", "scheme": "scheme",
              "tol": "tol", "snapshots": "snapshot_times", "a_list": "a_values",
              "d_list": "d_values", "ell_list": "ell_values"}


def config_from_args(args) -> RunConfig:
    values = {"out": "out"}
    values.update(_preset(args.preset))
    values.update(_load_config_file(args.config))
    for flag, key in _FLAG_KEYS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    return build_config(values)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def _report(obj):
    print(json.dumps(io._jsonable(obj), indent=2, sort_keys=True))


def cmd_simulate(cfg: RunConfig) -> dict:
    """Evolve the indicator of ``[-ell, ell]`` to ``T_f``."""
    out = _outdir(cfg)
    p, setup = cfg.problem, cfg.setup
    grid = setup.grid()
    T = cfg.classify.T_f
    snaps = cfg.snapshot_times if cfg.snapshot_times is not None else (0.0, T)
    traj = S.evolve(p, S.indicator_ic(grid, cfg.ell), T, setup.scheme_params(),
                    every=cfg.classify.every, snapshot_times=snaps)
    io.trajectory_csv(out / "diagnostics.csv", traj)
    files = ["diagnostics.csv"]
    for t, st in sorted(traj.snapshots.items()):
        name = f"snapshot_t{t:g}.csv"
        io.field_csv(out / name, st)
        files.append(name)
    final = traj.final
    io.svg_lines(out / "final_u.svg", [(f"u(T={final.t:g})", grid.x, final.u)],
                 title=f"a={cfg.a:g}, d={cfg.d:g}, ell={cfg.ell:g}", xlabel="x", ylabel="u")
    io.svg_lines(out / "mass.svg", [("mass", traj.t, traj.mass)],
                 title="mass(t)", xlabel="t", ylabel="mass")
    files += ["final_u.svg", "mass.svg"]
    summary = {"config": cfg.to_dict(), "t_final": final.t, "rows": len(traj.t),
               "final_max": traj.max[-1], "final_mass": traj.mass[-1],
               "boundary_warning": traj.boundary_warning, "files": files}
    io.write_json(out / "summary.json", summary)
    return summary


def _profile_grid(x0: Optional[float]) -> np.ndarray:
    half = (2.0 * x0 if x0 is not None else 0.0) + 12.0
    return np.linspace(-half, half, 2001)


def cmd_groundstate(cfg: RunConfig) -> dict:
    """Build a ground state glued at ``v0`` (a number, ``star`` or ``smooth``)."""
    out = _outdir(cfg)
    gp = P.build_potentials(cfg.problem)
    case = P.classify_case(gp)
    mode = cfg.v0
    if mode is None:
        mode = "star" if case.has_jump_family else "smooth"
    summary = {"a": cfg.a, "d": cfg.d, "case": case.describe(), "pinned": case.pinned,
               "mode": mode}
    files = []
    family = None
    if case.has_jump_family:
        family = P.build_family(gp)
        v0s, x0s, vst = P.family_table(gp, 60, family)
        io.family_csv(out / "family.csv", v0s, x0s, vst)
        io.svg_lines(out / "family.svg", [("x0(v0)", v0s, x0s)],
                     title=f"family, {case.describe()}", xlabel="v0", ylabel="x0")
        files += ["family.csv", "family.svg"]
        summary["family"] = {"v_lo": family.v_lo, "v_hi": family.v_hi,
                             "lo_open": family.lo_open, "hi_open": family.hi_open,
                             "v_m": family.v_m, "v_c": family.v_c}
    if mode == "smooth":
        v0 = None
    elif mode == "star":
        if family is None:
            raise CaseError(f"no discontinuous ground states: {case.describe()}")
        v0, x0s_val = P.x0_star(gp, family)
        summary["v0_star"], summary["x0_star"] = v0, x0s_val
        if not math.isfinite(x0s_val):
            raise CaseError(f"x0 is unbounded at v0 -> v_c = {v0:.12g} ({case.describe()})")
    else:
        try:
            v0 = float(mode)
        except ValueError:
            raise ConfigError(f"v0 must be a number, 'star' or 'smooth', got {mode!r}") from None
        if family is None:
            raise CaseError(f"no discontinuous ground states: {case.describe()}")
        if not family.contains(v0):
            raise CaseError(f"v0={v0} outside the admissible family "
                            f"[{family.v_lo:.12g}, {family.v_hi:.12g}] for {case.describe()}")
    gs = P.smooth_ground_state(gp) if v0 is None else P.ground_state(gp, v0)
    prof = gs.sample(_profile_grid(gs.x0))
    io.profile_csv(out / "profile.csv", prof)
    vlines = [] if prof.smooth else [("jump -x0", -prof.x0), ("jump +x0", prof.x0)]
    io.svg_lines(out / "profile.svg", [("U", prof.x, prof.U), ("V = K*U", prof.x, prof.V)],
                 title=f"ground state, {case.describe()}", xlabel="x", ylabel="U",
                 vlines=vlines)
    files += ["profile.csv", "profile.svg"]
    summary.update({"v0": prof.v0, "x0": prof.x0, "v_star": prof.v_star,
                    "smooth": prof.smooth, "files": files})
    io.write_json(out / "summary.json", summary)
    return summary


def _x0_overlay(a: float, d: float) -> float:
    if C.region_label(a, d).label not in ("R2", "R3"):
        return math.nan
    gp = P.build_potentials(M.Problem.cubic(a, d))
    if not P.classify_case(gp).has_jump_family:
        return math.nan
    return P.x0_star(gp)[1]


def cmd_threshold(cfg: RunConfig) -> dict:
    """``ell0*`` and ``ell1*`` at ``a`` for each ``d`` (``d_values`` or ``d``)."""
    out = _outdir(cfg)
    ds = cfg.d_values or (cfg.d,)
    rows, records = [], []
    for d in ds:
        reg = C.region_label(cfg.a, d)
        rec = {"a": cfg.a, "d": d, "region": reg.label, "error": None}
        try:
            p = M.Problem.cubic(cfg.a, d, cfg.kernel)
            cache = C.VerdictCache(p, cfg.classify, cfg.setup)
            r0 = C.threshold_ell0(p, cfg.classify, cfg.setup, tol=cfg.tol, cache=cache,
                                  strict=False)
            r1 = C.threshold_ell1(p, cfg.classify, cfg.setup, tol=cfg.tol, cache=cache,
                                  strict=False)
            try:
                cache.check_order()
            except C.MonotonicityError as exc:
                rec["error"] = f"{type(exc).__name__}: {exc}"
            rec.update(ell0=r0.to_dict(), ell1=r1.to_dict(),
                       verdicts={repr(k): v.label for k, v in sorted(cache.verdicts.items())})
            row = [cfg.a, d, r0.ell_lo, r0.ell_hi, r1.ell_lo, r1.ell_hi, reg.label]
        except PinningError as exc:
            rec["error"] = f"{type(exc).__name__}: {exc}"
            row = [cfg.a, d, None, None, None, None, reg.label]
        try:
            rec["x0_star"] = _x0_overlay(cfg.a, d) if cfg.kernel == "exponential" else math.nan
        except PinningError as exc:
            rec["x0_star"] = math.nan
            rec["x0_error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
        records.append(rec)
    io.write_csv(out / "thresholds.csv", io.THRESHOLD_HEADER, rows)
    io.write_json(out / "thresholds.json", {"config": cfg.to_dict(), "rows": records})

    def mid(lo, hi):
        if lo is None or not math.isfinite(hi):
            return math.nan
        return 0.5 * (lo + hi)

    dd = [r[1] for r in rows]
    series = [("ell0*", dd, [mid(r[2], r[3]) for r in rows]),
              ("ell1*", dd, [mid(r[4], r[5]) for r in rows])]
    vlines = [("d_ext", M.d_ext(cfg.a)), ("d_pin", M.d_pin(cfg.a))]
    markers = [("x0*", dd, [rec["x0_star"] for rec in records])]
    io.svg_lines(out / "thresholds.svg", series, title=f"thresholds at a={cfg.a:g}",
                 xlabel="d", ylabel="ell", vlines=vlines, markers=markers)
    return {"rows": records, "files": ["thresholds.csv", "thresholds.json", "thresholds.svg"]}


def cmd_regions(cfg: RunConfig) -> dict:
    """Closed-form region labels over an ``(a, d)`` grid."""
    out = _outdir(cfg)
    a_vals = cfg.a_values or tuple(np.linspace(0.02, 0.48, 20).tolist())
    d_vals = cfg.d_values or tuple(np.linspace(0.01, 0.35, 20).tolist())
    rows = []
    for a in a_vals:
        for d in d_vals:
            r = C.region_label(a, d)
            rows.append([a, d, r.label, r.sub or "", r.boundary])
    io.write_csv(out / "regions.csv", ["a", "d", "region", "sub", "boundary"], rows)
    io.write_json(out / "regions.json", [dict(zip(["a", "d", "region", "sub", "boundary"], r))
                                         for r in rows])
    io.svg_scatter(out / "regions.svg", [r[0] for r in rows], [r[1] for r in rows],
                   [r[2] for r in rows], title="regions", xlabel="a", ylabel="d")
    counts = {}
    for r in rows:
        counts[r[2]] = counts.get(r[2], 0) + 1
    return {"counts": counts, "files": ["regions.csv", "regions.json", "regions.svg"]}


def cmd_sweep(cfg: RunConfig) -> dict:
    """Classify every ``(a, d, ell)`` of the grid, possibly in parallel."""
    out = _outdir(cfg)
    tasks = C.grid_tasks(cfg.a_values or (cfg.a,), cfg.d_values or (cfg.d,),
                         cfg.ell_values or (cfg.ell,), cfg.kernel)
    rows = C.sweep(tasks, cfg.classify, cfg.setup, jobs=int(cfg.jobs))
    io.sweep_csv(out / "sweep.csv", rows)
    io.write_json(out / "sweep.json", {"config": cfg.to_dict(), "rows": [asdict(r) for r in rows]})
    io.svg_scatter(out / "sweep.svg", [r.d for r in rows], [r.ell for r in rows],
                   [r.verdict for r in rows], title=f"verdicts, a in {sorted({r.a for r in rows})}",
                   xlabel="d", ylabel="ell")
    errors = sum(r.error is not None for r in rows)
    return {"tasks": len(rows), "errors": errors,
            "files": ["sweep.csv", "sweep.json", "sweep.svg"]}


# --------------------------------------------------------------------------
# Self-check: fast invariant suites, no test framework needed
# --------------------------------------------------------------------------

def _check_branches():
    p = M.Problem.cubic(0.2, 0.1)
    br = M.critical_points(p)
    s = math.sqrt(1.2 ** 2 - 3 * 0.3)
    ok = abs(br.beta - (1.2 - s) / 3) < 1e-12 and abs(br.gamma - (1.2 + s) / 3) < 1e-12
    v = np.linspace(max(float(M.g_eval(p, br.gamma)), 0.0) + 1e-6,
                    float(M.g_eval(p, br.beta)) - 1e-6, 9)
    for b in ("minus", "plus"):
        ok &= float(np.max(np.abs(M.g_eval(p, M.branch_inverse(p, v, b, br)) - v))) < 1e-12
    return ok, f"beta={br.beta:.10f}, gamma={br.gamma:.10f}"


def _check_pinning_line():
    from scipy import optimize

    worst = 0.0
    for a in (0.1, 0.3):
        dp = M.d_pin(a)
        root = optimize.brentq(lambda d: P.pinning_residual(M.Problem.cubic(a, d)),
                               0.95 * dp, 1.05 * dp, xtol=1e-14)
        worst = max(worst, abs(root - dp))
    return worst < 1e-9, f"max |root - d_pin| = {worst:.2e}"


def _check_critical_a():
    ac = M.critical_a()
    return abs(M.d_ext(ac) - M.d_pin(ac)) < 1e-12, f"a_c={ac:.10f}"


def _check_hamiltonian():
    gp = P.build_potentials(M.Problem.cubic(0.2, 0.2))
    gs = P.ground_state(gp, 0.2)
    x = np.linspace(-3.0, 3.0, 301)
    prof = gs.sample(x)
    inner = np.abs(x) < gs.x0
    H_in = 0.5 * prof.Vp[inner] ** 2 + gp.G_plus(prof.V[inner])
    H_out = 0.5 * prof.Vp[~inner] ** 2 + gp.G_minus(prof.V[~inner])
    res = max(float(np.max(np.abs(H_in - gp.G_plus(prof.v_star)))), float(np.max(np.abs(H_out))))
    return res < 1e-8, f"x0={gs.x0:.10f}, Hamiltonian residual {res:.1e}"


def _check_diffusion():
    p = M.Problem.cubic(0.3, 0.4)
    grid = S.make_grid(256, 10.0)
    s = S.SimState(grid, np.exp(-grid.x ** 2))
    a = S.diffusion_flow(p, S.diffusion_flow(p, s, 0.3), 0.4)
    b = S.diffusion_flow(p, s, 0.7)
    err = float(np.max(np.abs(a.u - b.u)))
    dm = abs(float(S.mass(b)) - float(S.mass(s)))
    return err < 1e-13 and dm < 1e-11, f"semigroup {err:.1e}, mass drift {dm:.1e}"


def _check_order():
    p = M.Problem.cubic(0.3, 0.4)
    grid = S.make_grid(256, 10.0)
    u0 = 0.9 * np.exp(-grid.x ** 2 / 4)
    T = 1.0

    def run(dt):
        st = S.Stepper(p, grid, S.SchemeParams(dt, "richardson4"))
        u = u0.copy()
        for _ in range(int(round(T / dt))):
            u = st.step(u)
        return u

    ref = run(1 / 256)
    e1, e2 = (float(np.max(np.abs(run(h) - ref))) for h in (1 / 8, 1 / 16))
    order = math.log2(e1 / e2)
    return order > 3.5, f"observed order {order:.2f}"


def _check_regions():
    ok = all(C.region_label(a, d).label == lab for a, d, lab in
             ((0.3, 0.3, "R1"), (0.3, 0.2, "R2"), (0.2, 0.15, "R3"), (0.45, 0.11, "R4"),
              (0.3, 0.02, "R5")))
    return ok, "sample points"


SELF_CHECKS = [
    ("critical points and branch inverses", _check_branches),
    ("pinning residual vanishes on d_pin", _check_pinning_line),
    ("d_ext and d_pin meet at a_c", _check_critical_a),
    ("ground state conserves the Hamiltonians", _check_hamiltonian),
    ("diffusion flow is an exact semigroup", _check_diffusion),
    ("Richardson splitting is fourth order", _check_order),
    ("region labels at sample points", _check_regions),
]


def cmd_selfcheck(cfg: RunConfig) -> dict:
    """Fast consistency checks of closed forms, ground states and the solver."""
    results = []
    for name, fn in SELF_CHECKS:
        t = time.perf_counter()
        try:
            ok, detail = fn()
        except PinningError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append({"check": name, "ok": bool(ok), "detail": detail,
                        "seconds": round(time.perf_counter() - t, 3)})
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}", file=sys.stderr)
    if not all(r["ok"] for r in results):
        raise NumericalError("self-check failed: " +
                             ", ".join(r["check"] for r in results if not r["ok"]))
    return {"checks": results}


COMMANDS = {
    "simulate": cmd_simulate,
    "groundstate": cmd_groundstate,
    "threshold": cmd_threshold,
    "regions": cmd_regions,
    "sweep": cmd_sweep,
    "selfcheck": cmd_selfcheck,
}


# --------------------------------------------------------------------------
# Argument parsing and exit codes
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--config", help="flat JSON config file")
    g.add_argument("--preset", choices=sorted(C.PRESETS), help="grid and run-length bundle")
    g.add_argument("--out", help="output directory (default: ./out)")
    g.add_argument("--jobs", type=int, help="worker processes for sweep")
    g.add_argument("--a", type=float, help="threshold parameter of the cubic, 0 < a < 1/2")
    g.add_argument("--d", type=float, help="diffusion coefficient, d > 0")
    g.add_argument("--ell", type=float, help="half-width of the indicator initial datum")
    g.add_argument("--v0", help="gluing value: a number, 'star' or 'smooth'")
    g.add_argument("--dt", type=float, help="time step")
    g.add_argument("--N", type=int, help="grid points (power of two)")
    g.add_argument("--L", type=float, help="half-width of the periodic domain")
    g.add_argument("--Tf", type=float, help="final time")
    g.add_argument("--kernel", help="kernel kind: exponential or gaussian")
    g.add_argument("--scheme", help="strang or richardson4")
    g.add_argument("--tol", type=float, help="threshold bracket width (default 1e-3 L)")
    g.add_argument("--snapshots", type=_floats, help="snapshot times, comma separated")
    g.add_argument("--a-list", dest="a_list", type=_floats, help="a values, comma separated")
    g.add_argument("--d-list", dest="d_list", type=_floats, help="d values, comma separated")
    g.add_argument("--ell-list", dest="ell_list", type=_floats, help="ell values, comma separated")
    g.add_argument("--a-range", dest="a_list", type=_range, help="a grid as lo:hi:n")
    g.add_argument("--d-range", dest="d_list", type=_range, help="d grid as lo:hi:n")

    parser = argparse.ArgumentParser(
        prog="nonlocal-pinning",
        description="Nonlocal bistable diffusion: simulations, ground states and thresholds.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or "").strip().splitlines()[0]
                       if fn.__doc__ else name)
    return parser


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (CaseError, PreconditionError, HypothesisError, BranchDomainError)):
        return EXIT_CASE
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    return EXIT_CONFIG


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        result = COMMANDS[args.command](cfg)
    except (PinningError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    _report(result)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
