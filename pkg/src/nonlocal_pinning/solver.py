"""Time integration on a periodic grid by operator splitting.

The nonlocal diffusion ``d(-u + K*u)`` is linear and diagonal in Fourier
space, so its flow is applied exactly; the reaction ``u' = f(u)`` is
advanced pointwise with classical RK4.  Strang composition gives second
order and a Richardson combination of one full and two half Strang steps
gives fourth order.

Fields may carry leading batch dimensions: ``u`` has shape ``(..., N)``
and every flow acts along the last axis.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InstabilityError, ParameterError
from .model import Problem, potential_F

BOUNDARY_MARGIN = 5.0
BOUNDARY_LEVEL = 1e-6


class BoundaryContaminationWarning(UserWarning):
    """The field is no longer negligible near the periodic boundary."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L, L)`` with ``N`` nodes."""

    N: int
    L: float

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    @property
    def xi(self) -> np.ndarray:
        """Nonnegative frequencies ``pi k / L`` matching ``numpy.fft.rfft``."""
        return math.pi / self.L * np.arange(self.N // 2 + 1)


def make_grid(N: int, L: float) -> Grid:
    N = int(N)
    if N < 8 or N & (N - 1):
        raise ParameterError(f"N must be a power of two >= 8, got {N}")
    if not L > 0.0:
        raise ParameterError(f"half-width L must be positive, got {L}")
    return Grid(N, float(L))


@dataclass(frozen=True)
class SimState:
    grid: Grid
    u: np.ndarray = field(repr=False)
    t: float = 0.0

    def with_u(self, u, dt: float = 0.0) -> "SimState":
        return SimState(self.grid, u, self.t + dt)


@dataclass(frozen=True)
class SchemeParams:
    dt: float = 0.01
    scheme: str = "richardson4"
    reaction_substeps: int = 1

    def __post_init__(self):
        if not 0.0 < self.dt <= 1.0:
            raise ParameterError(f"time step must lie in (0, 1], got dt={self.dt}")
        if self.scheme not in ("strang", "richardson4"):
            raise ParameterError(f"unknown scheme {self.scheme!r}")
        if int(self.reaction_substeps) < 1:
            raise ParameterError("reaction_substeps must be >= 1")


def indicator_ic(grid: Grid, ell: float) -> SimState:
    """``u = 1`` on the closed interval ``[-ell, ell]``, else 0."""
    if not 0.0 < ell < grid.L:
        raise ParameterError(f"need 0 < ell < L = {grid.L}, got ell={ell}")
    x = grid.x
    # Half-ulp slack so that nodes sitting exactly on +-ell are included.
    return SimState(grid, (np.abs(x) <= ell * (1.0 + 1e-15)).astype(float), 0.0)


# --------------------------------------------------------------------------
# Flows
# --------------------------------------------------------------------------

def symbol_on_grid(p: Problem, grid: Grid) -> np.ndarray:
    return np.asarray(p.K.symbol(grid.xi), dtype=float)


def diffusion_multiplier(p: Problem, grid: Grid, t: float) -> np.ndarray:
    return np.exp(p.d * (symbol_on_grid(p, grid) - 1.0) * t)


def _diffuse(u, mult):
    return np.fft.irfft(np.fft.rfft(u, axis=-1) * mult, n=u.shape[-1], axis=-1)


def _rk4(f, u, h, substeps):
    h = h / substeps
    for _ in range(substeps):
        k1 = f(u)
        k2 = f(u + 0.5 * h * k1)
        k3 = f(u + 0.5 * h * k2)
        k4 = f(u + h * k3)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return u


def diffusion_flow(p: Problem, s: SimState, t: float) -> SimState:
    """Exact flow of ``u' = d(-u + K*u)`` over time ``t``."""
    return s.with_u(_diffuse(s.u, diffusion_multiplier(p, s.grid, t)), t)


def reaction_flow(p: Problem, s: SimState, t: float, substeps: int = 1) -> SimState:
    """RK4 flow of ``u' = f(u)`` at every node."""
    return s.with_u(_rk4(p.f.f, s.u, t, substeps), t)


class Stepper:
    """Splitting steps with the Fourier multipliers cached for one ``dt``."""

    def __init__(self, p: Problem, grid: Grid, params: SchemeParams):
        self.p, self.grid, self.params = p, grid, params
        dt = params.dt
        self.m_full = diffusion_multiplier(p, grid, dt)
        self.m_half = diffusion_multiplier(p, grid, 0.5 * dt)
        self._f = p.f.f
        self._n = int(params.reaction_substeps)

    def _strang(self, u, h, mult):
        u = _rk4(self._f, u, 0.5 * h, self._n)
        u = _diffuse(u, mult)
        return _rk4(self._f, u, 0.5 * h, self._n)

    def strang(self, u):
        return self._strang(u, self.params.dt, self.m_full)

    def richardson(self, u):
        h = self.params.dt
        half = self._strang(self._strang(u, 0.5 * h, self.m_half), 0.5 * h, self.m_half)
        full = self._strang(u, h, self.m_full)
        return (4.0 * half - full) / 3.0

    def step(self, u):
        return self.richardson(u) if self.params.scheme == "richardson4" else self.strang(u)


def strang_step(p: Problem, s: SimState, dt: float, substeps: int = 1) -> SimState:
    """``R^{dt/2} D^{dt} R^{dt/2}``."""
    st = Stepper(p, s.grid, SchemeParams(dt, "strang", substeps))
    return s.with_u(st.strang(s.u), dt)


def richardson_step(p: Problem, s: SimState, dt: float, substeps: int = 1) -> SimState:
    """``(4/3) Z^{dt/2} Z^{dt/2} - (1/3) Z^{dt}`` with ``Z`` the Strang step."""
    st = Stepper(p, s.grid, SchemeParams(dt, "richardson4", substeps))
    return s.with_u(st.richardson(s.u), dt)


# --------------------------------------------------------------------------
# Diagnostics and the run loop
# --------------------------------------------------------------------------

def mass(s: SimState):
    return np.sum(s.u, axis=-1) * s.grid.dx


def convolve(p: Problem, s: SimState) -> np.ndarray:
    """``K*u`` on the periodic grid."""
    return _diffuse(s.u, symbol_on_grid(p, s.grid))


def energy(p: Problem, s: SimState):
    """``(d/2)(int u^2 - int u K*u) + int F(u)`` by the periodic rectangle rule."""
    u = s.u
    quad = np.sum(u * (u - convolve(p, s)), axis=-1)
    pot = np.sum(np.asarray(potential_F(p.f, u)), axis=-1)
    return (0.5 * p.d * quad + pot) * s.grid.dx


@dataclass(frozen=True)
class Diagnostics:
    t: float
    mass: float
    max: float
    min: float
    energy: float


def diagnostics(p: Problem, s: SimState) -> Diagnostics:
    return Diagnostics(s.t, mass(s), np.max(s.u, axis=-1), np.min(s.u, axis=-1), energy(p, s))


def boundary_contaminated(s: SimState, margin: float = BOUNDARY_MARGIN,
                          level: float = BOUNDARY_LEVEL) -> bool:
    near = np.abs(s.grid.x) >= s.grid.L - margin
    return bool(np.any(np.abs(s.u[..., near]) > level))


@dataclass
class Trajectory:
    """Diagnostics recorded by :func:`evolve` and the final state."""

    t: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    max: list = field(default_factory=list)
    min: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    final: Optional[SimState] = None
    stopped_early: bool = False
    boundary_warning: bool = False
    snapshots: dict = field(default_factory=dict)

    def record(self, d: Diagnostics):
        self.t.append(d.t)
        self.mass.append(d.mass)
        self.max.append(d.max)
        self.min.append(d.min)
        self.energy.append(d.energy)

    def rows(self):
        return list(zip(self.t, self.mass, self.max, self.min, self.energy))


Observer = Callable[[Diagnostics, SimState], Optional[bool]]


def evolve(p: Problem, s0: SimState, T: float, params: SchemeParams = SchemeParams(),
           observers: Sequence[Observer] = (), every: int = 10,
           snapshot_times: Sequence[float] = ()) -> Trajectory:
    """Advance ``s0`` until ``t >= T``.

    Observers are called with the diagnostics every ``every`` steps (and at
    the start and the end); a truthy return value stops the run.
    """
    if not T > 0.0:
        raise ParameterError(f"final time must be positive, got T={T}")
    stepper = Stepper(p, s0.grid, params)
    dt = params.dt
    n_steps = int(math.ceil(T / dt - 1e-9))
    traj = Trajectory()
    snaps = sorted(set(float(t) for t in snapshot_times))
    u, t0 = np.array(s0.u, dtype=float), s0.t

    def observe(k, u):
        s = SimState(s0.grid, u, t0 + k * dt)
        if not np.all(np.isfinite(u)):
            raise InstabilityError(
                f"non-finite field after t={s.t:g}", t0 + max(k - every, 0) * dt)
        d = diagnostics(p, s)
        traj.record(d)
        if not traj.boundary_warning and boundary_contaminated(s):
            traj.boundary_warning = True
            warnings.warn(f"field exceeds {BOUNDARY_LEVEL:g} within {BOUNDARY_MARGIN:g} of the "
                          f"periodic boundary at t={s.t:g}", BoundaryContaminationWarning,
                          stacklevel=3)
        stop = False
        for obs in observers:
            stop = bool(obs(d, s)) or stop
        return stop

    def snapshot(k, u):
        t = t0 + k * dt
        while snaps and snaps[0] <= t + 1e-9:
            traj.snapshots[snaps.pop(0)] = SimState(s0.grid, u.copy(), t)

    snapshot(0, u)
    if observe(0, u):
        traj.stopped_early = True
        traj.final = SimState(s0.grid, u, t0)
        return traj
    for k in range(1, n_steps + 1):
        u = stepper.step(u)
        snapshot(k, u)
        if k % every == 0 or k == n_steps:
            if observe(k, u):
                traj.stopped_early = k < n_steps
                traj.final = SimState(s0.grid, u, t0 + k * dt)
                return traj
    traj.final = SimState(s0.grid, u, t0 + n_steps * dt)
    return traj


__all__ = [
    "Grid", "SimState", "SchemeParams", "Stepper", "Trajectory", "Diagnostics",
    "BoundaryContaminationWarning", "make_grid", "indicator_ic", "diffusion_flow",
    "reaction_flow", "strang_step", "richardson_step", "evolve", "energy", "mass",
    "convolve", "diagnostics", "boundary_contaminated", "diffusion_multiplier",
]
