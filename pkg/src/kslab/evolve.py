"""Radial time integration of the parabolic Keller-Segel system with zero-flux boundaries.

    v_t = div(grad v - v grad u),    u_t = Delta u - beta u + v.

One step of the IMEX scheme first advances ``u`` implicitly,

    (I - dt (Delta - beta)) u^{n+1} = u^n + dt v^n,

then ``v`` with implicit diffusion and explicit chemotactic flux,

    (I - dt Delta) v^{n+1} = v^n - dt div(v^n grad u^{n+1}).

The flux is evaluated on cell faces, so both operators telescope and the
discrete mass ``sum w_i v_i`` is conserved up to the linear solves.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from .geometry import RadialGrid
from .steady import SolverError

log = logging.getLogger(__name__)

NEGATIVITY_TOL = 1e-12
MAX_RETRIES = 30


class NegativityError(SolverError):
    pass


class StepCollapseError(SolverError):
    pass


@dataclass(frozen=True)
class EvolutionSpec:
    beta: float
    lam: float
    grid: RadialGrid
    upwind: bool = False
    dt_max: float = 0.1
    cfl: float = 0.5
    blowup_factor: float = 1e6
    dt_min: float = 1e-12

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")

    @property
    def v_bar(self) -> float:
        return self.lam / self.grid.area

    @property
    def u_bar(self) -> float:
        return self.lam / (self.beta * self.grid.area)


@dataclass
class EvolutionState:
    t: float
    v: np.ndarray
    u: np.ndarray
    dt: float

    def __post_init__(self):
        self.v = np.asarray(self.v, float)
        self.u = np.asarray(self.u, float)
        if self.v.shape != self.u.shape:
            raise ValueError("v and u must live on the same grid")
        if self.v.min() < -NEGATIVITY_TOL:
            raise NegativityError(f"v reaches {self.v.min():.3e}")


def mass(state: EvolutionState, grid: RadialGrid) -> float:
    return grid.integrate(state.v)


def lyapunov(state: EvolutionState, spec: EvolutionSpec) -> float:
    """``int v log v - int v u + 1/2 (int |grad u|^2 + beta int u^2)``."""
    grid = spec.grid
    v, u = state.v, state.u
    if np.any(v <= 0):
        raise ValueError("entropy needs v > 0")
    return (
        grid.integrate(v * np.log(v))
        - grid.integrate(v * u)
        + 0.5 * (grid.dirichlet_energy(u) + spec.beta * grid.integrate(u * u))
    )


class _Operators:
    """Banded forms of ``I - dt (Delta - beta)`` and ``I - dt Delta`` for one grid."""

    def __init__(self, grid: RadialGrid):
        self.grid = grid
        self.lower, self.diag, self.upper = grid.laplacian_bands()
        self.cond = grid.face_conductance()
        self._cache: dict = {}

    def banded(self, dt: float, shift: float):
        key = (dt, shift)
        if key not in self._cache:
            ab = np.zeros((3, self.grid.n))
            ab[0, 1:] = -dt * self.upper[:-1]
            ab[1] = 1.0 - dt * (self.diag - shift)
            ab[2, :-1] = -dt * self.lower[1:]
            if len(self._cache) > 8:
                self._cache.clear()
            self._cache[key] = ab
        return self._cache[key]

    def chemotaxis_divergence(self, v, u, upwind: bool):
        """``div(v grad u)`` in flux form; no flux through the centre or the rim."""
        du = np.diff(u)
        if upwind:
            v_face = np.where(du > 0, v[:-1], v[1:])
        else:
            v_face = 0.5 * (v[:-1] + v[1:])
        flux = np.zeros(self.grid.n + 1)
        flux[1:-1] = self.cond * du * v_face
        return np.diff(flux) / self.grid.weights

    def cfl_limit(self, u, cfl: float) -> float:
        """Largest dt with ``dt * sum_faces |flux coefficient| / w_i <= cfl``."""
        rate = np.zeros(self.grid.n)
        c = self.cond * np.abs(np.diff(u))
        rate[:-1] += c
        rate[1:] += c
        rate /= self.grid.weights
        peak = float(rate.max())
        return math.inf if peak == 0.0 else cfl / peak


_OPS: dict[int, _Operators] = {}


def _operators(grid: RadialGrid) -> _Operators:
    ops = _OPS.get(id(grid))
    if ops is None or ops.grid is not grid:
        ops = _OPS[id(grid)] = _Operators(grid)
    return ops


def step_imex(state: EvolutionState, spec: EvolutionSpec) -> EvolutionState:
    """One accepted step; ``dt`` is halved and retried on CFL or positivity failure.

    The returned state carries the dt actually used; growth is left to the caller.
    """
    ops = _operators(spec.grid)
    dt = min(state.dt, spec.dt_max)
    for _ in range(MAX_RETRIES):
        if dt < spec.dt_min:
            break
        u_new = solve_banded((1, 1), ops.banded(dt, spec.beta), state.u + dt * state.v)
        if dt > ops.cfl_limit(u_new, spec.cfl):
            dt *= 0.5
            continue
        rhs = state.v - dt * ops.chemotaxis_divergence(state.v, u_new, spec.upwind)
        v_new = solve_banded((1, 1), ops.banded(dt, 0.0), rhs)
        if not np.all(np.isfinite(v_new)) or v_new.min() < -NEGATIVITY_TOL:
            dt *= 0.5
            continue
        return EvolutionState(state.t + dt, v_new, u_new, dt)
    raise StepCollapseError(f"no acceptable step down to dt = {dt:.3e} at t = {state.t:.6g}")


@dataclass
class TrajectorySummary:
    times: np.ndarray
    mass: np.ndarray
    dev_v: np.ndarray
    dev_u: np.ndarray
    lyapunov: np.ndarray
    outcome: str
    final: EvolutionState = field(repr=False)
    reason: str = ""

    CSV_HEADER = "t,mass,dev_v,dev_u,lyapunov"

    @property
    def mass_drift(self) -> float:
        return float(np.abs(self.mass - self.mass[0]).max() / abs(self.mass[0]))

    def tail_monotone(self, fraction: float = 0.5, rtol: float = 1e-12) -> bool:
        """``dev_u`` nonincreasing over the last ``fraction`` of the recorded steps."""
        start = int(len(self.dev_u) * (1.0 - fraction))
        tail = self.dev_u[start:]
        return bool(np.all(np.diff(tail) <= rtol * tail[:-1]))

    def csv_rows(self) -> list[str]:
        cols = (self.times, self.mass, self.dev_v, self.dev_u, self.lyapunov)
        return [",".join(f"{x:.17g}" for x in row) for row in zip(*cols)]


def _collapsed(v, grid: RadialGrid, total: float) -> bool:
    # more than half the mass inside the centre cell: the grid can no longer resolve it
    return grid.weights[0] * v[0] > 0.5 * total


def run_to_equilibrium(
    v0,
    u0,
    spec: EvolutionSpec,
    T: float,
    tol: float = 1e-4,
    dt0: float = 1e-3,
) -> TrajectorySummary:
    """Integrate until both ``sup|u - lam/(beta |B|)|`` and ``sup|v - lam/|B||`` drop below ``tol``.

    Also stops at time ``T`` or on suspected blow-up.
    """
    grid = spec.grid
    if not T > 0:
        raise ValueError("T must be positive")
    state = EvolutionState(0.0, np.array(v0, float), np.array(u0, float), dt0)
    m0 = mass(state, grid)
    if abs(m0 - spec.lam) > 1e-10 * spec.lam:
        raise ValueError(f"initial mass {m0:.12g} does not match lambda {spec.lam:.12g}")
    v_cap = spec.blowup_factor * spec.v_bar
    rec = {k: [] for k in ("t", "m", "dv", "du", "L")}

    def record(s):
        rec["t"].append(s.t)
        rec["m"].append(mass(s, grid))
        rec["dv"].append(float(np.abs(s.v - spec.v_bar).max()))
        rec["du"].append(float(np.abs(s.u - spec.u_bar).max()))
        rec["L"].append(lyapunov(s, spec) if s.v.min() > 0 else math.nan)

    record(state)
    outcome, reason = "timeout", f"reached T = {T}"
    clean = 0
    while state.t < T:
        # v is checked too: u0 = u_bar with perturbed v starts with dev_u = 0
        if rec["du"][-1] < tol and rec["dv"][-1] < tol:
            outcome, reason = "converged", f"sup|u - u_bar| and sup|v - v_bar| < {tol:g}"
            break
        trial = replace(state, dt=min(state.dt, T - state.t))
        try:
            new = step_imex(trial, spec)
        except StepCollapseError as exc:
            outcome, reason = "blowup_suspected", str(exc)
            break
        clean = clean + 1 if new.dt >= trial.dt else 0
        dt_next = new.dt
        if clean >= 10:
            dt_next = min(1.2 * new.dt, spec.dt_max)
            clean = 0
        state = replace(new, dt=dt_next)
        record(state)
        if state.v.max() > v_cap:
            outcome, reason = "blowup_suspected", f"sup v > {spec.blowup_factor:g} lam/|B|"
            break
        if _collapsed(state.v, grid, spec.lam):
            outcome, reason = "blowup_suspected", "mass concentrated in the centre cell"
            break
    log.info("evolution ended at t=%.6g: %s (%s)", state.t, outcome, reason)
    return TrajectorySummary(
        np.array(rec["t"]), np.array(rec["m"]), np.array(rec["dv"]),
        np.array(rec["du"]), np.array(rec["L"]), outcome, state, reason,
    )


def perturbed_density(grid: RadialGrid, lam: float, amplitude: float = 0.1, centre: float = 0.0,
                      width: float = 0.2) -> np.ndarray:
    """``(lam/|B|)(1 + amplitude * bump)`` renormalised to mass ``lam`` exactly."""
    bump = np.exp(-((grid.nodes - centre) ** 2) / (2 * width**2))
    v = lam / grid.area * (1.0 + amplitude * (bump - grid.mean(bump)))
    return v * (lam / grid.integrate(v))
