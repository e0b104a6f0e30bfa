"""The functional ``J(u) = 1/2 int |grad u|^2 + beta/2 int u^2 - lam log int e^u`` on radial fields.

Critical points of ``J`` are exactly the zero-flux steady states.  The
discrete functional uses the same face conductances as the grid Laplacian,
so its gradient is the residual of the discrete steady problem.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .geometry import RadialGrid
from .steady import (
    BoundaryCondition,
    ConvergenceError,
    ProblemSpec,
    log_integral_exp,
    normalized_density,
    random_starts,
)

EIGHT_PI = 8.0 * math.pi
_EPS = np.finfo(float).eps


@dataclass
class EnergyReport:
    value: float
    gradient: np.ndarray
    grad_sup: float


def evaluate_J(grid: RadialGrid, u, lam: float, beta: float) -> float:
    u = np.asarray(u, float)
    if not np.all(np.isfinite(u)):
        raise ValueError("field has non-finite values")
    return (
        0.5 * grid.dirichlet_energy(u)
        + 0.5 * beta * grid.integrate(u * u)
        - lam * log_integral_exp(grid, u)
    )


def gradient_J(grid: RadialGrid, u, lam: float, beta: float) -> np.ndarray:
    """``-Delta u + beta u - lam e^u / int e^u``: the gradient in the area-weighted inner product."""
    u = np.asarray(u, float)
    return -grid.laplacian(u) + beta * u - lam * normalized_density(grid, u)


def energy_report(grid: RadialGrid, u, lam: float, beta: float) -> EnergyReport:
    g = gradient_J(grid, u, lam, beta)
    return EnergyReport(evaluate_J(grid, u, lam, beta), g, float(np.abs(g).max()))


def constant_energy(c: float, lam: float, beta: float, R: float = 1.0) -> float:
    """Closed form of ``J`` on ``u = c``."""
    area = math.pi * R * R
    return 0.5 * beta * c * c * area - lam * (c + math.log(area))


def directional_derivative_fd(grid, u, direction, lam, beta, step=1e-6) -> float:
    """Central-difference oracle for ``dJ(u)[direction]``."""
    u = np.asarray(u, float)
    d = np.asarray(direction, float)
    jp = evaluate_J(grid, u + step * d, lam, beta)
    jm = evaluate_J(grid, u - step * d, lam, beta)
    return (jp - jm) / (2.0 * step)


class _Preconditioner:
    """Solves ``(-Delta + beta) x = y`` on the radial grid (tridiagonal)."""

    def __init__(self, grid: RadialGrid, beta: float):
        lower, diag, upper = grid.laplacian_bands()
        ab = np.zeros((3, grid.n))
        ab[0, 1:] = -upper[:-1]
        ab[1] = beta - diag
        ab[2, :-1] = -lower[1:]
        self.ab = ab

    def __call__(self, y):
        return solve_banded((1, 1), self.ab, y)


@dataclass
class MinimizeResult:
    u: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    log: list = field(default_factory=list)  # (iter, J, grad_norm)

    CSV_HEADER = "iter,J,grad_norm"

    def csv_rows(self) -> list[str]:
        return [f"{i},{j:.17g},{g:.17g}" for i, j, g in self.log]


def minimize_J(
    grid: RadialGrid,
    lam: float,
    beta: float,
    m: int | None = None,
    init=None,
    tol: float = 1e-9,
    max_iter: int = 2000,
) -> MinimizeResult:
    """Preconditioned gradient descent with Armijo backtracking.

    Radial fields are invariant under every rotation group, so the ``m``-fold
    symmetry class needs no projection here; ``m`` is only validated.
    """
    if m is not None and (int(m) != m or m < 2):
        raise ValueError("rotation order must be an integer >= 2")
    if not beta > 0:
        raise ValueError("beta must be positive")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if lam > EIGHT_PI:
        warnings.warn("lambda > 8 pi: J need not be bounded below", RuntimeWarning)
    u = np.zeros(grid.n) if init is None else np.array(init, float)
    precond = _Preconditioner(grid, beta)
    J = evaluate_J(grid, u, lam, beta)
    g = gradient_J(grid, u, lam, beta)
    gnorm = float(np.abs(g).max())
    log = [(0, J, gnorm)]
    it = 0
    while gnorm > tol:
        if it >= max_iter:
            raise ConvergenceError(f"descent stalled at |grad| = {gnorm:.3e} after {it} steps")
        d = -precond(g)
        slope = grid.integrate(g * d)
        step = 1.0
        while True:
            trial = u + step * d
            J_new = evaluate_J(grid, trial, lam, beta)
            # J is only known to a few ulps; do not reject on noise
            if J_new <= J + 1e-4 * step * slope + 8 * _EPS * max(1.0, abs(J)):
                break
            step *= 0.5
            if step < 1e-12:
                # no decrease representable: accept if already at roundoff level
                if abs(slope) <= 1e-14 * max(1.0, abs(J)):
                    return MinimizeResult(u, J, gnorm, it, log)
                raise ConvergenceError("line search failed")
        u, J = trial, J_new
        g = gradient_J(grid, u, lam, beta)
        gnorm = float(np.abs(g).max())
        it += 1
        log.append((it, J, gnorm))
    return MinimizeResult(u, J, gnorm, it, log)


def random_initial_fields(grid: RadialGrid, lam: float, beta: float, count: int, seed: int):
    """Seeded radial starts (constant plus Gaussian bumps), as used by the census."""
    spec = ProblemSpec(beta, lam, BoundaryCondition.NEUMANN, grid)
    return random_starts(spec, count + 1, seed)[1:]
