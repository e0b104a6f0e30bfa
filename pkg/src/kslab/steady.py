"""Radial steady states of the nonlocal problem

    Lap u - beta u + lam e^u / int e^u = 0   in the disc,

with zero-flux (Neumann) or ``u = 0`` (Dirichlet) boundary conditions.

The Jacobian of the nonlocal term is ``lam diag(p) - lam p (w p)^T`` with
``p = e^u / int e^u``: tridiagonal (Laplacian plus diagonal) minus a rank-one
matrix.  Newton steps use a banded LU of the tridiagonal part and the
Sherman-Morrison update for the rank-one correction.
"""
from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgError, eigh, solve_banded
from scipy.sparse.linalg import LinearOperator, onenormest, spsolve

from .geometry import RadialGrid, neumann_radial_eigenvalue

log = logging.getLogger(__name__)

SINGULAR_COND = 1e12
CLUSTER_RADIUS = 1e-4


class BoundaryCondition(str, Enum):
    NEUMANN = "neumann"
    DIRICHLET = "dirichlet"


class SolverError(RuntimeError):
    """Numerical failure of a steady solve."""


class ConvergenceError(SolverError):
    pass


class SingularJacobianError(SolverError):
    """Jacobian numerically singular; usually a bifurcation point is near."""

    def __init__(self, message: str, condition: float = math.inf):
        super().__init__(message)
        self.condition = condition


class InvariantError(SolverError):
    """A converged solution breaks a property every true solution has."""


@dataclass(frozen=True)
class ProblemSpec:
    beta: float
    lam: float
    bc: BoundaryCondition
    grid: RadialGrid

    def __post_init__(self):
        object.__setattr__(self, "bc", BoundaryCondition(self.bc))
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.lam >= 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")

    @property
    def neumann(self) -> bool:
        return self.bc is BoundaryCondition.NEUMANN

    @property
    def free(self) -> slice:
        """Indices of unknowns: every node for Neumann, all but r = R for Dirichlet."""
        return slice(None) if self.neumann else slice(0, self.grid.n - 1)

    def with_lambda(self, lam: float) -> "ProblemSpec":
        return replace(self, lam=float(lam))

    def constant_solution(self) -> np.ndarray:
        if not self.neumann:
            raise ValueError("the Dirichlet problem has no constant solution for lam > 0")
        return np.full(self.grid.n, self.lam / (self.beta * self.grid.area))

    def check_field(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.grid.n,):
            raise ValueError(f"field has shape {u.shape}, grid has {self.grid.n} nodes")
        if not np.all(np.isfinite(u)):
            raise ValueError("field has non-finite values")
        return u


def normalized_density(grid: RadialGrid, u: np.ndarray) -> np.ndarray:
    """``e^u / int e^u`` computed with a max shift; integrates to 1."""
    z = np.exp(u - u.max())
    total = grid.integrate(z)
    if not (np.isfinite(total) and total > 0):
        raise FloatingPointError("int e^u is not representable")
    return z / total


def log_integral_exp(grid: RadialGrid, u: np.ndarray) -> float:
    """``log int e^u`` with a max shift."""
    top = float(u.max())
    return top + math.log(grid.integrate(np.exp(u - top)))


def residual(spec: ProblemSpec, u) -> np.ndarray:
    """Nodal residual; the Dirichlet boundary row holds ``u(R)`` itself."""
    u = spec.check_field(u)
    res = spec.grid.laplacian(u) - spec.beta * u + spec.lam * normalized_density(spec.grid, u)
    if not spec.neumann:
        res[-1] = u[-1]
    return res


def residual_shifted(spec: ProblemSpec, U) -> np.ndarray:
    """Residual of the zero-mean form ``Lap U - beta U + lam (e^U/int e^U - 1/|B|)``."""
    if not spec.neumann:
        raise ValueError("the shifted form only applies to the Neumann problem")
    U = spec.check_field(U)
    p = normalized_density(spec.grid, U)
    return spec.grid.laplacian(U) - spec.beta * U + spec.lam * (p - 1.0 / spec.grid.area)


class RankOneBanded:
    """Linear operator ``T - a b^T`` with tridiagonal ``T``.

    ``lower[i]`` multiplies ``x[i-1]`` and ``upper[i]`` multiplies ``x[i+1]``
    in row ``i``.  Solves use one banded LU with two right-hand sides and the
    Sherman-Morrison formula.  If ``T`` itself is (nearly) singular while the
    full matrix is not, the bordered system ``[[T, -a], [b^T, -1]]`` is solved
    by sparse LU instead.
    """

    def __init__(self, lower, diag, upper, a, b):
        self.lower = np.asarray(lower, float)
        self.diag = np.asarray(diag, float)
        self.upper = np.asarray(upper, float)
        self.a = np.asarray(a, float)
        self.b = np.asarray(b, float)
        self.n = self.diag.size
        self.fallbacks = 0

    def matvec(self, x):
        y = self.diag * x
        y[1:] += self.lower[1:] * x[:-1]
        y[:-1] += self.upper[:-1] * x[1:]
        return y - self.a * np.dot(self.b, x)

    def rmatvec(self, x):
        return self.transpose().matvec(x)

    def transpose(self) -> "RankOneBanded":
        lower = np.zeros(self.n)
        upper = np.zeros(self.n)
        lower[1:] = self.upper[:-1]
        upper[:-1] = self.lower[1:]
        return RankOneBanded(lower, self.diag, upper, self.b, self.a)

    def _banded(self):
        ab = np.zeros((3, self.n))
        ab[0, 1:] = self.upper[:-1]
        ab[1] = self.diag
        ab[2, :-1] = self.lower[1:]
        return ab

    def tridiagonal(self) -> sp.csc_matrix:
        return sp.diags(
            [self.lower[1:], self.diag, self.upper[:-1]], [-1, 0, 1], format="csc"
        )

    def solve(self, rhs):
        rhs = np.asarray(rhs, float).ravel()
        try:
            with np.errstate(all="raise"):
                yz = solve_banded((1, 1), self._banded(), np.column_stack([rhs, self.a]))
                y, z = yz[:, 0], yz[:, 1]
                denom = 1.0 - np.dot(self.b, z)
                x = y + z * (np.dot(self.b, y) / denom)
        except (LinAlgError, FloatingPointError, ZeroDivisionError):
            x = None
        if x is not None and np.all(np.isfinite(x)):
            scale = np.abs(rhs).max() + self.norm_inf() * np.abs(x).max()
            if np.abs(self.matvec(x) - rhs).max() <= 1e-9 * scale:
                return x
        return self._solve_bordered(rhs)

    def _solve_bordered(self, rhs):
        self.fallbacks += 1
        n = self.n
        M = sp.bmat(
            [
                [self.tridiagonal(), sp.csc_matrix(-self.a.reshape(n, 1))],
                [sp.csc_matrix(self.b.reshape(1, n)), sp.csc_matrix([[-1.0]])],
            ],
            format="csc",
        )
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            try:
                sol = spsolve(M, np.concatenate([rhs, [0.0]]))
            except (Warning, RuntimeError, LinAlgError) as exc:  # MatrixRankWarning
                raise SingularJacobianError(f"singular Jacobian: {exc}") from exc
        if not np.all(np.isfinite(sol)):
            raise SingularJacobianError("singular Jacobian (non-finite solve)")
        return sol[:n]

    def norm_inf(self) -> float:
        return float(
            np.max(np.abs(self.lower) + np.abs(self.diag) + np.abs(self.upper))
            + np.abs(self.a).max() * np.abs(self.b).sum()
        )

    def to_dense(self) -> np.ndarray:
        return self.tridiagonal().toarray() - np.outer(self.a, self.b)

    def condition_estimate(self) -> float:
        """1-norm condition number estimate (exact norm of J, estimated norm of J^-1)."""
        norm = float(np.abs(self.to_dense()).sum(axis=0).max())
        op = LinearOperator(
            (self.n, self.n), matvec=self.solve, rmatvec=self.transpose().solve, dtype=float
        )
        try:
            inv_norm = onenormest(op)
        except SingularJacobianError:
            return math.inf
        return norm * float(inv_norm)


def jacobian(spec: ProblemSpec, u: np.ndarray) -> RankOneBanded:
    """Jacobian of :func:`residual` restricted to the free unknowns."""
    grid = spec.grid
    lower, diag, upper = grid.laplacian_bands()
    p = normalized_density(grid, u)
    diag = diag - spec.beta + spec.lam * p
    a = spec.lam * p
    b = grid.weights * p
    k = spec.free
    lower, diag, upper, a, b = lower[k].copy(), diag[k], upper[k].copy(), a[k], b[k]
    upper[-1] = 0.0  # Dirichlet: coupling to the fixed boundary node drops out
    return RankOneBanded(lower, diag, upper, a, b)


@dataclass
class StabilitySummary:
    eigenvalues: np.ndarray  # largest first
    stability_index: int
    leading_vector: np.ndarray  # nodal values, zero on a Dirichlet boundary


@dataclass
class SteadySolution:
    spec: ProblemSpec
    u: np.ndarray
    residual_norm: float
    stability_index: int | None = None
    mass_identity_error: float | None = None
    iterations: int = 0
    condition: float | None = None
    tol: float = 1e-10

    @property
    def lam(self) -> float:
        return self.spec.lam

    @property
    def mean(self) -> float:
        return self.spec.grid.mean(self.u)

    @property
    def sup_dev(self) -> float:
        """``sup |u - mean(u)|``; zero for constant solutions."""
        return float(np.abs(self.u - self.mean).max())

    def summary(self) -> dict:
        return {
            "lambda": self.lam,
            "u0": float(self.u[0]),
            "sup": float(self.u.max()),
            "sup_dev": self.sup_dev,
            "residual_norm": self.residual_norm,
            "stability_index": self.stability_index,
        }


def _check_invariants(spec: ProblemSpec, u: np.ndarray):
    if spec.neumann:
        if u.min() <= 0:
            raise InvariantError(f"Neumann solution has min u = {u.min():.3e} <= 0")
    elif spec.lam > 0 and u[:-1].min() <= 0:
        raise InvariantError(f"Dirichlet solution has interior min u = {u[:-1].min():.3e} <= 0")


def residual_floor(spec: ProblemSpec, u: np.ndarray) -> float:
    """Roundoff level of :func:`residual` near ``u``.

    Nodal values are stored to relative precision eps, and the Laplacian
    multiplies them by coefficients up to ``4/h^2`` at the centre cell.
    """
    _, diag, _ = spec.grid.laplacian_bands()
    return 4.0 * np.finfo(float).eps * max(1.0, float(np.abs(u).max())) * float(np.abs(diag).max())


def _merit(spec, u):
    r = residual(spec, u)[spec.free]
    return r, 0.5 * float(np.dot(spec.grid.weights[spec.free], r * r))


def newton_solve(
    spec: ProblemSpec,
    init,
    tol: float = 1e-10,
    max_iter: int = 60,
    stability: bool = True,
) -> SteadySolution:
    """Damped Newton iteration to ``sup |residual| <= tol``.

    The stopping test is ``sup |residual| <= max(tol, residual_floor)``; the
    tolerance actually met is stored in ``SteadySolution.tol``.
    Raises ConvergenceError when the iteration stalls, SingularJacobianError
    when it stalls at a numerically singular Jacobian (condition > 1e12) and
    InvariantError when the converged field is not positive.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    u = spec.check_field(init).copy()
    if not spec.neumann:
        u[-1] = 0.0
    k = spec.free
    r, merit = _merit(spec, u)
    it = 0
    while np.abs(r).max() > max(tol, residual_floor(spec, u)):
        if it >= max_iter:
            _raise_stalled(spec, u, f"no convergence in {max_iter} iterations")
        J = jacobian(spec, u)
        du = J.solve(-r)
        alpha = 1.0
        while True:
            trial = u.copy()
            trial[k] += alpha * du
            try:
                r_new, merit_new = _merit(spec, trial)
            except (FloatingPointError, ValueError):
                r_new, merit_new = None, math.inf
            if r_new is not None and (
                merit_new <= (1.0 - 1e-4 * alpha) * merit
                or np.abs(r_new).max() <= max(tol, residual_floor(spec, trial))
            ):
                break
            alpha *= 0.5
            if alpha < 1e-6:
                _raise_stalled(spec, u, "line search failed")
        u, r, merit = trial, r_new, merit_new
        it += 1
    _check_invariants(spec, u)
    eff_tol = max(tol, residual_floor(spec, u))
    sol = SteadySolution(spec, u, float(np.abs(r).max()), iterations=it, tol=eff_tol)
    if spec.neumann:
        sol.mass_identity_error = abs(spec.beta * spec.grid.integrate(u) - spec.lam)
    if stability:
        sol.stability_index = linear_stability(sol).stability_index
    return sol


def _raise_stalled(spec, u, message):
    try:
        cond = jacobian(spec, u).condition_estimate()
    except SolverError:
        cond = math.inf
    if cond > SINGULAR_COND:
        raise SingularJacobianError(f"{message}; Jacobian condition ~{cond:.2e}", cond)
    raise ConvergenceError(message)


def linear_stability(sol: SteadySolution, k: int = 6) -> StabilitySummary:
    """Largest ``k`` eigenvalues of the linearisation and the count of positive ones.

    The linearisation ``phi -> Lap phi - beta phi + lam p (phi - int p phi)`` is
    self-adjoint for the quadrature inner product, so it is symmetrised with
    the square-root weights and diagonalised densely.
    """
    spec = sol.spec
    J = jacobian(spec, sol.u)
    w = spec.grid.weights[spec.free]
    sq = np.sqrt(w)
    A = J.to_dense() * sq[:, None] / sq[None, :]
    A = 0.5 * (A + A.T)
    try:
        vals, vecs = eigh(A)
    except LinAlgError as exc:
        raise SolverError(f"eigenvalue computation failed: {exc}") from exc
    vals = vals[::-1]
    vecs = vecs[:, ::-1]
    scale = max(1.0, abs(vals).max())
    index = int(np.sum(vals > 1e-9 * scale))
    lead = np.zeros(spec.grid.n)
    lead[spec.free] = vecs[:, 0] / sq
    return StabilitySummary(vals[:k].copy(), index, lead)


def bifurcation_lambda_star(beta: float, k: int = 1, R: float = 1.0) -> float:
    """Mass at which the constant Neumann state meets the k-th radial mode."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    if k < 1:
        raise ValueError("k must be >= 1")
    return math.pi * R**2 * (beta + neumann_radial_eigenvalue(k, R))


def linear_predictor(spec: ProblemSpec) -> np.ndarray:
    """First-order guess ``lam * du/dlam`` about the trivial state at lam = 0."""
    grid = spec.grid
    zero = replace(spec, lam=0.0)
    J = jacobian(zero, np.zeros(grid.n))
    rhs = -np.full(grid.n, 1.0 / grid.area)[spec.free]
    u = np.zeros(grid.n)
    u[spec.free] = spec.lam * J.solve(rhs)
    return u


def shift_to_zero_mean(sol: SteadySolution) -> np.ndarray:
    """``U = u - mean(u)``; solves the zero-mean form of the Neumann problem."""
    if not sol.spec.neumann:
        raise ValueError("zero-mean shift is only meaningful for Neumann solutions")
    return sol.u - sol.mean


# ---------------------------------------------------------------------------
# continuation


@dataclass
class BranchPoint:
    lam: float
    arclength: float
    sup_dev: float
    u0: float
    stability_index: int
    fold_flag: bool = False


@dataclass
class Branch:
    points: list[BranchPoint] = field(default_factory=list)
    solutions: list[SteadySolution] = field(default_factory=list)
    folds: list[int] = field(default_factory=list)
    reason: str = ""
    bifurcation_lambda: float | None = None
    # (lam, stability_index) samples of the constant branch scanned before switching
    constant_scan: list[tuple[float, int]] = field(default_factory=list)

    CSV_HEADER = "lambda,arclength,sup_dev,u0,stability_index,fold_flag"

    def csv_rows(self) -> list[str]:
        return [
            f"{p.lam:.17g},{p.arclength:.17g},{p.sup_dev:.17g},{p.u0:.17g},"
            f"{p.stability_index},{int(p.fold_flag)}"
            for p in self.points
        ]

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])


class _Augmented:
    """Newton corrector for ``(u, lam)`` with a pseudo-arclength constraint."""

    def __init__(self, spec: ProblemSpec):
        self.spec = spec
        self.grid = spec.grid
        self.k = spec.free
        self.w = spec.grid.weights[self.k] / spec.grid.area

    def inner(self, du, dlam_a, dv, dlam_b):
        return float(np.dot(self.w, du * dv)) + dlam_a * dlam_b

    def norm(self, du, dlam):
        return math.sqrt(self.inner(du, dlam, du, dlam))

    def _matrix(self, u, lam, tau_u, tau_lam):
        spec = replace(self.spec, lam=lam)
        J = jacobian(spec, u)
        p = normalized_density(self.grid, u)[self.k]
        n = J.n
        col = lambda v: sp.csc_matrix(np.asarray(v, float).reshape(-1, 1))
        row = lambda v: sp.csc_matrix(np.asarray(v, float).reshape(1, -1))
        M = sp.bmat(
            [
                [J.tridiagonal(), col(-J.a), col(p)],
                [row(J.b), sp.csc_matrix([[-1.0]]), None],
                [row(self.w * tau_u), None, sp.csc_matrix([[tau_lam]])],
            ],
            format="csc",
        )
        assert M.shape == (n + 2, n + 2)
        return M

    def _solve(self, M, rhs):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            try:
                x = spsolve(M, rhs)
            except (Warning, RuntimeError, LinAlgError) as exc:
                raise SingularJacobianError(f"augmented system singular: {exc}") from exc
        if not np.all(np.isfinite(x)):
            raise SingularJacobianError("augmented system singular")
        return x

    def tangent(self, u, lam, tau_u, tau_lam):
        M = self._matrix(u, lam, tau_u, tau_lam)
        n = tau_u.size
        rhs = np.zeros(n + 2)
        rhs[-1] = 1.0
        x = self._solve(M, rhs)
        du, dlam = x[:n], x[-1]
        nrm = self.norm(du, dlam)
        return du / nrm, dlam / nrm

    def correct(self, u_pred, lam_pred, tau_u, tau_lam, tol, max_iter=12):
        u = np.zeros(self.grid.n)
        uk = u_pred.copy()
        lam = lam_pred
        n = uk.size
        for it in range(max_iter):
            u[self.k] = uk
            if lam < 0:
                return None
            spec = replace(self.spec, lam=lam)
            r = residual(spec, u)[self.k]
            c = self.inner(uk - u_pred, lam - lam_pred, tau_u, tau_lam)
            if np.abs(r).max() <= max(tol, residual_floor(spec, u)) and abs(c) <= 1e-12:
                return u.copy(), lam, it
            M = self._matrix(u, lam, tau_u, tau_lam)
            x = self._solve(M, -np.concatenate([r, [0.0], [c]]))
            uk = uk + x[:n]
            lam = lam + x[-1]
            if not np.all(np.isfinite(uk)) or abs(x[:n]).max() > 1e3:
                return None
        return None


def continue_branch(
    template: ProblemSpec,
    lambda_range: tuple[float, float],
    ds: float = 0.5,
    *,
    side: int = 1,
    tol: float = 1e-10,
    max_points: int = 400,
    ds_min: float = 1e-5,
    ds_max: float | None = None,
    max_sup_dev: float = 8.0,
    epsilon: float = 1e-2,
    scan_points: int = 41,
) -> Branch:
    """Pseudo-arclength continuation of radial solutions in lambda.

    Neumann: the constant branch is scanned across ``lambda_range`` for the
    first loss of stability; the nonconstant branch is entered from there with
    predictor ``constant + side * epsilon * phi`` (``phi`` the unstable
    eigenfunction scaled to sup-norm 1).  Dirichlet: starts at ``(u, lam) = (0, 0)``.
    Continuation stops on leaving ``lambda_range``, when ``sup |u - mean u|``
    exceeds ``max_sup_dev`` (grid can no longer resolve the concentration),
    after ``max_points`` or on step-size underflow; ``Branch.reason`` says which.
    """
    lo, hi = lambda_range
    if not (0 <= lo < hi):
        raise ValueError(f"invalid lambda range {lambda_range}")
    if not ds > 0:
        raise ValueError("ds must be positive")
    ds_max = ds_max if ds_max is not None else 2 * ds
    grid = template.grid
    aug = _Augmented(template)
    branch = Branch()
    k = template.free

    if template.neumann:
        start = _neumann_bifurcation(template, lo, hi, scan_points, tol, branch)
        if start is None:
            branch.reason = "no loss of stability of the constant branch in range"
            return branch
        lam_b, u_b, phi = start
        phi = phi / np.abs(phi).max() * (1 if side >= 0 else -1)
        tau_u = phi[k] / aug.norm(phi[k], 0.0)
        tau_lam = 0.0
        u_prev, lam_prev = u_b[k], lam_b
        step = epsilon * aug.norm(phi[k], 0.0)
        s = 0.0
    else:
        zero = replace(template, lam=0.0)
        u0 = np.zeros(grid.n)
        sol0 = newton_solve(zero, u0, tol=tol)
        branch.points.append(BranchPoint(0.0, 0.0, sol0.sup_dev, 0.0, sol0.stability_index))
        branch.solutions.append(sol0)
        du = linear_predictor(replace(template, lam=1.0))[k]
        nrm = aug.norm(du, 1.0)
        tau_u, tau_lam = du / nrm, 1.0 / nrm
        u_prev, lam_prev = u0[k], 0.0
        step = ds
        s = 0.0

    while True:
        if len(branch.points) >= max_points:
            branch.reason = "max points reached"
            break
        u_pred = u_prev + step * tau_u
        lam_pred = lam_prev + step * tau_lam
        try:
            out = aug.correct(u_pred, lam_pred, tau_u, tau_lam, tol)
        except (SolverError, FloatingPointError, ValueError):
            out = None
        if out is None:
            step *= 0.5
            if step < ds_min:
                branch.reason = "step-size underflow"
                break
            continue
        u_full, lam_new, iters = out
        jump = aug.norm(u_full[k] - u_pred, lam_new - lam_pred)
        flat = template.neumann and np.ptp(u_full) < 1e-8
        if flat or (branch.points and jump > 0.5 * step):
            # corrector travelled far: likely jumped to another branch
            step *= 0.5
            if step < ds_min:
                branch.reason = "step-size underflow"
                break
            continue
        if not (lo <= lam_new <= hi):
            branch.reason = "left lambda range"
            break
        spec = replace(template, lam=lam_new)
        try:
            sol = newton_solve(spec, u_full, tol=tol)
        except SolverError as exc:
            branch.reason = f"polish failed: {exc}"
            break
        if sol.sup_dev > max_sup_dev:
            branch.reason = "concentration cap reached"
            break
        new_tau_u, new_tau_lam = aug.tangent(sol.u, lam_new, tau_u, tau_lam)
        turn = aug.inner(new_tau_u, new_tau_lam, tau_u, tau_lam)
        if turn < 0:
            new_tau_u, new_tau_lam, turn = -new_tau_u, -new_tau_lam, -turn
        if turn < 0.95 and branch.points:
            step *= 0.5
            if step < ds_min:
                branch.reason = "step-size underflow"
                break
            continue
        s += aug.norm(sol.u[k] - u_prev, lam_new - lam_prev)
        fold = bool(branch.points) and tau_lam * new_tau_lam < 0 and abs(tau_lam) > 0
        if fold:
            branch.folds.append(len(branch.points))
        branch.points.append(
            BranchPoint(lam_new, s, sol.sup_dev, float(sol.u[0]), sol.stability_index, fold)
        )
        branch.solutions.append(sol)
        u_prev, lam_prev = sol.u[k], lam_new
        tau_u, tau_lam = new_tau_u, new_tau_lam
        if iters <= 4:
            step = min(ds_max, 1.5 * step)
    return branch


def _neumann_bifurcation(template, lo, hi, scan_points, tol, branch):
    """Scan constant states for the first sign change of the leading eigenvalue."""
    from scipy.optimize import brentq

    def leading(lam):
        spec = replace(template, lam=lam)
        sol = newton_solve(spec, spec.constant_solution(), tol=tol, stability=False)
        st = linear_stability(sol)
        return st, sol

    lams = np.linspace(max(lo, 1e-8), hi, scan_points)
    prev = None
    for lam in lams:
        st, sol = leading(lam)
        branch.constant_scan.append((float(lam), st.stability_index))
        if prev is not None and prev[1].eigenvalues[0] < 0 <= st.eigenvalues[0]:
            lam_b = brentq(lambda x: leading(x)[0].eigenvalues[0], prev[0], lam, xtol=1e-12)
            st_b, sol_b = leading(lam_b)
            branch.bifurcation_lambda = lam_b
            return lam_b, sol_b.u, st_b.leading_vector
        prev = (lam, st)
    return None


def neumann_bifurcation_branches(template: ProblemSpec, lambda_range, ds=0.5, **kw):
    """Both halves of the nonconstant branch leaving the first bifurcation point."""
    return [continue_branch(template, lambda_range, ds, side=s, **kw) for s in (1, -1)]


# ---------------------------------------------------------------------------
# censuses


@dataclass
class CensusReport:
    spec: ProblemSpec
    n_starts: int
    seed: int
    cluster_radius: float
    distinct_count: int
    representatives: list[SteadySolution]
    failures: list[tuple[int, str]]
    assignments: list[int | None]


def random_starts(spec: ProblemSpec, n_starts: int, seed: int) -> list[np.ndarray]:
    """Seeded radial initial guesses: a base state plus Gaussian bumps.

    Randomness comes from numpy's PCG64 bit generator seeded with ``seed``.
    Start 0 is the bare base state; the others add one to three bumps with
    amplitudes uniform in [-2, 2], centres uniform in [0, R] and widths
    uniform in [0.1 R, 0.4 R].  Dirichlet starts are multiplied by
    ``1 - (r/R)^2`` so they vanish on the boundary.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    r = spec.grid.nodes
    R = spec.grid.R
    c = spec.lam / (spec.beta * spec.grid.area)
    starts = []
    for i in range(n_starts):
        u = np.full(r.size, c)
        if i > 0:
            for _ in range(int(rng.integers(1, 4))):
                amp = rng.uniform(-2.0, 2.0)
                centre = rng.uniform(0.0, R)
                width = rng.uniform(0.1, 0.4) * R
                u += amp * np.exp(-((r - centre) ** 2) / (2 * width**2))
        if not spec.neumann:
            u *= 1.0 - (r / R) ** 2
        starts.append(u)
    return starts


def _census_item(args):
    spec, idx, u0, tol = args
    try:
        return idx, newton_solve(spec, u0, tol=tol), None
    except SolverError as exc:
        return idx, None, f"{type(exc).__name__}: {exc}"


def multistart_census(
    spec: ProblemSpec,
    n_starts: int = 20,
    seed: int = 0,
    cluster_radius: float = CLUSTER_RADIUS,
    tol: float = 1e-10,
    workers: int = 1,
) -> CensusReport:
    """Solve from seeded random starts and cluster the converged states by sup distance."""
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    items = [(spec, i, u0, tol) for i, u0 in enumerate(random_starts(spec, n_starts, seed))]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_census_item, items))
    else:
        results = [_census_item(it) for it in items]
    results.sort(key=lambda t: t[0])
    reps: list[SteadySolution] = []
    failures = []
    assign: list[int | None] = []
    for idx, sol, err in results:
        if sol is None:
            failures.append((idx, err))
            assign.append(None)
            continue
        for j, rep in enumerate(reps):
            if np.abs(rep.u - sol.u).max() <= cluster_radius:
                assign.append(j)
                break
        else:
            reps.append(sol)
            assign.append(len(reps) - 1)
    return CensusReport(spec, n_starts, seed, cluster_radius, len(reps), reps, failures, assign)
