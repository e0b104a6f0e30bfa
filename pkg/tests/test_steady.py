import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import fsolve

from kslab.geometry import bessel_j0_prime_zero, build_radial_grid
from kslab.steady import (
    BoundaryCondition,
    ConvergenceError,
    ProblemSpec,
    RankOneBanded,
    bifurcation_lambda_star,
    continue_branch,
    jacobian,
    linear_stability,
    multistart_census,
    newton_solve,
    random_starts,
    residual,
)

N, D = BoundaryCondition.NEUMANN, BoundaryCondition.DIRICHLET

# u(0) of the Dirichlet solution at beta = 1, lambda = 4 pi (radial shooting, see below)
DIRICHLET_U0_4PI = 1.1031841425440934


def shooting_u0(beta, lam):
    """Independent oracle: shoot u'' + u'/r - beta u + a e^u = 0 for (u(0), a)."""

    def rhs(r, y):
        u, du, m = y
        return [du, -du / r + beta * u - a_cur[0] * math.exp(u), 2 * math.pi * r * math.exp(u)]

    a_cur = [0.0]

    def mismatch(x):
        s, a = x
        a_cur[0] = a
        r0 = 1e-6
        u0 = s - (a * math.exp(s) - beta * s) * r0**2 / 4
        du0 = -(a * math.exp(s) - beta * s) * r0 / 2
        sol = solve_ivp(rhs, (r0, 1.0), [u0, du0, math.pi * r0**2 * math.exp(s)],
                        rtol=1e-12, atol=1e-13)
        u1, _, m1 = sol.y[:, -1]
        return [u1, a * m1 - lam]

    s, a = fsolve(mismatch, [1.1, 2.4], xtol=1e-13)
    return s


def test_shooting_oracle_agrees_with_frozen_value():
    assert shooting_u0(1.0, 4 * math.pi) == pytest.approx(DIRICHLET_U0_4PI, abs=1e-8)


def test_dirichlet_second_order_convergence():
    errs = []
    for n in (101, 201, 401):
        g = build_radial_grid(n)
        sol = newton_solve(ProblemSpec(1.0, 4 * math.pi, D, g), np.zeros(n))
        errs.append(abs(sol.u[0] - DIRICHLET_U0_4PI))
        assert sol.u[-1] == 0.0
    assert errs[-1] < 5e-6
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.1)


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("lam", [math.pi, 4 * math.pi, 8 * math.pi])
def test_constant_residual(grid, beta, lam):
    spec = ProblemSpec(beta, lam, N, grid)
    r = residual(spec, spec.constant_solution())
    assert np.abs(r).max() <= 1e-12


def test_newton_from_perturbed_constant(grid):
    spec = ProblemSpec(1.0, math.pi, N, grid)
    sol = newton_solve(spec, np.full(grid.n, 1.2))
    assert np.abs(sol.u - 1.0).max() < 1e-10
    assert sol.stability_index == 0
    assert sol.mass_identity_error < 1e-10


def test_dirichlet_zero_lambda_gives_zero(grid):
    sol = newton_solve(ProblemSpec(1.0, 0.0, D, grid), np.zeros(grid.n))
    assert np.abs(sol.u).max() == 0.0


def test_rank_one_jacobian_matches_dense(grid):
    spec = ProblemSpec(1.0, 30.0, N, grid)
    u = 3 + np.cos(4 * grid.nodes)
    J = jacobian(spec, u)
    dense = J.to_dense()
    x = np.random.default_rng(0).normal(size=grid.n)
    assert np.allclose(J.matvec(x), dense @ x, rtol=1e-12, atol=1e-9)
    y = J.solve(x)
    assert np.allclose(dense @ y, x, atol=1e-8 * np.abs(x).max())


def test_jacobian_finite_difference(grid):
    spec = ProblemSpec(1.0, 30.0, N, grid)
    u = 3 + 0.3 * np.cos(4 * grid.nodes)
    d = np.sin(2 * grid.nodes)
    eps = 1e-4
    fd = (residual(spec, u + eps * d) - residual(spec, u - eps * d)) / (2 * eps)
    an = jacobian(spec, u).matvec(d)
    assert np.abs(fd - an).max() <= 1e-7 * np.abs(an).max()


def test_dirichlet_linearization_eigenvalue():
    g = build_radial_grid(201)
    sol = newton_solve(ProblemSpec(1.0, 0.0, D, g), np.zeros(g.n))
    top = linear_stability(sol).eigenvalues[0]
    j01 = 2.404825557695773
    assert top == pytest.approx(-(1 + j01**2), rel=1e-4)


def test_neumann_stability_changes_at_lambda_star(grid):
    star = bifurcation_lambda_star(1.0)
    assert star == pytest.approx(math.pi * (1 + bessel_j0_prime_zero(1) ** 2))
    below = newton_solve(ProblemSpec(1.0, 0.95 * star, N, grid), np.full(grid.n, 0.95 * star / math.pi))
    above = newton_solve(ProblemSpec(1.0, 1.05 * star, N, grid), np.full(grid.n, 1.05 * star / math.pi))
    assert below.stability_index == 0
    assert above.stability_index == 1


def test_nonconvergence_is_reported(grid):
    spec = ProblemSpec(1.0, 4 * math.pi, N, grid)
    with pytest.raises(ConvergenceError):
        newton_solve(spec, np.full(grid.n, 40.0) + 10 * grid.nodes, max_iter=2)


def test_bad_input_rejected(grid):
    spec = ProblemSpec(1.0, math.pi, N, grid)
    with pytest.raises(ValueError):
        newton_solve(spec, np.zeros(5))
    with pytest.raises(ValueError):
        ProblemSpec(-1.0, 1.0, N, grid)


def test_branch_properties(neumann_branch, lower_branch):
    star = bifurcation_lambda_star(1.0)
    for br in (neumann_branch, lower_branch):
        assert abs(br.bifurcation_lambda - star) / star < 0.01
        assert len(br.points) > 10
        lams = br.lambdas
        assert lams.min() > 8 * math.pi
        for sol in br.solutions:
            assert sol.residual_norm <= sol.tol
            assert sol.sup_dev > 1e-3
    assert neumann_branch.lambdas[-1] > 150
    assert lower_branch.lambdas[-1] < neumann_branch.bifurcation_lambda
    assert neumann_branch.csv_rows()[0].count(",") == 5


def test_constant_scan_records_stability_loss(neumann_branch):
    idx = [i for _, i in neumann_branch.constant_scan]
    assert idx[0] == 0 and idx[-1] >= 1


def test_dirichlet_branch_from_zero():
    g = build_radial_grid(101)
    br = continue_branch(ProblemSpec(1.0, 0.0, D, g), (0.0, 7 * math.pi), ds=1.0)
    lams = br.lambdas
    assert lams[-1] > 0.9 * 7 * math.pi or br.reason
    u0 = np.array([p.u0 for p in br.points])
    assert np.all(np.diff(u0) > 0)  # u(0) grows with lambda below 8 pi


def test_random_starts_reproducible(grid):
    spec = ProblemSpec(1.0, math.pi, D, grid)
    a, b = random_starts(spec, 5, 11), random_starts(spec, 5, 11)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert all(x[-1] == 0.0 for x in a)


def test_census_small(grid):
    rep = multistart_census(ProblemSpec(1.0, 2 * math.pi, N, grid), n_starts=6, seed=3)
    assert rep.distinct_count == 1
    assert not rep.failures
    assert np.abs(rep.representatives[0].u - 2.0).max() < 1e-9
