import math
import warnings

import numpy as np
import pytest

from kslab.energy import (
    constant_energy,
    directional_derivative_fd,
    energy_report,
    evaluate_J,
    gradient_J,
    minimize_J,
    random_initial_fields,
)
from kslab.steady import BoundaryCondition, ConvergenceError, ProblemSpec, newton_solve


def test_constant_closed_form(grid):
    assert evaluate_J(grid, np.ones(grid.n), math.pi, 1.0) == pytest.approx(
        math.pi / 2 - math.pi * (1 + math.log(math.pi)), rel=1e-13
    )
    for c in (-2.0, 0.3, 7.0):
        assert evaluate_J(grid, np.full(grid.n, c), 5.0, 2.0) == pytest.approx(
            constant_energy(c, 5.0, 2.0), rel=1e-12, abs=1e-12
        )


def test_large_fields_do_not_overflow(grid):
    assert np.isfinite(evaluate_J(grid, np.full(grid.n, 800.0), 1.0, 1.0))


def test_gradient_vanishes_at_constant_equilibrium(grid):
    lam = 4 * math.pi
    g = gradient_J(grid, np.full(grid.n, lam / math.pi), lam, 1.0)
    assert np.abs(g).max() <= 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_gradient_matches_finite_differences(grid, seed):
    rng = np.random.default_rng(seed)
    u = rng.normal(size=grid.n)
    d = rng.normal(size=grid.n)
    an = grid.integrate(gradient_J(grid, u, 4 * math.pi, 1.0) * d)
    fd = directional_derivative_fd(grid, u, d, 4 * math.pi, 1.0, step=1e-6)
    assert abs(an - fd) <= 1e-5 * abs(fd)


def test_gradient_small_on_branch_solutions(branch_samples):
    for sol in branch_samples:
        rep = energy_report(sol.spec.grid, sol.u, sol.lam, sol.spec.beta)
        assert rep.grad_sup <= 1e-6


@pytest.mark.parametrize("lam", [math.pi, 4 * math.pi, 0.99 * 8 * math.pi])
def test_minimizers_are_constant(grid, lam):
    c = lam / math.pi
    for u0 in random_initial_fields(grid, lam, 1.0, 10, seed=5):
        res = minimize_J(grid, lam, 1.0, m=3, init=u0)
        assert np.abs(res.u - c).max() <= 1e-6
        J = np.array([j for _, j, _ in res.log])
        assert np.all(np.diff(J) <= 1e-13 * np.abs(J[1:]).max())
        assert res.value == pytest.approx(constant_energy(c, lam, 1.0), abs=1e-8)


def test_m2_regime(grid):
    res = minimize_J(grid, 6.0, 1.0, m=2, init=random_initial_fields(grid, 6.0, 1.0, 1, 0)[0])
    assert np.abs(res.u - 6 / math.pi).max() <= 1e-6


def test_zero_lambda(grid):
    res = minimize_J(grid, 0.0, 2.0, init=np.cos(grid.nodes))
    assert np.abs(res.u).max() <= 1e-8


def test_supercritical_warns(grid):
    with pytest.warns(RuntimeWarning):
        minimize_J(grid, 30.0, 1.0, init=np.full(grid.n, 30 / math.pi), max_iter=3)


def test_stagnation_raises(grid):
    with pytest.raises(ConvergenceError):
        minimize_J(grid, 4 * math.pi, 1.0, init=np.cos(5 * grid.nodes), max_iter=1)


def test_invalid_symmetry(grid):
    with pytest.raises(ValueError):
        minimize_J(grid, 1.0, 1.0, m=1)


def test_critical_points_agree_with_newton(grid):
    spec = ProblemSpec(1.0, 4 * math.pi, BoundaryCondition.NEUMANN, grid)
    sol = newton_solve(spec, np.full(grid.n, 4.3))
    assert np.abs(gradient_J(grid, sol.u, spec.lam, 1.0)).max() <= 1e-8


def test_descent_log_csv(grid):
    res = minimize_J(grid, math.pi, 1.0, init=np.cos(grid.nodes))
    rows = res.csv_rows()
    assert rows[0].startswith("0,") and len(rows) == res.iterations + 1
