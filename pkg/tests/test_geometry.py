import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kslab.geometry import (
    RadialGrid,
    SymmetryGroup,
    bessel_j0_prime_zero,
    bessel_j0_zero,
    build_radial_grid,
    dirichlet_radial_eigenvalue,
    disc_isoperimetric_profile,
    g_profile_ratio_bound,
    lambda_threshold,
    neumann_radial_eigenvalue,
)

# first zeros of J0' and J0 (standard tables, 10+ digits)
J0P_ZEROS = [3.8317059702075123, 7.0155866698156187, 10.173468135062722]
J0_ZEROS = [2.4048255576957728, 5.5200781102863106, 8.6537279129110122]


@pytest.mark.parametrize("n", [16, 51, 201, 1000])
def test_weights_sum_to_disc_area(n):
    g = build_radial_grid(n)
    assert math.isclose(g.weights.sum(), math.pi, rel_tol=1e-14)
    assert g.integrate(np.ones(n)) == pytest.approx(math.pi, rel=1e-14)


def test_centre_weight_is_half_cell_disc():
    g = build_radial_grid(101)
    h = g.nodes[1]
    assert g.weights[0] == pytest.approx(math.pi * h * h / 4, rel=1e-14)


def test_quadrature_second_order():
    errs = []
    for n in (101, 201, 401):
        g = build_radial_grid(n)
        errs.append(abs(g.integrate(g.nodes**2) - math.pi / 2))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)


def test_laplacian_kills_constants_and_conserves():
    g = build_radial_grid(201, cluster=0.5)
    assert np.abs(g.laplacian(np.full(g.n, 3.7))).max() == 0.0
    u = np.cos(3 * g.nodes)
    assert abs(g.integrate(g.laplacian(u))) < 1e-11


def test_laplacian_matches_bands():
    g = build_radial_grid(64)
    lo, d, up = g.laplacian_bands()
    u = np.sin(g.nodes) + g.nodes**3
    banded = d * u
    banded[1:] += lo[1:] * u[:-1]
    banded[:-1] += up[:-1] * u[1:]
    assert np.allclose(banded, g.laplacian(u), rtol=1e-10, atol=1e-8)


def test_laplacian_of_r_squared():
    g = build_radial_grid(201)
    lap = g.laplacian(g.nodes**2)
    assert np.allclose(lap[:-1], 4.0, atol=1e-9)


def test_summation_by_parts():
    g = build_radial_grid(80)
    rng = np.random.default_rng(2)
    u, v = rng.normal(size=80), rng.normal(size=80)
    lhs = g.integrate(v * g.laplacian(u))
    rhs = -np.dot(g.face_conductance(), np.diff(u) * np.diff(v))
    assert lhs == pytest.approx(rhs, rel=1e-12)
    assert g.dirichlet_energy(u) == pytest.approx(-g.integrate(u * g.laplacian(u)), rel=1e-12)


def test_grid_validation():
    with pytest.raises(ValueError):
        build_radial_grid(8)
    with pytest.raises(ValueError):
        build_radial_grid(50, R=0.0)
    with pytest.raises(ValueError):
        RadialGrid(np.linspace(0.1, 1, 20))


def test_clustered_grid_refines_towards_boundary():
    g = build_radial_grid(101, cluster=0.8)
    h = np.diff(g.nodes)
    assert h[-1] < h[0]
    assert g.nodes[-1] == 1.0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_bessel_roots(k):
    assert bessel_j0_prime_zero(k) == pytest.approx(J0P_ZEROS[k - 1], abs=1e-12)
    assert bessel_j0_zero(k) == pytest.approx(J0_ZEROS[k - 1], abs=1e-12)


def test_first_j0_prime_zero_matches_quoted_value():
    assert abs(bessel_j0_prime_zero(1) - 3.8317059702) < 1e-10


def test_radial_eigenvalues_scale_with_radius():
    assert neumann_radial_eigenvalue(1, 2.0) == pytest.approx(J0P_ZEROS[0] ** 2 / 4)
    assert dirichlet_radial_eigenvalue(1) == pytest.approx(J0_ZEROS[0] ** 2)


def test_isoperimetric_profile_examples():
    assert disc_isoperimetric_profile(math.pi / 2) == pytest.approx(2.0, abs=1e-12)
    assert disc_isoperimetric_profile(0.0) == 0.0
    assert disc_isoperimetric_profile(math.pi) == 0.0
    # small caps are half-discs about a boundary point: I(s) ~ sqrt(2 pi s)
    s = 1e-6
    assert disc_isoperimetric_profile(s) == pytest.approx(math.sqrt(2 * math.pi * s), rel=1e-3)
    with pytest.raises(ValueError):
        disc_isoperimetric_profile(4.0)


def test_isoperimetric_profile_scales():
    R = 2.5
    for s in (0.3, 1.0, 1.5):
        assert disc_isoperimetric_profile(s * R * R, R) == pytest.approx(
            R * disc_isoperimetric_profile(s), rel=1e-12
        )


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, math.pi - 0.01))
def test_profile_symmetric_and_below_diameter(s):
    a = disc_isoperimetric_profile(s)
    assert a == pytest.approx(disc_isoperimetric_profile(math.pi - s), rel=1e-9)
    assert 0 < a <= 2.0 + 1e-12


def test_profile_against_geometric_construction():
    # circle of radius rho centred at distance d = sqrt(1 + rho^2): area of the lens
    rho = 0.7
    d = math.hypot(1.0, rho)
    alpha = math.atan(1.0 / rho)  # half-angle at the arc centre
    beta = math.atan(rho)  # half-angle at the disc centre
    area = alpha * rho**2 + beta - rho  # two sectors minus the kite 2*(rho*1/2)
    arc = 2 * alpha * rho
    assert d > 1
    assert disc_isoperimetric_profile(area) == pytest.approx(arc, rel=1e-10)


def test_thresholds():
    assert lambda_threshold(2) == 64 / math.pi
    for m in range(3, 11):
        assert lambda_threshold(m) == 8 * math.pi
    with pytest.raises(ValueError):
        lambda_threshold(1)


@pytest.mark.parametrize("m", range(2, 11))
def test_g_profile_bound(m):
    assert g_profile_ratio_bound(m) == min(4.0, 16 * m / math.pi**2)


def test_symmetry_group():
    assert SymmetryGroup.rotation(3).m == 3
    with pytest.raises(ValueError):
        SymmetryGroup.rotation(1)
