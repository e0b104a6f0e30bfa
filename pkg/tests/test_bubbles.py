import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kslab.bubbles import (
    EIGHT_PI,
    ball_integral_exp,
    bol_deficit,
    bubble_bol_sides,
    bubble_laplacian_residual,
    bubble_mass,
    bubble_mass_quadrature,
    bubble_radius_for_mass,
    bubble_value,
    check_radial_lemmas,
    gradient_comparison,
    partner_theta,
    rearrange_equimeasurable,
    theta_for_mass,
)
from kslab.cli import dirichlet_pair
from kslab.geometry import build_radial_grid

THETAS = (0.5, math.sqrt(8.0), 10.0)
RADII = (0.1, 0.5, 1.0, 2.0, 10.0)


def test_bubble_value_examples():
    assert bubble_value(3.0, 0.0) == pytest.approx(2 * math.log(3.0))
    assert bubble_value(math.sqrt(8), 1.0) == pytest.approx(math.log(2.0), abs=1e-15)


def test_bubble_mass_examples():
    assert bubble_mass(2.0) == EIGHT_PI
    assert bubble_mass(math.sqrt(8), 1.0) == pytest.approx(4 * math.pi, rel=1e-15)
    assert bubble_mass(1.0, 1e-9) < 1e-16


@pytest.mark.parametrize("theta", THETAS)
def test_bubble_mass_against_quadrature(theta):
    assert abs(bubble_mass(theta) - bubble_mass_quadrature(theta)) <= 1e-10
    for r in RADII:
        assert abs(bubble_mass(theta, r) - bubble_mass_quadrature(theta, r)) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 20.0), st.floats(0.01, 30.0))
def test_bubble_mass_monotone_and_invertible(theta, r):
    m = bubble_mass(theta, r)
    assert 0 < m < EIGHT_PI
    assert bubble_mass(theta, 1.01 * r) > m
    assert bubble_radius_for_mass(theta, m) == pytest.approx(r, rel=1e-9)


@pytest.mark.parametrize("theta", THETAS)
@pytest.mark.parametrize("r", RADII)
def test_bol_equality_for_bubbles(theta, r):
    d = bol_deficit(lambda x: float(bubble_value(theta, x)), r)
    assert abs(d) <= 1e-8
    lhs, rhs = bubble_bol_sides(theta, r)
    s = theta**2 * r**2 / 8
    closed = 32 * math.pi**2 * s / (1 + s) ** 2
    assert lhs == pytest.approx(closed, rel=1e-12)
    assert rhs == pytest.approx(closed, rel=1e-12)


def test_bubble_laplacian_residual_converges():
    res = [bubble_laplacian_residual(2.0, build_radial_grid(n)) for n in (101, 201, 401)]
    assert res[0] / res[1] == pytest.approx(4, rel=0.05)
    assert res[1] / res[2] == pytest.approx(4, rel=0.05)


def test_bol_rejects_supercritical_mass():
    with pytest.raises(ValueError):
        bol_deficit(lambda x: 5.0, 1.0)


def test_bol_warns_for_non_subsolution():
    g = build_radial_grid(101)
    w = 3 * g.nodes**2 - 4  # Delta w = 12 dominates; use the negative to break it
    with pytest.warns(RuntimeWarning):
        bol_deficit(-w - 10 * g.nodes**2, 0.5, grid=g)


@pytest.fixture(scope="module")
def pair():
    g = build_radial_grid(201)
    v_base, v_cmp = dirichlet_pair(g, 4 * math.pi, 5.0, 1.0)
    return g, v_base, v_cmp


def test_bol_strict_for_dirichlet_solution(pair):
    g, v_base, _ = pair
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for r in (0.3, 0.6, 1.0):
            assert bol_deficit(v_base, r, grid=g) > 0


def test_shifted_field_carries_lambda(pair):
    g, v_base, v_cmp = pair
    for v in (v_base, v_cmp):
        assert ball_integral_exp(g, v, 1.0) == pytest.approx(4 * math.pi, rel=1e-4)
        assert g.integrate(np.exp(v)) == pytest.approx(4 * math.pi, rel=1e-12)


def test_rearrangement_equimeasurable(pair):
    g, v_base, v_cmp = pair
    phi = v_cmp - v_base
    theta = theta_for_mass(g.integrate(np.exp(v_base)))
    rf = rearrange_equimeasurable(g, phi, v_base, theta)
    ts = np.linspace(phi.min(), phi.max(), 102)[1:-1]
    assert rf.equimeasurability_residuals(ts).max() <= 1e-6
    assert np.all(np.diff(rf.levels) < 0)
    prof = rf.profile(np.linspace(0, rf.outer_radius, 300))
    assert np.all(np.diff(prof) <= 0)
    assert rf.outer_radius == pytest.approx(1.0, abs=1e-12)
    assert bubble_mass(theta, rf.outer_radius) == pytest.approx(rf.source_mass, rel=1e-8)


def test_rearrange_constant():
    g = build_radial_grid(64)
    v1 = np.full(g.n, math.log(2.0))
    rf = rearrange_equimeasurable(g, np.full(g.n, 3.0), v1, 1.0)
    assert rf.levels.tolist() == [3.0]
    assert bubble_mass(1.0, rf.outer_radius) == pytest.approx(2 * math.pi, rel=1e-12)


def test_rearrange_rejects_excess_mass():
    g = build_radial_grid(64)
    with pytest.raises(ValueError):
        rearrange_equimeasurable(g, g.nodes, np.full(g.n, 3.0), 1.0)


def test_gradient_comparison(pair):
    g, v_base, v_cmp = pair
    phi = v_cmp - v_base
    theta = theta_for_mass(g.integrate(np.exp(v_base)))
    gc = gradient_comparison(g, phi, v_base, theta)
    assert gc.t.size >= 90
    assert gc.interior.all()
    assert gc.holds()


def test_gradient_comparison_boundary_levels_excluded(pair):
    g, v_base, v_cmp = pair
    # reversed roles: phi is largest on the boundary, every super-level set touches it
    phi = v_base - v_cmp
    gc = gradient_comparison(g, phi, v_cmp, theta_for_mass(g.integrate(np.exp(v_cmp))))
    assert not gc.interior.any()
    assert not gc.holds()


def test_partner_theta():
    t1 = 1.5
    t2 = partner_theta(t1, 1.0)
    assert bubble_value(t1, 1.0) == pytest.approx(bubble_value(t2, 1.0), rel=1e-14)


@pytest.mark.parametrize("which", [0, 1])
def test_lemmas_saturated_by_bubbles(which):
    t1 = 1.5
    t2 = partner_theta(t1, 1.0)
    th = (t1, t2)[which]
    psi = lambda r: float(bubble_value(th, r))
    inner = check_radial_lemmas(psi, t1, t2, 1.0, "inner")
    assert inner.applicable
    assert inner.conclusion == ("mass <= M(theta1)" if which == 0 else "mass >= M(theta2)")
    margin = inner.margins["below_theta1" if which == 0 else "above_theta2"]
    assert abs(margin) < 1e-9
    outer = check_radial_lemmas(psi, t1, t2, 1.0, "outer")
    assert outer.applicable and outer.conclusion == "sandwich holds"


def test_lemma_strict_for_perturbed_bubble():
    t1, c = 1.5, 0.05  # theta^2 R^2 < 4 keeps the gradient hypothesis
    psi = lambda r: float(bubble_value(t1, r)) - c * (1 - r * r)
    rep = check_radial_lemmas(psi, t1, None, 1.0, "inner")
    assert rep.applicable and rep.strict
    assert rep.conclusion == "mass <= M(theta1)"
    assert rep.margins["below_theta1"] > 1e-3


def test_lemma_boundary_comparison():
    psi = lambda r: float(bubble_value(1.5, r)) - 0.05 * (1 - r * r)
    rep = check_radial_lemmas(psi, 1.0, None, 1.0, "boundary")
    assert rep.applicable and rep.conclusion == "U_theta(R) <= psi(R)"
    assert rep.margins["psi_minus_U"] > 0


def test_lemma_inapplicable_when_increasing():
    rep = check_radial_lemmas(lambda r: r, 1.0, None, 1.0, "inner")
    assert not rep.applicable
    assert "INAPPLICABLE" in rep.summary()


def test_theta_for_mass_inverts():
    th = theta_for_mass(5.0, 2.0)
    assert bubble_mass(th, 2.0) == pytest.approx(5.0, rel=1e-14)
    with pytest.raises(ValueError):
        theta_for_mass(EIGHT_PI)
