"""Liouville bubbles, Bol's inequality and equimeasurable rearrangement for radial fields.

The bubble ``U_theta(r) = -2 log(1 + theta^2 r^2 / 8) + 2 log theta`` solves
``Delta U + e^U = 0`` on the plane with total mass 8 pi.  Radial fields are
either callables ``r -> value`` (integrated with adaptive quadrature) or nodal
arrays on a :class:`RadialGrid` (piecewise linear in ``r``).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .geometry import RadialGrid

EIGHT_PI = 8.0 * math.pi
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(8)


def _check_theta(theta):
    if not np.all(np.asarray(theta) > 0):
        raise ValueError(f"theta must be positive, got {theta}")


def bubble_value(theta, r):
    _check_theta(theta)
    r = np.asarray(r, float)
    if np.any(r < 0):
        raise ValueError("r must be nonnegative")
    return -2.0 * np.log1p(theta**2 * r**2 / 8.0) + 2.0 * np.log(theta)


def bubble_derivative(theta, r):
    """``dU_theta/dr``."""
    r = np.asarray(r, float)
    return -0.5 * theta**2 * r / (1.0 + theta**2 * r**2 / 8.0)


def bubble_mass(theta, r=math.inf):
    """``int_{B_r} e^{U_theta}`` in closed form; 8 pi for ``r = inf``."""
    _check_theta(theta)
    if np.isscalar(r) and math.isinf(r):
        return EIGHT_PI
    r = np.asarray(r, float)
    s = theta**2 * r**2 / 8.0
    out = EIGHT_PI * s / (1.0 + s)
    return np.where(np.isinf(r), EIGHT_PI, out) if out.ndim else float(out)


def bubble_mass_quadrature(theta, r=math.inf) -> float:
    """Adaptive-quadrature oracle for :func:`bubble_mass`."""
    _check_theta(theta)
    f = lambda rho: 2.0 * math.pi * rho * math.exp(float(bubble_value(theta, rho)))
    if math.isinf(r):
        # split at the bubble scale so the infinite tail is well resolved
        scale = math.sqrt(8.0) / theta
        a, _ = quad(f, 0.0, scale, epsabs=0, epsrel=1e-13, limit=200)
        b, _ = quad(f, scale, math.inf, epsabs=0, epsrel=1e-13, limit=200)
        return a + b
    val, _ = quad(f, 0.0, r, epsabs=0, epsrel=1e-13, limit=200)
    return val


def bubble_radius_for_mass(theta, mass):
    """Radius of the ball carrying ``mass`` of ``e^{U_theta}``; inverse of :func:`bubble_mass`."""
    _check_theta(theta)
    mass = np.asarray(mass, float)
    if np.any(mass < 0) or np.any(mass >= EIGHT_PI):
        raise ValueError("bubble cannot hold mass outside [0, 8 pi)")
    s = mass / (EIGHT_PI - mass)
    out = np.sqrt(8.0 * s) / theta
    return out if out.ndim else float(out)


def theta_for_mass(mass, r: float = 1.0) -> float:
    """``theta`` with ``bubble_mass(theta, r) = mass``."""
    if not 0 < mass < EIGHT_PI:
        raise ValueError("mass must lie in (0, 8 pi)")
    return math.sqrt(8.0 * mass / (EIGHT_PI - mass)) / r


def partner_theta(theta: float, R: float) -> float:
    """The other ``theta'`` with ``U_theta'(R) = U_theta(R)`` (``theta theta' R^2 = 8``)."""
    _check_theta(theta)
    return 8.0 / (theta * R * R)


def bubble_laplacian_residual(theta, grid: RadialGrid) -> float:
    """Max of ``|Delta U + e^U|`` over interior nodes of ``grid``, discrete Laplacian."""
    U = bubble_value(theta, grid.nodes)
    res = grid.laplacian(U) + np.exp(U)
    # last row is a zero-flux closure; the bubble has nonzero outward flux
    return float(np.abs(res[:-1]).max())


# ---------------------------------------------------------------------------
# radial fields given as nodal arrays


def _interp(grid: RadialGrid, values, r):
    return np.interp(r, grid.nodes, values)


def ball_integral_exp(grid: RadialGrid, w, r: float) -> float:
    """``int_{B_r} e^w`` for the piecewise-linear radial profile ``w``."""
    nodes = grid.nodes
    if not 0 <= r <= grid.R * (1 + 1e-14):
        raise ValueError("r outside the grid")
    edges = np.concatenate((nodes[nodes < r], [r]))
    a, b = edges[:-1], edges[1:]
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    rq = mid[:, None] + half[:, None] * _GAUSS_X
    vals = 2.0 * math.pi * rq * np.exp(_interp(grid, w, rq))
    return float(np.sum(half * (vals @ _GAUSS_W)))


def subsolution_defect(grid: RadialGrid, w) -> float:
    """Most negative value of the discrete ``Delta w + e^w`` over nodes off the boundary."""
    res = grid.laplacian(np.asarray(w, float)) + np.exp(w)
    return float(res[:-1].min())


def bol_deficit(w, r: float, grid: RadialGrid | None = None, tol: float = 1e-8) -> float:
    """``(int_{dB_r} e^{w/2})^2 - (1/2) m (8 pi - m)`` with ``m = int_{B_r} e^w``.

    ``w`` is a callable radial profile, or nodal values on ``grid``.  Bol's
    inequality makes this nonnegative when ``Delta w + e^w >= 0`` and
    ``m <= 8 pi``; it vanishes for bubbles.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if grid is None:
        val, _ = quad(lambda rho: 2.0 * math.pi * rho * math.exp(w(rho)), 0.0, r,
                      epsabs=0, epsrel=1e-13, limit=200)
        mass, w_r = val, float(w(r))
    else:
        w = np.asarray(w, float)
        defect = subsolution_defect(grid, w)
        if defect < -tol:
            warnings.warn(f"Delta w + e^w reaches {defect:.3e} < 0", RuntimeWarning)
        mass, w_r = ball_integral_exp(grid, w, r), float(_interp(grid, w, r))
    if mass > EIGHT_PI * (1 + 1e-12):
        raise ValueError(f"int e^w = {mass:.6g} exceeds 8 pi")
    boundary = 2.0 * math.pi * r * math.exp(0.5 * w_r)
    return boundary**2 - 0.5 * mass * (EIGHT_PI - mass)


def bubble_bol_sides(theta, r) -> tuple[float, float]:
    """Both sides of Bol's equality for ``U_theta``; each equals ``32 pi^2 s / (1+s)^2``."""
    lhs = (2.0 * math.pi * r * math.exp(0.5 * float(bubble_value(theta, r)))) ** 2
    m = bubble_mass(theta, r)
    return lhs, 0.5 * m * (EIGHT_PI - m)


# ---------------------------------------------------------------------------
# rearrangement


@dataclass
class RearrangedField:
    """Step profile ``phi*`` on the ball: value ``levels[k]`` on ``radii[k-1] < r <= radii[k]``.

    ``levels`` is decreasing, so ``phi*`` is nonincreasing in ``r`` and
    ``{phi* > t}`` is the ball of radius ``radii[#levels > t - 1]``.
    """

    grid: RadialGrid
    phi: np.ndarray
    v1: np.ndarray
    theta: float
    levels: np.ndarray
    radii: np.ndarray
    source_mass: float

    @property
    def outer_radius(self) -> float:
        return float(self.radii[-1])

    def mass_above_source(self, t):
        """``int_{phi > t} e^{v1}`` from the discrete measure."""
        w = self.grid.weights * np.exp(self.v1)
        t = np.atleast_1d(np.asarray(t, float))
        return np.array([math.fsum(w[self.phi > x]) for x in t])

    def mass_above_star(self, t):
        """``int_{phi* > t} e^{U_theta}``."""
        t = np.atleast_1d(np.asarray(t, float))
        k = np.searchsorted(-self.levels, -t, side="left")  # number of levels > t
        rad = np.where(k > 0, self.radii[np.maximum(k - 1, 0)], 0.0)
        return bubble_mass(self.theta, rad)

    def equimeasurability_residuals(self, thresholds):
        t = np.asarray(thresholds, float)
        return np.abs(self.mass_above_star(t) - self.mass_above_source(t))

    def profile(self, r):
        """Nodal ``phi*`` at radii ``r`` (in ``[0, outer_radius]``)."""
        r = np.asarray(r, float)
        k = np.searchsorted(self.radii, r, side="left")
        return self.levels[np.minimum(k, self.levels.size - 1)]


def rearrange_equimeasurable(grid: RadialGrid, phi, v1, theta: float) -> RearrangedField:
    """Rearrange ``phi`` from the measure ``e^{v1} dx`` to ``e^{U_theta} dx``.

    The super-level set ``{phi >= s}`` of each nodal value ``s`` maps to the
    centred ball with the same bubble mass, found by inverting
    :func:`bubble_mass`.
    """
    _check_theta(theta)
    phi = np.asarray(phi, float)
    v1 = np.asarray(v1, float)
    w = grid.weights * np.exp(v1)
    total = math.fsum(w)
    if total >= EIGHT_PI:
        raise ValueError(f"source mass {total:.6g} >= 8 pi: the bubble cannot hold it")
    levels = np.unique(phi)[::-1]
    order = np.argsort(-phi, kind="stable")
    # mass of {phi >= level}: last position holding that level in descending order
    last = np.searchsorted(-phi[order], -levels, side="right") - 1
    w_sorted = w[order]
    masses = np.array([math.fsum(w_sorted[: j + 1]) for j in last])
    radii = bubble_radius_for_mass(theta, masses)
    return RearrangedField(grid, phi, v1, theta, levels, np.atleast_1d(radii), total)


def _level_crossings(grid: RadialGrid, phi, t: float):
    """Radii where the piecewise-linear ``phi`` equals ``t`` and the slope there."""
    r = grid.nodes
    a, b = phi[:-1], phi[1:]
    hit = (np.minimum(a, b) < t) & (t < np.maximum(a, b))
    slope = (b - a) / np.diff(r)
    rc = r[:-1][hit] + (t - a[hit]) / slope[hit]
    return rc, slope[hit]


def _regular_values(grid, phi, count):
    lo, hi = float(phi.min()), float(phi.max())
    t = np.linspace(lo, hi, count + 2)[1:-1]
    vals = np.unique(phi)
    gap = 1e-9 * max(1.0, hi - lo)
    keep = np.array([np.abs(vals - x).min() > gap for x in t])
    return t[keep]


@dataclass
class GradientComparison:
    t: np.ndarray
    star: np.ndarray  # int_{phi*=t} |grad phi*|
    source: np.ndarray  # int_{phi=t} |grad phi|
    boundary_value: float

    @property
    def interior(self) -> np.ndarray:
        # {phi > t} stays away from the boundary circle only above the boundary value
        return self.t > self.boundary_value

    @property
    def margins(self) -> np.ndarray:
        return self.source - self.star

    @property
    def worst_relative(self) -> float:
        sel = self.interior
        return float((self.margins[sel] / self.source[sel]).min()) if sel.any() else math.nan

    def holds(self, rtol: float = 1e-6) -> bool:
        """Comparison at every sampled level whose super-level set avoids the boundary."""
        sel = self.interior
        return bool(sel.any() and np.all(self.margins[sel] >= -rtol * self.source[sel]))


def gradient_comparison(
    grid: RadialGrid, phi, v1, theta: float, count: int = 100
) -> GradientComparison:
    """Compare ``int_{phi*=t}|grad phi*|`` with ``int_{phi=t}|grad phi|`` at regular values.

    For the continuous rearrangement of the piecewise-linear ``phi`` the
    co-area formula gives, with ``rho(t)`` the radius of ``{phi* > t}``,

        int_{phi*=t} |grad phi*| = (2 pi rho)^2 e^{U(rho)} / sum_c 2 pi r_c e^{v1(r_c)} / |phi'(r_c)|.

    When ``phi`` is larger on the boundary than at some level ``t``, the set
    ``{phi > t}`` contains the boundary circle, whose contribution the level
    line alone does not carry; such levels are reported but excluded from
    :meth:`GradientComparison.holds`.
    """
    phi = np.asarray(phi, float)
    v1 = np.asarray(v1, float)
    ts = _regular_values(grid, phi, count)
    star, source, kept = [], [], []
    for t in ts:
        rc, slope = _level_crossings(grid, phi, t)
        if rc.size == 0:
            continue
        e_v1 = np.exp(_interp(grid, v1, rc))
        density = float(np.sum(2.0 * math.pi * rc * e_v1 / np.abs(slope)))
        # mass of {phi > t} under e^{v1}, piecewise-linear in r
        mass = _mass_above_linear(grid, phi, v1, t)
        rho = bubble_radius_for_mass(theta, mass)
        star.append((2.0 * math.pi * rho) ** 2 * math.exp(float(bubble_value(theta, rho))) / density)
        source.append(float(np.sum(2.0 * math.pi * rc * np.abs(slope))))
        kept.append(t)
    return GradientComparison(np.array(kept), np.array(star), np.array(source), float(phi[-1]))


def _mass_above_linear(grid, phi, v1, t):
    r = grid.nodes
    a, b = r[:-1], r[1:]
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    # split each segment at its crossing so the indicator is resolved exactly
    pa, pb = phi[:-1], phi[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        rc = np.where((np.minimum(pa, pb) < t) & (t < np.maximum(pa, pb)),
                      a + (t - pa) * (b - a) / (pb - pa), np.nan)
    total = 0.0
    for lo, hi in ((a, np.where(np.isnan(rc), b, rc)), (np.where(np.isnan(rc), b, rc), b)):
        half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
        rq = mid[:, None] + half[:, None] * _GAUSS_X
        inside = _interp(grid, phi, mid) > t
        vals = 2.0 * math.pi * rq * np.exp(_interp(grid, v1, rq))
        total += float(np.sum(np.where(inside, half * (vals @ _GAUSS_W), 0.0)))
    return total


# ---------------------------------------------------------------------------
# radial lemmas


@dataclass
class LemmaReport:
    mode: str
    applicable: bool
    conclusion: str
    margins: dict
    strict: bool = False

    def summary(self) -> str:
        tag = "PASS" if self.applicable and self.conclusion != "violated" else "INAPPLICABLE" \
            if not self.applicable else "FAIL"
        parts = " ".join(f"{k}={v:.6g}" for k, v in self.margins.items())
        return f"{tag} {self.mode}: {self.conclusion} {parts}"


def _derivative(psi, r, dpsi):
    if dpsi is not None:
        return np.array([dpsi(x) for x in r])
    h = 1e-6 * np.maximum(1.0, r)
    return np.array([(psi(x + e) - psi(x - e)) / (2 * e) for x, e in zip(r, h)])


def _ball_mass(psi, r):
    val, _ = quad(lambda rho: 2.0 * math.pi * rho * math.exp(psi(rho)), 0.0, r,
                  epsabs=0, epsrel=1e-12, limit=200)
    return val


def _outer_mass(psi, r):
    f = lambda rho: 2.0 * math.pi * rho * math.exp(psi(rho))
    a, _ = quad(f, r, 10.0 * r, epsabs=0, epsrel=1e-12, limit=200)
    b, _ = quad(f, 10.0 * r, math.inf, epsabs=1e-14, epsrel=1e-12, limit=200)
    return a + b


def check_radial_lemmas(
    psi,
    theta1: float,
    theta2: float | None,
    R: float,
    side: str = "inner",
    dpsi=None,
    samples: int = 200,
    tol: float = 1e-9,
) -> LemmaReport:
    """Check the hypotheses and report the conclusion of the radial bubble comparisons.

    ``side='inner'``: ``psi`` on ``B_R`` with ``2 pi r |psi'| <= int_{B_r} e^psi``
    and ``psi(R) = U_theta1(R) = U_theta2(R)``; reports which alternative
    ``M <= M_theta1`` or ``M >= M_theta2`` holds for the ball masses.
    ``side='outer'``: ``psi`` outside ``B_R`` with
    ``2 pi r |psi'| <= 8 pi - int_{|x|>r} e^psi``; reports the exterior-mass sandwich.
    ``side='boundary'``: ``theta1`` is matched by ball mass; checks ``U_theta1(R) <= psi(R)``.
    """
    _check_theta(theta1)
    if side not in ("inner", "outer", "boundary"):
        raise ValueError(f"unknown side {side!r}")
    if side == "outer":
        r = R * np.exp(np.linspace(1e-3, math.log(50.0), samples))
    else:
        r = np.linspace(R / samples, R * (1 - 1e-3), samples)
    d = _derivative(psi, r, dpsi)
    if np.any(d >= 0):
        return LemmaReport(side, False, "psi not strictly decreasing", {})
    if side == "outer":
        rhs = np.array([EIGHT_PI - _outer_mass(psi, x) for x in r])
    else:
        rhs = np.array([_ball_mass(psi, x) for x in r])
    lhs = 2.0 * math.pi * r * np.abs(d)
    slack = rhs - lhs
    scale = np.maximum(1.0, np.abs(rhs))
    if np.any(slack < -tol * scale):
        return LemmaReport(side, False, "gradient hypothesis fails",
                           {"worst_slack": float(slack.min())})
    strict = bool(np.any(slack > 1e3 * tol * scale))

    if side == "boundary":
        M = _ball_mass(psi, R)
        if M >= EIGHT_PI:
            return LemmaReport(side, False, "ball mass >= 8 pi", {"mass": M})
        theta = theta_for_mass(M, R)
        gap = float(psi(R)) - float(bubble_value(theta, R))
        concl = "U_theta(R) <= psi(R)" if gap >= -tol else "violated"
        return LemmaReport(side, True, concl, {"theta": theta, "psi_minus_U": gap}, strict)

    if theta2 is None:
        theta2 = partner_theta(theta1, R)
    t1, t2 = sorted((theta1, theta2))
    bval = float(psi(R))
    for th in (t1, t2):
        if abs(float(bubble_value(th, R)) - bval) > 1e-8 * max(1.0, abs(bval)):
            return LemmaReport(side, False, "boundary values do not match", {"theta": th})
    if side == "inner":
        M = _ball_mass(psi, R)
        m1, m2 = bubble_mass(t1, R), bubble_mass(t2, R)
        margins = {"mass": M, "below_theta1": m1 - M, "above_theta2": M - m2}
        if M <= m1 + tol * m1:
            concl = "mass <= M(theta1)"
        elif M >= m2 - tol * m2:
            concl = "mass >= M(theta2)"
        else:
            concl = "violated"
        return LemmaReport(side, True, concl, margins, strict)
    M = _outer_mass(psi, R)
    m1 = EIGHT_PI - bubble_mass(t1, R)
    m2 = EIGHT_PI - bubble_mass(t2, R)
    margins = {"outer_mass": M, "above_theta2": M - m2, "below_theta1": m1 - M}
    ok = M >= m2 - tol * m2 and M <= m1 + tol * m1
    return LemmaReport(side, True, "sandwich holds" if ok else "violated", margins, strict)
