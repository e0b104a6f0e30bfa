"""Level-set distribution functions of radial fields and the inequalities built on them.

For a field ``u`` with nonlinearities ``f(t) = lam e^t / int e^u`` and
``g(t) = beta t`` the tables hold

    mu(t) = |{u > t}|,   F(t) = int_{u>t} f(u),   G(t) = int_{u>t} g(u)

and their lower counterparts over ``{u < t}``.  Everything is computed from
the discrete measure (nodal values with quadrature weights) by sorting, never
by differentiating ``mu``.  Partial sums are exactly rounded (``math.fsum``),
so a table entry equals the direct masked sum bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .geometry import RadialGrid, disc_isoperimetric_profile, g_profile_ratio_bound
from .steady import InvariantError, SteadySolution, log_integral_exp

PLATEAU_TOL = 1e-13
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(6)


@dataclass
class NonlinearityPair:
    """``f(t) = lam e^t / int e^u`` with the normalisation frozen from ``u``, ``g(t) = beta t``."""

    lam: float
    beta: float
    log_norm: float
    A_f: float
    A_g: float

    @classmethod
    def from_field(cls, grid: RadialGrid, u, lam: float, beta: float) -> "NonlinearityPair":
        u = np.asarray(u, float)
        log_norm = log_integral_exp(grid, u)
        f_u = lam * np.exp(u - log_norm)
        return cls(lam, beta, log_norm, grid.mean(f_u), beta * grid.mean(u))

    def f(self, t):
        return self.lam * np.exp(np.asarray(t, float) - self.log_norm)

    fprime = f

    def g(self, t):
        return self.beta * np.asarray(t, float)

    def integral_f(self, a, b):
        """``int_a^b f`` for arrays ``a <= b``, without cancellation."""
        a = np.asarray(a, float)
        return self.lam * np.exp(a - self.log_norm) * np.expm1(np.asarray(b, float) - a)


def crossing_set(pair: NonlinearityPair, tangent_tol: float = 1e-12) -> list[float]:
    """Nonnegative roots of ``f(t) = g(t)``.

    ``f - g`` is convex, so there are at most two; a root where the minimum
    of ``f - g`` touches zero (within ``tangent_tol``) is returned once.
    Raises InvariantError if there is none: solutions always have one.
    """
    beta = pair.beta
    h = lambda t: float(pair.f(t)) - beta * t
    c = pair.lam * math.exp(-pair.log_norm)
    if c <= 0:
        raise InvariantError("f vanishes identically")
    t_min = math.log(beta / c)  # where f' = g'
    if t_min <= 0:
        raise InvariantError("f > g on [0, inf): no crossing")
    h_min = h(t_min)
    if abs(h_min) <= tangent_tol * max(1.0, beta * t_min):
        return [t_min]
    if h_min > 0:
        raise InvariantError(f"f > g on [0, inf) (min gap {h_min:.3e}): no crossing")
    roots = [brentq(h, 0.0, t_min, xtol=1e-15, rtol=1e-15)]
    hi = 2.0 * t_min + 1.0
    while h(hi) <= 0:
        hi *= 2.0
    roots.append(brentq(h, t_min, hi, xtol=1e-15, rtol=1e-15))
    return roots


class DiscreteMeasure:
    """Sorted nodal values with exactly rounded prefix/suffix sums of weighted data."""

    def __init__(self, values, weights, **densities):
        values = np.asarray(values, float)
        order = np.argsort(values, kind="stable")
        self.values = values[order]
        self.weights = np.asarray(weights, float)[order]
        self._parts = {"mu": self.weights}
        for name, dens in densities.items():
            self._parts[name] = np.asarray(dens, float)[order] * self.weights
        self._suffix = {k: self._cumulative(v[::-1])[::-1] for k, v in self._parts.items()}
        self._prefix = {k: self._cumulative(v) for k, v in self._parts.items()}

    @staticmethod
    def _cumulative(x):
        # out[k] = fsum(x[:k]) for k = 0..len(x)
        return np.array([math.fsum(x[:k]) for k in range(x.size + 1)])

    def above(self, name: str, t):
        """``sum over {u > t}`` of the named weighted density."""
        idx = np.searchsorted(self.values, t, side="right")
        suffix = self._suffix[name]  # suffix[k] = fsum(x[k:]) after reversal
        return suffix[idx]

    def below(self, name: str, t):
        """``sum over {u < t}``."""
        idx = np.searchsorted(self.values, t, side="left")
        return self._prefix[name][idx]


@dataclass
class LevelSetTable:
    t: np.ndarray
    mu: np.ndarray
    mu_t: np.ndarray
    F: np.ndarray
    Ft: np.ndarray
    G: np.ndarray
    Gt: np.ndarray
    Psi: np.ndarray
    Psit: np.ndarray
    pair: NonlinearityPair
    grid: RadialGrid
    u: np.ndarray
    measure: DiscreteMeasure = field(repr=False)
    trivial: bool = False

    CSV_HEADER = "t,mu,mu_t,F,Ft,G,Gt,Psi,Psit"

    @property
    def t0(self) -> float:
        return float(self.u.min())

    @property
    def t1(self) -> float:
        return float(self.u.max())

    @property
    def F_total(self) -> float:
        return float(self.measure.above("F", -math.inf))

    def csv_rows(self) -> list[str]:
        cols = (self.t, self.mu, self.mu_t, self.F, self.Ft, self.G, self.Gt, self.Psi, self.Psit)
        return [",".join(f"{x:.17g}" for x in row) for row in zip(*cols)]


def _measure(grid, u, pair):
    return DiscreteMeasure(u, grid.weights, F=pair.f(u), G=pair.g(u))


def build_table(
    grid: RadialGrid, u, lam: float, beta: float, n_levels: int = 256
) -> LevelSetTable:
    """Sample the distribution functions at ``n_levels`` thresholds from min u to max u.

    A constant field (range <= 1e-10) yields a table with ``trivial=True``
    and empty arrays.
    """
    if n_levels < 64:
        raise ValueError("n_levels must be >= 64")
    u = np.asarray(u, float)
    pair = NonlinearityPair.from_field(grid, u, lam, beta)
    m = _measure(grid, u, pair)
    if np.ptp(u) <= 1e-10:
        empty = np.empty(0)
        return LevelSetTable(*([empty] * 9), pair, grid, u, m, trivial=True)
    t = np.linspace(u.min(), u.max(), n_levels)
    mu, mu_t = m.above("mu", t), m.below("mu", t)
    F, Ft = m.above("F", t), m.below("F", t)
    G, Gt = m.above("G", t), m.below("G", t)
    ft = pair.f(t)
    Psi = pair.A_g * ft * mu**2 - F**2
    Psit = pair.A_g * ft * mu_t**2 - Ft**2
    return LevelSetTable(t, mu, mu_t, F, Ft, G, Gt, Psi, Psit, pair, grid, u, m)


def table_for(sol: SteadySolution, n_levels: int = 256) -> LevelSetTable:
    spec = sol.spec
    return build_table(spec.grid, sol.u, spec.lam, spec.beta, n_levels)


@dataclass
class MeanValueReport:
    A_h: float
    upper_margin: float  # min over t of int_{u>t} h - A_h mu(t)
    lower_margin: float  # min over t of A_h mu~(t) - int_{u<t} h

    def holds(self, tol: float = 1e-12) -> bool:
        return self.upper_margin >= -tol and self.lower_margin >= -tol


def mean_value(grid: RadialGrid, u, h, thresholds=None) -> MeanValueReport:
    """Mean ``A_h`` of ``h(u)`` and the two super/sub-level comparisons.

    ``h`` must be nondecreasing on the range of ``u``.
    """
    u = np.asarray(u, float)
    hv = np.asarray(h(u), float)
    srt = np.argsort(u, kind="stable")
    step = np.diff(hv[srt])
    if np.any(step < -1e-14 * max(1.0, float(np.abs(hv).max()))):
        raise ValueError("h is not nondecreasing on the range of u")
    A_h = grid.mean(hv)
    m = DiscreteMeasure(u, grid.weights, H=hv)
    t = np.linspace(u.min(), u.max(), 257) if thresholds is None else np.asarray(thresholds)
    upper = m.above("H", t) - A_h * m.above("mu", t)
    lower = A_h * m.below("mu", t) - m.below("H", t)
    return MeanValueReport(A_h, float(upper.min()), float(lower.min()))


def critical_values(u: np.ndarray, neumann: bool = True) -> np.ndarray:
    """Values of a radial nodal profile where its derivative vanishes.

    Always ``u(0)``; ``u(R)`` for zero-flux fields; interior discrete extrema.
    """
    d = np.diff(u)
    interior = np.nonzero(d[:-1] * d[1:] <= 0)[0] + 1
    vals = [u[0]] + list(u[interior])
    if neumann:
        vals.append(u[-1])
    return np.unique(vals)


@dataclass
class IntervalCheck:
    lo: float
    hi: float
    worst_psi: float
    worst_psit: float
    samples: int


@dataclass
class MonotonicityReport:
    intervals: list[IntervalCheck]
    delta: float
    tol: float

    @property
    def worst(self) -> float:
        vals = [min(c.worst_psi, c.worst_psit) for c in self.intervals if c.samples > 1]
        return min(vals) if vals else 0.0

    @property
    def passed(self) -> bool:
        return self.worst >= -self.tol


def verify_monotone_psi(
    table: LevelSetTable, crossings, tol: float = 1e-6, neumann: bool = True
) -> MonotonicityReport:
    """Worst backward step of ``Psi`` and ``Psi~`` between consecutive crossing points.

    Thresholds within ``delta`` (two cell value-ranges) of a crossing or of a
    critical value are excluded.
    """
    if table.trivial:
        return MonotonicityReport([], 0.0, tol)
    u = table.u
    delta = 2.0 * float(np.abs(np.diff(u)).max())
    excl = np.concatenate([np.asarray(crossings, float), critical_values(u, neumann)])
    keep = np.ones(table.t.size, bool)
    for c in excl:
        keep &= np.abs(table.t - c) > delta
    inner = [c for c in sorted(crossings) if table.t0 < c < table.t1]
    edges = [table.t0] + inner + [table.t1]
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = keep & (table.t >= lo) & (table.t <= hi)
        n = int(sel.sum())
        if n > 1:
            wp = float(np.diff(table.Psi[sel]).min())
            wq = float(np.diff(table.Psit[sel]).min())
        else:
            wp = wq = 0.0
        out.append(IntervalCheck(lo, hi, wp, wq, n))
    return MonotonicityReport(out, delta, tol)


@dataclass
class JumpResult:
    a: float
    gamma: float  # |{u = a}|
    from_limits: float
    closed_form: float
    degenerate: bool = False

    @property
    def value(self) -> float:
        return self.from_limits


def _jump(pair, m: DiscreteMeasure, a: float, ptol: float) -> tuple[float, float, float]:
    fa = float(pair.f(a))
    Ag = pair.A_g
    lo, hi = a - ptol, a + ptol
    mu_p, F_p = m.above("mu", hi), m.above("F", hi)  # {u > a}
    mu_m, F_m = m.above("mu", lo), m.above("F", lo)  # {u >= a}
    mt_m, Ft_m = m.below("mu", lo), m.below("F", lo)  # {u < a}
    mt_p, Ft_p = m.below("mu", hi), m.below("F", hi)  # {u <= a}
    gamma = mu_m - mu_p
    fg = fa * gamma
    # Psi and Psi~ just above and just below a; f is continuous so f(a) throughout
    psi_plus = Ag * fa * mu_p**2 - F_p**2
    psi_minus = Ag * fa * (mu_p + gamma) ** 2 - (F_p + fg) ** 2
    psit_plus = Ag * fa * (mt_m + gamma) ** 2 - (Ft_m + fg) ** 2
    psit_minus = Ag * fa * mt_m**2 - Ft_m**2
    limits = psi_plus + psit_plus - psi_minus - psit_minus
    closed = 2.0 * fa * gamma * ((F_p - mu_p * Ag) + (mt_m * Ag - Ft_m))
    return gamma, limits, closed


def verify_jump_positivity(
    table: LevelSetTable, crossings, plateau_tol: float = PLATEAU_TOL
) -> list[JumpResult]:
    """Combined jump of ``Psi + Psi~`` at each crossing, by limits and by closed form."""
    m = table.measure
    out = []
    for a in crossings:
        ptol = plateau_tol * max(1.0, abs(a))
        degenerate = abs(a - table.t0) <= ptol or abs(a - table.t1) <= ptol
        if degenerate:
            out.append(JumpResult(a, math.nan, math.nan, math.nan, True))
            continue
        gamma, limits, closed = _jump(table.pair, m, a, ptol)
        out.append(JumpResult(a, gamma, limits, closed))
    return out


# ---------------------------------------------------------------------------
# integral inequality


@dataclass
class InequalityResult:
    variant: str
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


def level_perimeter(grid: RadialGrid, u, t) -> np.ndarray:
    """Length of ``{u = t}`` inside the disc for the piecewise-linear radial profile.

    Each segment crossing ``t`` contributes a circle ``2 pi r_c``; flat segments
    and the outer boundary contribute nothing.
    """
    u = np.asarray(u, float)
    r = grid.nodes
    t = np.atleast_1d(np.asarray(t, float))
    ua, ub = u[:-1], u[1:]
    ra, rb = r[:-1], r[1:]
    out = np.zeros(t.size)
    for start in range(0, t.size, 512):
        tt = t[start : start + 512, None]
        # half-open in the direction of travel: a level through a node counts once
        inside = ((ua <= tt) & (tt < ub)) | ((ub <= tt) & (tt < ua))
        with np.errstate(divide="ignore", invalid="ignore"):
            rc = ra + (tt - ua) * (rb - ra) / (ub - ua)
        out[start : start + 512] = 2.0 * math.pi * np.where(inside, rc, 0.0).sum(axis=1)
    return out


def _pieces(grid, u, pair):
    m = _measure(grid, u, pair)
    v = np.unique(m.values)
    a, b = v[:-1], v[1:]
    mu = m.above("mu", a)  # constant on (a, b)
    return a, b, mu, pair.integral_f(a, b)


def integral_inequality(
    grid: RadialGrid, u, lam: float, beta: float, variant: str = "isoperimetric", m: int = 3
) -> InequalityResult:
    """Both sides of ``(A_g/2) int f' mu (|B| - mu) >= int f P(t)^2``.

    ``P(t)^2`` is ``I_B(mu)^2`` (isoperimetric), the squared length of the
    level line (perimeter) or ``min{4pi/|B|, 16m/(pi|B|)} mu (|B| - mu)``
    (g_isoperimetric, the m-fold rotation bound).  The step-function ``mu``
    of the discrete measure is integrated exactly against ``f = f'``.
    """
    u = np.asarray(u, float)
    area = grid.area
    if np.ptp(u) <= 1e-10:
        return InequalityResult(variant, 0.0, 0.0)
    pair = NonlinearityPair.from_field(grid, u, lam, beta)
    a, b, mu, fint = _pieces(grid, u, pair)
    spread = mu * (area - mu)
    lhs = 0.5 * pair.A_g * math.fsum(fint * spread)
    if variant == "isoperimetric":
        prof = np.array([disc_isoperimetric_profile(s, grid.R) for s in mu])
        rhs = math.fsum(fint * prof**2)
    elif variant == "g_isoperimetric":
        rhs = g_profile_ratio_bound(m, area) * math.fsum(fint * spread)
    elif variant == "perimeter":
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        tq = mid[:, None] + half[:, None] * _GAUSS_X[None, :]
        P = level_perimeter(grid, u, tq.ravel()).reshape(tq.shape)
        vals = pair.f(tq) * P**2
        rhs = math.fsum((half * (vals @ _GAUSS_W)).tolist())
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return InequalityResult(variant, lhs, rhs)


def verify_integral_inequality(
    sol: SteadySolution, variant: str = "isoperimetric", m: int = 3
) -> InequalityResult:
    spec = sol.spec
    return integral_inequality(spec.grid, sol.u, spec.lam, spec.beta, variant, m)


@dataclass
class ThresholdReport:
    lam: float
    applicable: bool
    implied_bound: float = math.nan  # 2|B| times the f mu(|B|-mu)-weighted mean of 4pi/max(mu, |B|-mu)
    iso_bound: float = 8.0 * math.pi
    disc_bound: float = 32.0 / math.pi

    @property
    def respects_iso(self) -> bool:
        return self.lam > self.iso_bound

    @property
    def respects_disc(self) -> bool:
        return self.lam > self.disc_bound

    @property
    def respects_implied(self) -> bool:
        return self.lam >= self.implied_bound


def threshold_bound_from_inequality(sol: SteadySolution) -> ThresholdReport:
    """Lower bounds on lambda implied by the inequality for a nonconstant solution."""
    spec = sol.spec
    grid, u = spec.grid, sol.u
    if np.ptp(u) <= 1e-10:
        return ThresholdReport(spec.lam, False)
    area = grid.area
    pair = NonlinearityPair.from_field(grid, u, spec.lam, spec.beta)
    _, _, mu, fint = _pieces(grid, u, pair)
    spread = mu * (area - mu)
    ratio = 4.0 * math.pi / np.maximum(mu, area - mu)
    weighted = math.fsum(fint * spread * ratio) / math.fsum(fint * spread)
    return ThresholdReport(
        spec.lam,
        True,
        implied_bound=2.0 * area * weighted,
        iso_bound=2.0 * area * 4.0 * math.pi / area,
        disc_bound=2.0 * area * 16.0 / (math.pi * area),
    )
