"""Radial grids on the disc, Bessel-root oracles and isoperimetric profiles.

Radial fields on the disc of radius ``R`` are stored as nodal values on
``0 = r_0 < r_1 < ... < r_{n-1} = R``.  Area integrals use finite-volume
weights: node ``i`` owns the annulus between the neighbouring face radii,

    w_i = pi * (r_{i+1/2}**2 - r_{i-1/2}**2),   r_{-1/2} = 0,  r_{n-1/2} = R.

On a uniform grid the interior weights coincide with the trapezoidal rule
for ``2 pi r f(r)``; the centre node receives the half-cell disc ``pi h^2/4``
instead of zero.  The weights sum to ``pi R^2`` exactly (the sum telescopes),
constants are integrated exactly and smooth radial integrands to O(h^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq
from scipy.special import j0, j1

MIN_NODES = 16


@dataclass(frozen=True)
class RadialGrid:
    """Node radii, face radii and area weights for the disc of radius ``R``."""

    nodes: np.ndarray
    R: float = 1.0
    scheme: str = "uniform"
    faces: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    # quadrature of 2*pi*r*p(r) is exact for polynomials p of this degree
    EXACT_DEGREE = 0

    def __post_init__(self):
        r = np.asarray(self.nodes, dtype=float)
        if r.ndim != 1 or r.size < MIN_NODES:
            raise ValueError(f"need at least {MIN_NODES} nodes, got {r.size}")
        if r[0] != 0.0 or not math.isclose(r[-1], self.R, rel_tol=0, abs_tol=1e-14):
            raise ValueError("nodes must run from 0 to R")
        if np.any(np.diff(r) <= 0):
            raise ValueError("nodes must be strictly increasing")
        r = r.copy()
        r[-1] = self.R
        r.setflags(write=False)
        faces = np.concatenate(([0.0], 0.5 * (r[1:] + r[:-1]), [self.R]))
        weights = math.pi * np.diff(faces**2)
        faces.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", r)
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def area(self) -> float:
        return math.pi * self.R**2

    @property
    def spacing(self) -> np.ndarray:
        """Node-to-node distances ``r_{i+1} - r_i`` (length n-1)."""
        return np.diff(self.nodes)

    def integrate(self, values) -> float:
        """Area integral of nodal values over the disc."""
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def mean(self, values) -> float:
        return self.integrate(values) / self.area

    def laplacian_bands(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Sub-, main- and super-diagonal of the conservative radial Laplacian.

        Row ``i`` is ``(flux_{i+1/2} - flux_{i-1/2}) / w_i`` with
        ``flux_{k+1/2} = 2 pi r_{k+1/2} (u_{k+1} - u_k) / (r_{k+1} - r_k)``.
        No flux crosses ``r = 0`` or ``r = R`` (zero-flux closure); row 0
        reduces to ``4 (u_1 - u_0) / h^2`` on a uniform grid.
        Returned arrays all have length n; ``lower[0]`` and ``upper[-1]`` are 0.
        """
        c = self.face_conductance()
        w = self.weights
        lower = np.zeros(self.n)
        upper = np.zeros(self.n)
        lower[1:] = c / w[1:]
        upper[:-1] = c / w[:-1]
        diag = -(lower + upper)
        return lower, diag, upper

    def face_conductance(self) -> np.ndarray:
        """``2 pi r_{i+1/2} / (r_{i+1} - r_i)`` for the n-1 interior faces."""
        return 2.0 * math.pi * self.faces[1:-1] / self.spacing

    def laplacian(self, u: np.ndarray) -> np.ndarray:
        # flux form: exactly zero on constants
        flux = np.zeros(self.n + 1)
        flux[1:-1] = self.face_conductance() * np.diff(u)
        return np.diff(flux) / self.weights

    def dirichlet_energy(self, u: np.ndarray) -> float:
        """Discrete ``int |grad u|^2`` matching :meth:`laplacian` (summation by parts)."""
        return float(np.dot(self.face_conductance(), np.diff(u) ** 2))

    def gradient(self, u: np.ndarray) -> np.ndarray:
        """Nodal ``du/dr``: central differences inside, zero at ``r = 0``, one-sided at ``R``."""
        du = np.gradient(u, self.nodes)
        du[0] = 0.0
        return du


def build_radial_grid(n: int = 201, R: float = 1.0, cluster: float = 0.0) -> RadialGrid:
    """Uniform radial grid, or geometrically clustered towards ``r = R``.

    ``cluster`` in [0, 1): cell sizes shrink geometrically so that the last
    cell is ``1 - cluster`` times the first; 0 gives uniform spacing.
    """
    if n < MIN_NODES:
        raise ValueError(f"n must be >= {MIN_NODES}, got {n}")
    if not R > 0:
        raise ValueError(f"R must be positive, got {R}")
    if not 0.0 <= cluster < 1.0:
        raise ValueError("cluster must lie in [0, 1)")
    if cluster == 0.0:
        return RadialGrid(np.linspace(0.0, R, n), R, "uniform")
    # geometric cell sizes decreasing towards R: h_k = q**k, overall ratio 1 - cluster
    q = (1.0 - cluster) ** (1.0 / (n - 2))
    h = q ** np.arange(n - 1)
    nodes = np.concatenate(([0.0], np.cumsum(h)))
    nodes *= R / nodes[-1]
    return RadialGrid(nodes, R, "clustered")


class SymmetryKind(str, Enum):
    TRIVIAL = "trivial"
    ROTATION = "rotation"


@dataclass(frozen=True)
class SymmetryGroup:
    kind: SymmetryKind = SymmetryKind.TRIVIAL
    m: int | None = None

    def __post_init__(self):
        kind = SymmetryKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is SymmetryKind.ROTATION and (self.m is None or int(self.m) < 2):
            raise ValueError("rotation group needs order m >= 2")

    @classmethod
    def rotation(cls, m: int) -> "SymmetryGroup":
        return cls(SymmetryKind.ROTATION, int(m))

    def contains_radial(self) -> bool:
        # radial fields are invariant under every rotation group
        return True


# ---------------------------------------------------------------------------
# Bessel-root oracles (bracketed root finding, independent of scipy's tables)


def _bracketed_roots(func, count: int, start: float, step: float = 0.25) -> list[float]:
    roots = []
    a, fa = start, func(start)
    while len(roots) < count:
        b = a + step
        fb = func(b)
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(func, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        a, fa = b, fb
    return roots[:count]


def bessel_j0_prime_zero(k: int) -> float:
    """k-th positive zero of J0' = -J1 (k >= 1); j'_{0,1} = 3.8317059702..."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return _bracketed_roots(j1, k, start=1.0)[k - 1]


def bessel_j0_zero(k: int) -> float:
    """k-th positive zero of J0; j_{0,1} = 2.4048255577..."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return _bracketed_roots(j0, k, start=0.5)[k - 1]


def neumann_radial_eigenvalue(k: int, R: float = 1.0) -> float:
    """k-th nonzero radial eigenvalue of -Laplacian with zero-flux boundary."""
    return (bessel_j0_prime_zero(k) / R) ** 2


def dirichlet_radial_eigenvalue(k: int, R: float = 1.0) -> float:
    return (bessel_j0_zero(k) / R) ** 2


# ---------------------------------------------------------------------------
# isoperimetric profile of the disc


def _atan_minus_x_over_x2(x: float) -> float:
    # (atan(x) - x) / x**2 without cancellation for small x
    if x < 1e-3:
        x2 = x * x
        return x * (-1.0 / 3.0 + x2 * (1.0 / 5.0 - x2 * (1.0 / 7.0 - x2 / 9.0)))
    return (math.atan(x) - x) / (x * x)


def _orthogonal_arc(x: float) -> tuple[float, float]:
    """Area cut off and arc length for the unit-disc arc of curvature ``x``.

    The arc is part of a circle of radius 1/x meeting the unit circle at right
    angles; x -> 0 gives the diameter (area pi/2, length 2).
    """
    if x == 0.0:
        return math.pi / 2, 2.0
    area = math.pi / 2 - math.atan(x) + _atan_minus_x_over_x2(x)
    length = 2.0 * math.atan(x) / x
    return area, length


def disc_isoperimetric_profile(s: float, R: float = 1.0) -> float:
    """Least relative perimeter of a subset of area ``s`` in the disc of radius R.

    Minimisers are circular arcs (or the diameter) meeting the boundary
    orthogonally; the arc curvature is found by bracketed root finding on the
    cut-off area to 1e-10.
    """
    total = math.pi * R**2
    if not R > 0:
        raise ValueError("R must be positive")
    if s < 0 or s > total * (1 + 1e-15):
        raise ValueError(f"area {s} outside [0, {total}]")
    s = min(s, total)
    a = min(s, total - s) / R**2  # symmetric profile; work on unit disc with a <= pi/2
    if a <= 0.0:
        return 0.0
    if a >= math.pi / 2:
        return 2.0 * R

    def area_gap(x):
        return _orthogonal_arc(x)[0] - a

    hi = 1.0
    while area_gap(hi) > 0:
        hi *= 2.0
    x = brentq(area_gap, 0.0, hi, xtol=1e-14, rtol=1e-15)
    return R * _orthogonal_arc(x)[1]


def g_profile_ratio_bound(m: int, area: float = math.pi) -> float:
    """Lower bound ``min{4 pi/|B|, 16 m/(pi |B|)}`` for ``[I^G(s)]^2 / (s(|B|-s))``.

    ``G`` is the rotation group of order ``m``.
    """
    if int(m) != m or m < 2:
        raise ValueError(f"rotation order must be an integer >= 2, got {m}")
    if not area > 0:
        raise ValueError("area must be positive")
    return min(4.0 * math.pi / area, 16.0 * m / (math.pi * area))


def lambda_threshold(m: int) -> float:
    """Mass below which m-fold rotation-invariant solutions are constant: 64/pi or 8 pi."""
    if int(m) != m or m < 2:
        raise ValueError(f"rotation order must be an integer >= 2, got {m}")
    return 64.0 / math.pi if m == 2 else 8.0 * math.pi
