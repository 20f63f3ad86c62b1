"""Analytic functions on the unit disk, Möbius maps, the Green function and
area quadrature with respect to the normalized measure (sigma(D) = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError

ArrayLike = Union[complex, float, np.ndarray]

DEFAULT_DEGREE = 64
DEFAULT_RADIUS = 1.0 - 1e-6

# local refinement around a singular point of the integrand
REFINE_RADIUS = 0.05
REFINE_LEVELS = 12

_POWER_TABLE_LIMIT = 1 << 21


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """Truncated Taylor expansion sum_n c_n z^n about the origin.

    ``declared_radius`` bounds the disk on which evaluation is trusted;
    :func:`series_eval` refuses points outside it.
    """

    coefficients: np.ndarray
    declared_radius: float = DEFAULT_RADIUS
    _top: int = field(init=False, repr=False)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coefficients, dtype=np.complex128)).copy()
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        if not 0.0 < self.declared_radius <= 1.0:
            raise DomainError(f"declared_radius must lie in (0, 1], got {self.declared_radius}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        nz = np.flatnonzero(c)
        object.__setattr__(self, "_top", int(nz[-1]) if nz.size else 0)

    @property
    def truncation_degree(self) -> int:
        return self.coefficients.size - 1

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coefficients)

    def __call__(self, z: ArrayLike) -> ArrayLike:
        return series_eval(self, z)

    def derivative(self, order: int = 1) -> "PowerSeries":
        return series_derivative(self, order)

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = max(self.coefficients.size, other.coefficients.size)
        c = np.zeros(n, dtype=np.complex128)
        c[: self.coefficients.size] += self.coefficients
        c[: other.coefficients.size] += other.coefficients
        return PowerSeries(c, min(self.declared_radius, other.declared_radius))

    def __mul__(self, scalar: complex) -> "PowerSeries":
        return PowerSeries(self.coefficients * complex(scalar), self.declared_radius)

    __rmul__ = __mul__

    def __neg__(self) -> "PowerSeries":
        return self * -1.0

    # -- common expansions -------------------------------------------------

    @classmethod
    def constant(cls, value: complex, degree: int = DEFAULT_DEGREE) -> "PowerSeries":
        c = np.zeros(degree + 1, dtype=np.complex128)
        c[0] = value
        return cls(c)

    @classmethod
    def monomial(cls, n: int, scale: complex = 1.0, degree: int = DEFAULT_DEGREE) -> "PowerSeries":
        c = np.zeros(max(degree, n) + 1, dtype=np.complex128)
        c[n] = scale
        return cls(c)

    @classmethod
    def geometric(cls, degree: int = DEFAULT_DEGREE) -> "PowerSeries":
        """1/(1-z)."""
        return cls(np.ones(degree + 1, dtype=np.complex128))

    @classmethod
    def exponential(cls, degree: int = 30) -> "PowerSeries":
        c = np.ones(degree + 1)
        for n in range(1, degree + 1):
            c[n] = c[n - 1] / n
        return cls(c)

    @classmethod
    def log_one_minus(cls, degree: int = DEFAULT_DEGREE) -> "PowerSeries":
        """log(1/(1-z)) = sum_{n>=1} z^n / n."""
        c = np.zeros(degree + 1, dtype=np.complex128)
        n = np.arange(1, degree + 1)
        c[1:] = 1.0 / n
        return cls(c)

    def to_json(self) -> list:
        return [[float(v.real), float(v.imag)] for v in self.coefficients]


def series_eval(ps: PowerSeries, z: ArrayLike) -> ArrayLike:
    """Evaluate ``ps`` at ``z`` (scalar or array) by Horner's rule.

    Raises
    ------
    DomainError
        If any ``|z|`` exceeds ``ps.declared_radius``.
    """
    scalar = np.ndim(z) == 0
    zz = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(zz) > ps.declared_radius):
        raise DomainError(
            f"|z| = {float(np.max(np.abs(zz)))} exceeds declared radius {ps.declared_radius}"
        )
    c = ps.coefficients
    top = ps._top
    if top > 0 and zz.size * top <= _POWER_TABLE_LIMIT:
        # few points, long series: build the power table once and contract
        flat = zz.ravel()
        powers = np.cumprod(np.broadcast_to(flat[:, None], (flat.size, top)), axis=1)
        acc = (powers @ c[1 : top + 1] + c[0]).reshape(zz.shape)
    else:
        acc = np.full(zz.shape, c[top], dtype=np.complex128)
        for n in range(top - 1, -1, -1):
            np.multiply(acc, zz, out=acc)
            acc += c[n]
    return complex(acc) if scalar else acc


def series_derivative(ps: PowerSeries, order: int) -> PowerSeries:
    """Formal ``order``-th derivative. Orders above the truncation degree give
    the zero series of degree 0."""
    if order < 0:
        raise ValueError("derivative order must be nonnegative")
    if order == 0:
        return ps
    n_deg = ps.truncation_degree
    if order > n_deg:
        return PowerSeries(np.zeros(1), ps.declared_radius)
    n = np.arange(order, n_deg + 1, dtype=float)
    falling = np.ones_like(n)
    for i in range(order):
        falling *= n - i
    return PowerSeries(ps.coefficients[order:] * falling, ps.declared_radius)


# -- Möbius transformations and the Green function ---------------------------


@dataclass(frozen=True)
class MobiusMap:
    """The disk automorphism z -> (a - z) / (1 - conj(a) z)."""

    a: complex

    def __post_init__(self):
        if abs(self.a) >= 1.0:
            raise DomainError(f"base point must satisfy |a| < 1, got {self.a}")

    def __call__(self, z: ArrayLike) -> ArrayLike:
        return mobius(self.a, z)

    def green(self, z: ArrayLike) -> ArrayLike:
        return green(self.a, z)


def mobius(a: complex, z: ArrayLike) -> ArrayLike:
    a = complex(a)
    return (a - z) / (1.0 - a.conjugate() * z)


def one_minus_phi_sq(a: complex, z: ArrayLike) -> ArrayLike:
    """1 - |phi_a(z)|^2 in the cancellation-free product form."""
    a = complex(a)
    return (1.0 - abs(a) ** 2) * (1.0 - np.abs(z) ** 2) / np.abs(1.0 - a.conjugate() * z) ** 2


def green(a: complex, z: ArrayLike) -> ArrayLike:
    """g(a, z) = -log|phi_a(z)|; +inf where z == a."""
    m = np.abs(mobius(a, z))
    with np.errstate(divide="ignore"):
        return -np.log(m)


def mobius_and_green(a: complex, z: complex) -> tuple[complex, float]:
    """Return ``(phi_a(z), g(a, z))`` for a single pair of disk points.

    ``g`` is ``math.inf`` when ``z == a``.
    """
    if abs(a) >= 1.0:
        raise DomainError(f"|a| must be < 1, got {abs(a)}")
    if abs(z) >= 1.0:
        raise DomainError(f"|z| must be < 1, got {abs(z)}")
    phi = complex(mobius(a, z))
    g = math.inf if phi == 0 else -math.log(abs(phi))
    return phi, g


# -- quadrature over disks ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiskGrid:
    """Quadrature nodes on the closed disk of radius ``r_max``.

    Weights integrate against the area measure normalized so that the unit
    disk has mass one; they sum to ``r_max**2``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    r_max: float
    radial_n: int
    angular_n: int
    singular_center: Optional[complex] = None

    def integrate(self, values: np.ndarray) -> complex | float:
        return np.sum(self.weights * values)

    def sup_points(self) -> np.ndarray:
        """Nodes plus the origin and the rim circle; used for sup searches."""
        rim = self.r_max * np.exp(2j * np.pi * np.arange(self.angular_n) / self.angular_n)
        return np.concatenate([self.nodes, np.zeros(1, dtype=np.complex128), rim])

    def descriptor(self) -> dict:
        c = self.singular_center
        return {
            "r_max": self.r_max,
            "radial_n": self.radial_n,
            "angular_n": self.angular_n,
            "singular_center": None if c is None else [c.real, c.imag],
            "n_nodes": int(self.nodes.size),
        }

    def coarsened(self) -> "DiskGrid":
        return disk_quadrature(
            self.r_max,
            max(4, self.radial_n // 2),
            max(4, self.angular_n // 2),
            self.singular_center,
        )


def _gauss(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _graded_panels(rho0: float, levels: int = REFINE_LEVELS) -> list[tuple[float, float]]:
    edges = [0.0] + [rho0 * 2.0 ** (-lev) for lev in range(levels, -1, -1)]
    return list(zip(edges[:-1], edges[1:]))


def disk_quadrature(
    r_max: float,
    radial_n: int,
    angular_n: int,
    singular_center: Optional[complex] = None,
) -> DiskGrid:
    """Tensor polar grid: Gauss-Legendre in radius, trapezoid in angle.

    With ``singular_center`` inside the disk the polar coordinates are
    centred on that point instead of the origin, the radial extent in each
    direction runs out to the boundary circle, and the innermost ``0.05`` of
    radius is covered by geometrically graded panels so integrable
    logarithmic singularities there converge.
    """
    if not 0.0 < r_max < 1.0:
        raise DomainError(f"r_max must lie in (0, 1), got {r_max}")
    if radial_n < 4 or angular_n < 4:
        raise DomainError("radial_n and angular_n must both be >= 4")

    psi = 2.0 * np.pi * np.arange(angular_n) / angular_n
    dpsi_norm = (2.0 * np.pi / angular_n) / np.pi
    c = None if singular_center is None else complex(singular_center)

    if c is None or abs(c) >= r_max:
        rho, w = _gauss(radial_n, 0.0, r_max)
        nodes = (rho[:, None] * np.exp(1j * psi)[None, :]).ravel()
        weights = np.repeat(w * rho * dpsi_norm, angular_n)
        return DiskGrid(nodes, weights, r_max, radial_n, angular_n, c)

    # distance from c to the circle |z| = r_max along direction psi
    e = np.exp(1j * psi)
    proj = (np.conj(c) * e).real
    rho_max = -proj + np.sqrt(proj**2 + r_max**2 - abs(c) ** 2)
    rho0 = min(REFINE_RADIUS, 0.5 * (r_max - abs(c)))

    inner_n = max(8, radial_n // 4)
    inner_rho, inner_w = [], []
    for a, b in _graded_panels(rho0):
        x, w = _gauss(inner_n, a, b)
        inner_rho.append(x)
        inner_w.append(w)
    inner_rho = np.concatenate(inner_rho)
    inner_w = np.concatenate(inner_w)

    xo, wo = leggauss(radial_n)
    half = 0.5 * (rho_max - rho0)  # per direction
    outer_rho = rho0 + half[None, :] * (xo[:, None] + 1.0)
    outer_w = half[None, :] * wo[:, None]

    rho_all = np.concatenate([np.repeat(inner_rho[:, None], angular_n, axis=1), outer_rho])
    w_all = np.concatenate([np.repeat(inner_w[:, None], angular_n, axis=1), outer_w])
    nodes = (c + rho_all * e[None, :]).ravel()
    weights = (w_all * rho_all * dpsi_norm).ravel()
    return DiskGrid(nodes, weights, r_max, radial_n, angular_n, c)


@dataclass(frozen=True, eq=False)
class AnnularGrid:
    """Polar grid split into annuli at ``breaks``; ``panel`` tags each node.

    Summing weighted values over panels ``<= i`` integrates over the disk of
    radius ``breaks[i]``. Angles are ``2 pi j / angular_n`` so nodes fall on
    equally spaced rays.
    """

    radii: np.ndarray
    radial_weights: np.ndarray
    panel: np.ndarray
    thetas: np.ndarray
    breaks: tuple

    @property
    def nodes(self) -> np.ndarray:
        return (self.radii[:, None] * np.exp(1j * self.thetas)[None, :])

    @property
    def weights(self) -> np.ndarray:
        dth = (2.0 * np.pi / self.thetas.size) / np.pi
        return np.repeat((self.radial_weights * self.radii * dth)[:, None], self.thetas.size, axis=1)


def annular_quadrature(breaks: Sequence[float], radial_n: int, angular_n: int) -> AnnularGrid:
    breaks = tuple(float(b) for b in breaks)
    if any(b <= a for a, b in zip((0.0,) + breaks[:-1], breaks)):
        raise DomainError("annulus breaks must be strictly increasing and positive")
    if breaks[-1] >= 1.0:
        raise DomainError("annulus breaks must stay inside the unit disk")
    radii, wts, panel = [], [], []
    lo = 0.0
    for i, hi in enumerate(breaks):
        x, w = _gauss(radial_n, lo, hi)
        radii.append(x)
        wts.append(w)
        panel.append(np.full(radial_n, i))
        lo = hi
    thetas = 2.0 * np.pi * np.arange(angular_n) / angular_n
    return AnnularGrid(
        np.concatenate(radii), np.concatenate(wts), np.concatenate(panel), thetas, breaks
    )
