"""Function-space quantities on the disk: Bloch-type and Bers-type sup norms,
the weighted Hardy norm and the Q_K area integral in its two kernel forms.

All values are computed on disks of radius ``r_max < 1`` and so are lower
bounds for the corresponding quantities over the whole unit disk.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .analytic import (
    DiskGrid,
    PowerSeries,
    disk_quadrature,
    green,
    one_minus_phi_sq,
    series_derivative,
)
from .errors import DomainError
from .kernels import KernelWeight

POLISH_CANDIDATES = 4
POLISH_ITERATIONS = 48


@dataclass(frozen=True)
class NormEstimate:
    space: str  # bloch_s | bers_s | hardy_s_t | qk
    params: dict
    value: float
    grid: dict
    residual: float
    argmax: Optional[complex] = None
    per_point: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def seminorm(self) -> float:
        """Square root of the value; meaningful for ``qk`` where value is the squared seminorm."""
        return float(np.sqrt(self.value))


def _weight(z: np.ndarray, s: float) -> np.ndarray:
    return (1.0 - np.abs(z) ** 2) ** s


def weighted_sup(
    fn: Callable[[np.ndarray], np.ndarray], s: float, grid: DiskGrid
) -> tuple[float, complex, float]:
    """sup of |fn(z)| (1-|z|^2)^s over the closed disk of radius ``grid.r_max``.

    The grid (plus origin and rim) seeds the search; the best few points are
    then polished by shrinking 5x5 polar patches. Returns the value, the
    maximizer and the increase contributed by the polishing stage.
    """
    pts = grid.sup_points()
    vals = np.abs(fn(pts)) * _weight(pts, s)
    order = np.argsort(-vals, kind="stable")[:POLISH_CANDIDATES]
    seed_best = float(vals[order[0]])
    best, arg = seed_best, complex(pts[order[0]])
    offsets = np.linspace(-1.0, 1.0, 5)
    for idx in order:
        rc, tc = abs(pts[idx]), float(np.angle(pts[idx]))
        vc = float(vals[idx])
        dr, dt = grid.r_max / grid.radial_n, 2.0 * np.pi / grid.angular_n
        for _ in range(POLISH_ITERATIONS):
            rr = np.clip(rc + dr * offsets, 0.0, grid.r_max)
            tt = tc + dt * offsets
            z = (rr[:, None] * np.exp(1j * tt)[None, :]).ravel()
            v = np.abs(fn(z)) * _weight(z, s)
            j = int(np.argmax(v))
            if v[j] > vc:
                vc, rc, tc = float(v[j]), abs(z[j]), float(np.angle(z[j]))
            dr *= 0.5
            dt *= 0.5
            if dr < 1e-14:
                break
        if vc > best:
            best, arg = vc, rc * np.exp(1j * tc)
    return best, arg, best - seed_best


def bloch_type_norm(f: PowerSeries, s: float, grid: DiskGrid) -> NormEstimate:
    """|f(0)| + sup |f'(z)| (1-|z|^2)^s."""
    if not s > 0:
        raise DomainError(f"Bloch-type exponent must be positive, got {s}")
    df = series_derivative(f, 1)
    sup, arg, resid = weighted_sup(df, s, grid)
    return NormEstimate(
        "bloch_s", {"s": s}, abs(f.coefficients[0]) + sup, grid.descriptor(), resid, arg
    )


def bers_norm(f: PowerSeries, s: float, grid: DiskGrid) -> NormEstimate:
    """sup (1-|z|^2)^s |f(z)|; ``s = 0`` gives the sup norm on the grid disk."""
    if s < 0:
        raise DomainError(f"Bers exponent must be nonnegative, got {s}")
    sup, arg, resid = weighted_sup(f, s, grid)
    return NormEstimate("bers_s", {"s": s}, sup, grid.descriptor(), resid, arg)


def _integral_mean(f: PowerSeries, r: float, t: float, n: int) -> float:
    z = r * np.exp(2j * np.pi * np.arange(n) / n)
    return float(np.mean(np.abs(f(z)) ** t) ** (1.0 / t))


def weighted_hardy_norm(
    f: PowerSeries, s: float, t: float, radial_grid: Sequence[float], angular_n: int = 256
) -> NormEstimate:
    """sup_r (1-r^2)^s M_t(f, r) with the integral mean by the trapezoid rule."""
    if s < 0 or not t > 0:
        raise DomainError(f"weighted Hardy needs s >= 0 and t > 0, got s={s}, t={t}")
    radii = np.asarray(radial_grid, dtype=float)
    vals = np.array([(1 - r * r) ** s * _integral_mean(f, r, t, angular_n) for r in radii])
    i = int(np.argmax(vals))
    coarse = (1 - radii[i] ** 2) ** s * _integral_mean(f, radii[i], t, max(4, angular_n // 2))
    return NormEstimate(
        "hardy_s_t",
        {"s": s, "t": t},
        float(vals[i]),
        {"radii": radii.tolist(), "angular_n": angular_n},
        abs(float(vals[i]) - coarse),
        complex(radii[i]),
        per_point=vals,
    )


def default_a_grid(radii=(0.2, 0.4, 0.6, 0.8, 0.9), n_angles: int = 16) -> np.ndarray:
    ring = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    return np.concatenate([[0j], *(r * ring for r in radii)])


def _qk_integral(df: PowerSeries, K: KernelWeight, a: complex, grid: DiskGrid, form: str, order: int):
    z = grid.nodes
    base = np.abs(df(z)) ** 2
    if order > 1:
        base = base * (1.0 - np.abs(z) ** 2) ** (2 * order - 2)
    if form == "green":
        kern = K(green(a, z))
    else:
        kern = K(one_minus_phi_sq(a, z))
    return float(np.sum(grid.weights * base * kern))


def qk_seminorm(
    f: PowerSeries,
    K: KernelWeight,
    a_grid: Sequence[complex],
    grid: DiskGrid,
    kernel_form: str = "one_minus_phi_sq",
    derivative_order: int = 1,
) -> NormEstimate:
    """sup over ``a_grid`` of
    int |f^(m)(z)|^2 (1-|z|^2)^(2m-2) K(arg(a, z)) dsigma(z),
    with arg = g(a, z) (``green``) or 1 - |phi_a(z)|^2 (``one_minus_phi_sq``).

    The reported value is the squared seminorm; the green form rebuilds the
    grid with polar refinement centred at each base point.
    """
    if derivative_order < 1:
        raise DomainError("derivative_order must be a positive integer")
    if kernel_form not in ("green", "one_minus_phi_sq"):
        raise DomainError(f"unknown kernel_form {kernel_form!r}")
    a_pts = np.atleast_1d(np.asarray(a_grid, dtype=np.complex128))
    if np.any(np.abs(a_pts) >= 1.0):
        raise DomainError("all base points must lie in the unit disk")
    df = series_derivative(f, derivative_order)

    def grid_for(a, g):
        if kernel_form == "green":
            return disk_quadrature(g.r_max, g.radial_n, g.angular_n, singular_center=a)
        return g

    plain = disk_quadrature(grid.r_max, grid.radial_n, grid.angular_n)
    per_a = np.array(
        [_qk_integral(df, K, a, grid_for(a, plain), kernel_form, derivative_order) for a in a_pts]
    )
    i = int(np.argmax(per_a))
    coarse = _qk_integral(
        df, K, a_pts[i], grid_for(a_pts[i], plain.coarsened()), kernel_form, derivative_order
    )
    return NormEstimate(
        "qk",
        {"kernel": K.name, "kernel_form": kernel_form, "derivative_order": derivative_order},
        float(per_a[i]),
        grid.descriptor(),
        abs(float(per_a[i]) - coarse),
        complex(a_pts[i]),
        per_point=per_a,
    )
