"""Coefficient-size hypotheses for Q_K membership of all solutions, and an
empirical scan of the Q_K area integral of solved equations.

Two modes are supported. ``thm_alpha`` pairs the kernel condition
int_1^inf phi_K(s) s^(1-2c) ds < inf (1 < c < 3/2) with

    sup |A_j| (1-|z|^2)^(n_k (k-j)) <= alpha   (j >= 1),
    sup |A_0| (1-|z|^2)^(n_k (k-c)) <= alpha;

``thm_beta`` pairs int_0^1 phi_K(s)/s ds < inf with the same weights except
(1-|z|^2)^(n_k (k-1)) for A_0. The thresholds are inputs: only their
existence is known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .analytic import annular_quadrature, disk_quadrature, one_minus_phi_sq, green
from .errors import DomainError, HypothesisError
from .kernels import ConditionVerdict, KernelWeight, condition_22, condition_43
from .solver import EquationSpec, solve_fan
from .spaces import weighted_sup

BOUNDED_SLOPE = 0.05
GROWING_SLOPE = 0.5
TREND_RTOL = 1e-6
MODES = ("thm_alpha", "thm_beta")


@dataclass(frozen=True)
class ConditionCheckConfig:
    """Threshold (alpha or beta), kernel, mode and the sup-norm grid.

    The sup is evaluated on disks of each radius in ``r_max_sequence`` so a
    weight with a negative exponent shows up as a growing sequence.
    """

    threshold: float
    kernel: KernelWeight
    mode: str = "thm_beta"
    c: Optional[float] = None
    r_max_sequence: tuple = (0.9, 0.99, 0.999)
    radial_n: int = 64
    angular_n: int = 64

    def __post_init__(self):
        if not self.threshold > 0:
            raise DomainError(f"threshold must be positive, got {self.threshold}")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "thm_alpha":
            if self.c is None or not 1.0 < self.c < 1.5:
                raise DomainError(f"thm_alpha needs c in (1, 3/2), got {self.c}")
        seq = tuple(float(r) for r in self.r_max_sequence)
        if not seq or any(b <= a for a, b in zip(seq, seq[1:])) or seq[0] <= 0 or seq[-1] >= 1:
            raise DomainError("r_max_sequence must increase strictly inside (0, 1)")
        object.__setattr__(self, "r_max_sequence", seq)

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "kernel": self.kernel.to_json(),
            "mode": self.mode,
            "c": self.c,
            "r_max_sequence": list(self.r_max_sequence),
            "radial_n": self.radial_n,
            "angular_n": self.angular_n,
        }


def weight_exponent(eq: EquationSpec, j: int, cfg: ConditionCheckConfig) -> float:
    """Exponent of (1-|z|^2) multiplying |A_j| in the size condition."""
    nk = eq.exponents[-1]
    if j >= 1:
        return nk * (eq.k - j)
    if cfg.mode == "thm_alpha":
        return nk * (eq.k - cfg.c)
    return nk * (eq.k - 1)


def weight_values(eq: EquationSpec, j: int, cfg: ConditionCheckConfig, z) -> np.ndarray:
    return (1.0 - np.abs(np.asarray(z)) ** 2) ** weight_exponent(eq, j, cfg)


@dataclass(frozen=True)
class CoefficientVerdict:
    j: int
    exponent: float
    sup: float
    sup_by_radius: tuple
    growing: bool
    passed: bool
    note: str = ""

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "exponent": self.exponent,
            "sup": self.sup,
            "sup_by_radius": list(self.sup_by_radius),
            "growing": self.growing,
            "passed": self.passed,
            "note": self.note,
        }


@dataclass(frozen=True)
class HypothesisVerdict:
    mode: str
    threshold: float
    coefficients: tuple
    kernel: ConditionVerdict
    passed: bool
    notes: tuple = ()

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "threshold": self.threshold,
            "coefficients": [c.to_json() for c in self.coefficients],
            "kernel": self.kernel.to_json(),
            "passed": self.passed,
            "notes": list(self.notes),
        }


def _check_pattern(eq: EquationSpec):
    nk = eq.exponents[-1]
    if any(not (nk >= n > 1) for n in eq.exponents[:-1]) or not nk > 1:
        raise HypothesisError(f"need n_k >= n_j > 1 for all j < k, got {eq.exponents}")


def coefficient_sups(eq: EquationSpec, cfg: ConditionCheckConfig) -> list[tuple[float, tuple]]:
    """(exponent, sups over each radius) for every coefficient A_0..A_{k-1}."""
    grids = [disk_quadrature(r, cfg.radial_n, cfg.angular_n) for r in cfg.r_max_sequence]
    out = []
    for j, A in enumerate(eq.coefficients):
        s = weight_exponent(eq, j, cfg)
        if A.is_zero:
            out.append((s, tuple(0.0 for _ in grids)))
            continue
        out.append((s, tuple(weighted_sup(A, s, g)[0] for g in grids)))
    return out


def check_hypotheses(eq: EquationSpec, cfg: ConditionCheckConfig) -> HypothesisVerdict:
    """Coefficient sizes against the threshold plus the kernel condition."""
    _check_pattern(eq)
    verdicts = []
    for j, (s, sups) in enumerate(coefficient_sups(eq, cfg)):
        growing = any(b > a * (1 + TREND_RTOL) + 1e-300 for a, b in zip(sups, sups[1:]))
        sup = sups[-1]
        note = "sup unbounded on grid, growing" if growing and s < 0 else ("sup still increasing with r_max" if growing else "")
        verdicts.append(CoefficientVerdict(j, s, sup, sups, growing, sup <= cfg.threshold and not (growing and s < 0), note))
    if cfg.mode == "thm_alpha":
        kv = condition_22(cfg.kernel, cfg.c)
    else:
        kv = condition_43(cfg.kernel)
    passed = all(v.passed for v in verdicts) and kv.passed
    notes = ("weights use the exponents n_k(k-j), n_k(k-c) and n_k(k-1)",)
    return HypothesisVerdict(cfg.mode, cfg.threshold, tuple(verdicts), kv, passed, notes)


@dataclass
class MembershipScan:
    """Q_K area integrals on growing disks; a trend, never a membership proof."""

    r_max: np.ndarray
    values: np.ndarray
    slope: float
    classification: str  # bounded-looking | growing | inconclusive
    truncated: bool = False
    per_a: Optional[np.ndarray] = field(default=None, repr=False)
    a_grid: Optional[np.ndarray] = field(default=None, repr=False)
    note: str = "empirical"

    def to_json(self) -> dict:
        return {
            "r_max": self.r_max.tolist(),
            "values": self.values.tolist(),
            "slope": self.slope,
            "classification": self.classification,
            "truncated": self.truncated,
            "note": self.note,
        }


def classify_slope(slope: float) -> str:
    if slope < BOUNDED_SLOPE:
        return "bounded-looking"
    if slope > GROWING_SLOPE:
        return "growing"
    return "inconclusive"


def trend_slope(r_max: np.ndarray, values: np.ndarray) -> float:
    """Least-squares slope of log(value) against log(1/(1-r_max))."""
    if r_max.size < 2 or np.all(values <= 0):
        return 0.0
    if np.any(values <= 0):
        return math.inf
    x = np.log(1.0 / (1.0 - r_max))
    return float(np.polyfit(x, np.log(values), 1)[0])


def membership_scan(
    eq: EquationSpec,
    kernel: KernelWeight,
    a_grid: Sequence[complex],
    r_max_sequence: Sequence[float],
    init,
    tol: float = 1e-10,
    n_rays: int = 64,
    radial_n: int = 48,
    derivative_order: Optional[int] = None,
    kernel_form: str = "one_minus_phi_sq",
    threads: int = 1,
) -> MembershipScan:
    """Solve a fan of rays once at the largest radius, rebuild |f^(m)| on an
    annular grid by dense output and accumulate

        sup_a int_{|z|<r_max} |f^(m)|^2 (1-|z|^2)^(2m-2) K(arg(a, z)) dsigma

    for every r_max. ``m`` defaults to the order k. ``init`` is a fixed
    initial vector at the origin or a callable ``theta -> init``.
    """
    seq = np.asarray(r_max_sequence, dtype=float)
    if seq.size == 0 or np.any(np.diff(seq) <= 0) or seq[0] <= 0 or seq[-1] >= 1:
        raise DomainError("r_max values must increase strictly inside (0, 1)")
    if kernel_form not in ("green", "one_minus_phi_sq"):
        raise DomainError(f"unknown kernel_form {kernel_form!r}")
    m = eq.k if derivative_order is None else int(derivative_order)
    if not 1 <= m <= eq.k:
        raise DomainError(f"derivative order must lie in [1, {eq.k}]")
    a_pts = np.atleast_1d(np.asarray(a_grid, dtype=np.complex128))

    grid = annular_quadrature(seq, radial_n, n_rays)
    sols = solve_fan(eq, grid.thetas, 0.0, float(seq[-1]), init, tol, threads=threads)
    reach = min(s.last_good_r if s.truncated else float(seq[-1]) for s in sols)
    truncated = reach < seq[-1]
    usable = int(np.searchsorted(seq, reach, side="right"))

    radii = grid.radii
    vals = np.zeros((radii.size, grid.thetas.size))
    inside = radii <= reach
    for col, sol in enumerate(sols):
        if inside.any() and sol.r.size > 1:
            vals[inside, col] = np.abs(sol.dense(radii[inside], m)) ** 2
    base = vals * (1.0 - radii[:, None] ** 2) ** (2 * m - 2) * grid.weights
    z = grid.nodes

    per_a = np.zeros((a_pts.size, seq.size))
    for i, a in enumerate(a_pts):
        arg = green(a, z) if kernel_form == "green" else one_minus_phi_sq(a, z)
        rows = np.sum(base * kernel(arg), axis=1)
        per_panel = np.bincount(grid.panel, weights=rows, minlength=seq.size)
        per_a[i] = np.cumsum(per_panel)
    values = per_a.max(axis=0)[:usable]
    r_used = seq[:usable]
    slope = trend_slope(r_used, values)
    return MembershipScan(
        r_used, values, slope, classify_slope(slope), truncated, per_a[:, :usable], a_pts
    )
