"""Comparison of a nonlinear real-variable solution with a linear majorant.

The nonlinear equation is written with the opposite sign convention from
the ray solver,

    (v^(k))^(n0) = sum_{j=1..k} A_{k-j}(x) (v^(k-j))^(n0),

and the majorant solves the linear equation

    u^(k) = sum_{j=1..k} B_{k-j}(x) u^(k-j),    B >= 0.

If |A_{k-j}| <= n0^(-j) B_{k-j} off a finite exceptional set and the initial
data satisfy |v^(k-j)(a)|^n0 <= u^(k-j)(a), then
|v^(j)(x)|^n0 <= n0^(k-j) u^(j)(x) for j = 0..k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .._dopri import dopri5
from ..analytic import PowerSeries
from ..errors import DomainError, HypothesisError
from ..solver import EquationSpec, RaySolution
from .report import HYPOTHESES_UNMET, BoundReport

HYPOTHESIS_RTOL = 1e-12
HYPOTHESIS_SAMPLES = 257


@dataclass(frozen=True)
class MajorantProblem:
    """Linear majorant data on ``[a, 1)``.

    ``B[j]`` is a callable ``x -> B_j(x) >= 0`` (vectorized over real x),
    ``u0[j]`` the initial value ``u^(j)(a)``, ``E`` the exceptional points.
    """

    k: int
    n0: float
    B: tuple
    u0: tuple
    a: float = 0.0
    E: tuple = ()

    def __post_init__(self):
        if self.k < 1 or len(self.B) != self.k or len(self.u0) != self.k:
            raise DomainError("need k majorant coefficients and k initial values")
        if not self.n0 > 1:
            raise HypothesisError(f"comparison needs n0 > 1, got {self.n0}")
        if not 0.0 <= self.a < 1.0:
            raise DomainError(f"start point must lie in [0, 1), got {self.a}")
        if any(u < 0 for u in self.u0):
            raise DomainError("majorant initial values must be nonnegative")
        object.__setattr__(self, "B", tuple(self.B))
        object.__setattr__(self, "u0", tuple(float(u) for u in self.u0))
        object.__setattr__(self, "E", tuple(float(e) for e in self.E))

    def b_values(self, x) -> np.ndarray:
        """Array of shape (k, len(x)) of majorant coefficients."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([np.broadcast_to(np.asarray(b(x), dtype=float), x.shape) for b in self.B])


def modulus_majorant(series: PowerSeries, scale: float = 1.0) -> Callable:
    """``x -> scale * |A(x)|`` on the real segment."""

    def b(x):
        return scale * np.abs(series(np.asarray(x, dtype=float)))

    return b


def constant_majorant(value: float) -> Callable:
    def b(x):
        return np.full(np.shape(x), float(value))

    return b


@dataclass
class MajorantTrajectory:
    x: np.ndarray
    u: np.ndarray  # (n, k+1): u, u', ..., u^(k)
    n_accepted: int = 0
    n_rejected: int = 0
    status: str = "ok"


def herold_majorant(
    mp: MajorantProblem, x_max: float, tol: float = 1e-10, report_n: int = 101
) -> MajorantTrajectory:
    """Solve the linear majorant equation on ``[a, x_max]``.

    The returned samples are the uniform reporting grid of ``report_n``
    points. All derivatives stay nonnegative because both the coefficients
    and the data are.
    """
    if not mp.a < x_max < 1.0:
        raise DomainError(f"need a < x_max < 1, got x_max={x_max}")
    grid = np.linspace(mp.a, x_max, max(2, int(report_n)))
    probe = np.union1d(grid, np.linspace(mp.a, x_max, HYPOTHESIS_SAMPLES))
    if np.any(mp.b_values(probe) < 0):
        raise DomainError("majorant coefficients must be nonnegative on the sample grid")

    def rhs(x, u):
        b = mp.b_values(x)[:, 0]
        return np.append(u[1:], float(np.dot(b, u)))

    res = dopri5(rhs, mp.a, np.array(mp.u0, dtype=float), grid[1:], tol)
    t = np.array(res.t)
    keep = np.isin(t, grid)
    x = t[keep]
    u_low = np.array(res.y)[keep]
    top = np.array(res.dy)[keep][:, -1]
    return MajorantTrajectory(x, np.column_stack([u_low, top]), res.n_accepted, res.n_rejected, res.status)


@dataclass
class HypothesisCheck:
    ok: bool
    coefficient_ok: bool
    initial_ok: bool
    exponent_ok: bool
    worst_ratio: float  # max of |A_{k-j}| n0^j / B_{k-j}; <= 1 when satisfied
    details: list = field(default_factory=list)


def _off_exceptional(x: np.ndarray, E: Sequence[float]) -> np.ndarray:
    keep = np.ones(x.shape, dtype=bool)
    for e in E:
        keep &= np.abs(x - e) > 1e-12
    return keep


def check_majorant_hypotheses(
    mp: MajorantProblem, A: Sequence[PowerSeries], v0: Sequence[complex], x_grid: Sequence[float]
) -> HypothesisCheck:
    """Check |A_{k-j}| <= n0^(-j) B_{k-j} on ``x_grid`` minus E and the
    initial-value domination. ``A`` is in the comparison sign convention
    (only moduli matter)."""
    x = np.asarray(x_grid, dtype=float)
    x = x[_off_exceptional(x, mp.E)]
    B = mp.b_values(x)
    details = []
    worst = 0.0
    coef_ok = True
    for j in range(1, mp.k + 1):
        idx = mp.k - j
        a_mod = np.abs(A[idx](x)) if not A[idx].is_zero else np.zeros_like(x)
        allowed = B[idx] * mp.n0 ** (-j)
        bad = a_mod > allowed * (1 + HYPOTHESIS_RTOL) + 1e-300
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(allowed > 0, a_mod / allowed, np.where(a_mod > 0, np.inf, 0.0))
        worst = max(worst, float(np.max(ratio)) if ratio.size else 0.0)
        if np.any(bad):
            coef_ok = False
            details.append(f"|A_{idx}| exceeds n0^-{j} B_{idx} at x={float(x[np.argmax(bad)]):.6g}")
    init_ok = True
    for j in range(1, mp.k + 1):
        idx = mp.k - j
        if abs(complex(v0[idx])) ** mp.n0 > mp.u0[idx] * (1 + HYPOTHESIS_RTOL):
            init_ok = False
            details.append(f"|v^({idx})(a)|^n0 exceeds u^({idx})(a)")
    return HypothesisCheck(coef_ok and init_ok, coef_ok, init_ok, True, worst, details)


def comparison_equation(A: Sequence[PowerSeries], n0: float, name: str = "") -> EquationSpec:
    """The ray-solver form of the comparison equation (coefficients negated)."""
    k = len(A)
    return EquationSpec(k, (n0,) * (k + 1), tuple(-a for a in A), name=name)


def comparison_check(
    v: RaySolution, traj: MajorantTrajectory, mp: MajorantProblem, A: Sequence[PowerSeries]
) -> list[BoundReport]:
    """Compare |v^(j)|^n0 with n0^(k-j) u^(j) for j = 0..k at the common grid.

    ``v`` must be a solve along the positive real axis (theta = 0) of
    :func:`comparison_equation`, sampled on the same uniform grid as
    ``traj``. Returns one report per derivative order.
    """
    if abs(v.theta) > 0:
        raise DomainError("comparison is stated on the real segment; solve with theta = 0")
    if v.k != mp.k:
        raise DomainError("order mismatch between the solution and the majorant problem")
    exps = v.equation.exponents
    exponent_ok = all(n == mp.n0 for n in exps)
    rv, vals = v.report()
    common = np.intersect1d(rv, traj.x)
    common = common[_off_exceptional(common, mp.E)]
    iv = np.searchsorted(rv, common)
    iu = np.searchsorted(traj.x, common)
    hyp = check_majorant_hypotheses(mp, A, v.values[0, : mp.k], np.union1d(common, np.linspace(mp.a, common[-1] if common.size else mp.a, HYPOTHESIS_SAMPLES)))
    ok = hyp.ok and exponent_ok
    meta = {
        "n0": mp.n0,
        "hypotheses_ok": ok,
        "worst_coefficient_ratio": hyp.worst_ratio,
        "hypothesis_notes": hyp.details + ([] if exponent_ok else ["exponents differ from n0"]),
        "exceptional_set": list(mp.E),
        "partial": bool(v.truncated),
        "equation": v.equation.name,
    }
    reports = []
    for j in range(mp.k + 1):
        lhs = np.abs(vals[iv, j]) ** mp.n0
        rhs = mp.n0 ** (mp.k - j) * traj.u[iu, j]
        reports.append(
            BoundReport.evaluate(
                f"comparison_j{j}", common, lhs, rhs, 0.0, dict(meta, j=j),
                status=None if ok else HYPOTHESES_UNMET,
            )
        )
    return reports
