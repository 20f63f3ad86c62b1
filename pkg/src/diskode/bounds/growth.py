"""Exponential growth estimates along a ray for equations whose exponents
all equal ``n0 > 1``.

With h(t) = max_j n0 |A_j(t e^{i theta})|^(1/(k-j)) the basic estimate is

    |f(r e^{i theta})|^n0 <= C exp(n_c int_nu^r h(t) dt),

and the derivative version multiplies by (sup h over [nu, (1+r)/2])^j.
The H^infinity and Bloch variants replace |A_j| by the pointwise bounds
implied by the coefficients' Bers and Bloch norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from ..analytic import disk_quadrature
from ..errors import DomainError, HypothesisError, PreconditionError
from ..solver import EquationSpec, RaySolution
from ..spaces import bers_norm, bloch_type_norm
from .report import BoundReport

SUP_POINTS = 4001
QUAD_LIMIT = 200
C0 = (math.e - 1.0) / (math.e + 1.0)


@dataclass(frozen=True)
class GrowthBoundQuery:
    """Inputs and the evaluated constant of one growth estimate."""

    theta: float
    nu: float
    r: np.ndarray
    epsilon: float
    C: float
    C_base: float  # maximum over j, before the prefactor
    n_c: int

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "nu": self.nu,
            "epsilon": self.epsilon,
            "C": self.C,
            "C_base": self.C_base,
            "n_c": self.n_c,
        }


def _require_equal_exponents(eq: EquationSpec) -> float:
    n0 = eq.exponents[0]
    if not n0 > 1 or any(n != n0 for n in eq.exponents[1:]):
        raise HypothesisError(f"growth estimates need n_j = n_0 > 1 for all j, got {eq.exponents}")
    return n0


def rate_function(eq: EquationSpec, theta: float):
    """h(t) = max_j n0 |A_j(t e^{i theta})|^(1/(k-j)), vectorized in t."""
    n0 = eq.exponents[0]
    e = np.exp(1j * theta)
    active = [(j, a) for j, a in enumerate(eq.coefficients) if not a.is_zero]

    def h(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for j, a in active:
            out = np.maximum(out, n0 * np.abs(a(t * e)) ** (1.0 / (eq.k - j)))
        return out if out.ndim else float(out)

    return h


def growth_constant_base(eq: EquationSpec, z_theta: complex, init: Sequence[complex]) -> float:
    """max_j |f^(j)(z_theta)|^n0 / (n_c^j max_m n0^j |A_m(z_theta)|^(j/(k-m)))."""
    n0 = eq.exponents[0]
    A = np.abs(eq.coefficient_values(z_theta))
    if not np.any(A > 0):
        raise PreconditionError("every coefficient vanishes at the starting point z_theta")
    best = 0.0
    for j in range(eq.k):
        denom = eq.n_c**j * max(n0**j * A[m] ** (j / (eq.k - m)) for m in range(eq.k))
        best = max(best, abs(complex(init[j])) ** n0 / denom)
    return best


def _cumulative_integral(h, nu: float, r: np.ndarray) -> np.ndarray:
    """int_nu^r h for every r in the increasing array ``r`` (adaptive quad per gap)."""
    out = np.zeros(r.size)
    acc, prev = 0.0, nu
    for i, x in enumerate(r):
        if x > prev:
            val, _ = integrate.quad(h, prev, x, limit=QUAD_LIMIT, epsabs=1e-13, epsrel=1e-12)
            acc += val
            prev = x
        out[i] = acc
    return out


def _running_sup(h, nu: float, upper: np.ndarray) -> np.ndarray:
    """sup of h on [nu, upper_i] for each entry, from a fine grid plus the endpoints."""
    top = float(np.max(upper))
    x = np.union1d(np.linspace(nu, top, SUP_POINTS), upper)
    hx = h(x)
    running = np.maximum.accumulate(hx)
    return running[np.searchsorted(x, upper)]


def _ray_grid(sol: RaySolution):
    r, vals = sol.report()
    return r, vals


def _meta(eq, sol, query: GrowthBoundQuery, **extra) -> dict:
    m = {"equation": eq.name, "partial": bool(sol.truncated), **query.to_json(), **extra}
    if sol.truncated:
        m["truncated_at"] = sol.last_good_r
    return m


def _query(eq, sol, epsilon, prefactor) -> GrowthBoundQuery:
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    z_theta = sol.nu * np.exp(1j * sol.theta)
    base = growth_constant_base(eq, z_theta, sol.values[0, : eq.k])
    r, _ = _ray_grid(sol)
    return GrowthBoundQuery(sol.theta, sol.nu, r, float(epsilon), (1 + epsilon) * prefactor * base, base, eq.n_c)


def growth_bound(eq: EquationSpec, sol: RaySolution, epsilon: float) -> BoundReport:
    """|f|^n0 <= C exp(n_c int_nu^r h) with C = (1+eps) n0^k max_j(...)."""
    n0 = _require_equal_exponents(eq)
    q = _query(eq, sol, epsilon, n0**eq.k)
    r, vals = _ray_grid(sol)
    h = rate_function(eq, sol.theta)
    expo = eq.n_c * _cumulative_integral(h, sol.nu, r)
    rhs = q.C * np.exp(expo)
    lhs = np.abs(vals[:, 0]) ** n0
    return BoundReport.evaluate(
        f"growth_eps{epsilon:g}", r, lhs, rhs, sol.theta, _meta(eq, sol, q, exponent=expo.tolist())
    )


def derivative_growth_bound(eq: EquationSpec, sol: RaySolution, epsilon: float) -> list[BoundReport]:
    """|f^(j)|^n0 <= C_j (sup_{[nu,(1+r)/2]} h)^j exp(n_c int_nu^r h) for j = 0..k,
    C_j = (1+eps) n_c^j n0^(k-j) max_m(...)."""
    n0 = _require_equal_exponents(eq)
    r, vals = _ray_grid(sol)
    h = rate_function(eq, sol.theta)
    expo = eq.n_c * _cumulative_integral(h, sol.nu, r)
    sup = _running_sup(h, sol.nu, 0.5 * (1.0 + r))
    reports = []
    for j in range(eq.k + 1):
        q = _query(eq, sol, epsilon, eq.n_c**j * n0 ** (eq.k - j))
        rhs = q.C * sup**j * np.exp(expo)
        lhs = np.abs(vals[:, j]) ** n0
        reports.append(
            BoundReport.evaluate(
                f"derivative_growth_j{j}_eps{epsilon:g}", r, lhs, rhs, sol.theta,
                _meta(eq, sol, q, j=j, sup_factor=sup.tolist()),
            )
        )
    return reports


def _default_norm_grid():
    return disk_quadrature(1.0 - 1e-4, 64, 64)


def hinf_growth_bound(
    eq: EquationSpec,
    sol: RaySolution,
    s: float,
    coefficient_norms: Optional[Sequence[float]] = None,
    epsilon: float = 0.1,
) -> BoundReport:
    """|f|^n0 <= C exp(n_c n0 max(L, 1) int_nu^r (1-t^2)^(-s) dt), L the
    largest Bers norm of the coefficients at weight ``s``.

    Scaling by max(L, 1) keeps the estimate valid without normalizing L.
    """
    if not 0.0 <= s < 1.0:
        raise DomainError(f"the H^inf estimate needs 0 <= s < 1, got {s}")
    n0 = _require_equal_exponents(eq)
    if coefficient_norms is None:
        grid = _default_norm_grid()
        coefficient_norms = [bers_norm(a, s, grid).value for a in eq.coefficients]
    norms = [float(v) for v in coefficient_norms]
    if len(norms) != eq.k or any(not math.isfinite(v) or v < 0 for v in norms):
        raise DomainError("need one finite nonnegative Bers norm per coefficient")
    L = max(norms)
    q = _query(eq, sol, epsilon, n0**eq.k)
    r, vals = _ray_grid(sol)
    weight = integrated_weight(s, sol.nu, r)
    expo = eq.n_c * n0 * max(L, 1.0) * weight
    rhs = q.C * np.exp(expo)
    lhs = np.abs(vals[:, 0]) ** n0
    return BoundReport.evaluate(
        f"hinf_s{s:g}", r, lhs, rhs, sol.theta,
        _meta(eq, sol, q, s=s, L=L, L_scale=max(L, 1.0), coefficient_norms=norms, exponent=expo.tolist()),
    )


def integrated_weight(s: float, nu: float, r: np.ndarray) -> np.ndarray:
    """int_nu^r (1-t^2)^(-s) dt for each r."""
    return _cumulative_integral(lambda t: (1.0 - t * t) ** (-s), nu, np.asarray(r, dtype=float))


def bloch_majorant_rate(M: float, k: int, n0: float = 1.0):
    """t -> max_j n0 ((M/2) log((1+t)/(1-t)))^(1/(k-j))."""

    def g(t):
        t = np.asarray(t, dtype=float)
        base = 0.5 * M * np.log((1.0 + t) / (1.0 - t))
        out = np.zeros(t.shape)
        for j in range(k):
            out = np.maximum(out, n0 * base ** (1.0 / (k - j)))
        return out if out.ndim else float(out)

    return g


def bloch_inner_integral(M: float, k: int, nu: float, r) -> np.ndarray:
    """int_nu^r max_j ((M/2) log((1+t)/(1-t)))^(1/(k-j)) dt."""
    if not M > 0:
        raise DomainError(f"Bloch bound M must be positive, got {M}")
    return _cumulative_integral(bloch_majorant_rate(M, k), nu, np.atleast_1d(np.asarray(r, float)))


def bloch_growth_bound(
    eq: EquationSpec,
    sol: RaySolution,
    M: Optional[float] = None,
    epsilon: float = 0.1,
    asymptotic_from: float = C0,
) -> list[BoundReport]:
    """Derivative estimate for Bloch coefficients with ||A_j||_Bloch <= M.

    Returns two reports for |f'|^n0: the pre-simplified bound

        C (sup_{[nu,(1+r)/2]} max_j n0 ((M/2) log((1+x)/(1-x)))^(1/(k-j)))
          * exp(n_c int_nu^r max_j n0 ((M/2) log((1+t)/(1-t)))^(1/(k-j)) dt)

    with C = (1+eps) n_c n0^(k-1) max_j(...), and the asymptotic form
    C' log(1/(1-r)) on r >= ``asymptotic_from``, where C' is the largest
    ratio of the former to log(1/(1-r)) on that range.
    """
    n0 = _require_equal_exponents(eq)
    if M is None:
        grid = _default_norm_grid()
        M = max(bloch_type_norm(a, 1.0, grid).value for a in eq.coefficients)
    if not M > 0:
        raise DomainError(f"Bloch bound M must be positive, got {M}")
    q = _query(eq, sol, epsilon, eq.n_c * n0 ** (eq.k - 1))
    r, vals = _ray_grid(sol)
    g = bloch_majorant_rate(M, eq.k, n0)
    inner = bloch_inner_integral(M, eq.k, sol.nu, r)
    expo = eq.n_c * _cumulative_integral(g, sol.nu, r)
    sup = _running_sup(g, sol.nu, 0.5 * (1.0 + r))
    rhs = q.C * sup * np.exp(expo)
    lhs = np.abs(vals[:, 1]) ** n0

    # pointwise coefficient inequality the estimate relies on
    t = np.linspace(sol.nu, float(r[-1]), 513)
    A = np.array([np.abs(a(t * np.exp(1j * sol.theta))) for a in eq.coefficients])
    bound = 0.5 * M * np.log((1 + t) / (1 - t))
    violated = np.any(A > bound * (1 + 1e-12), axis=0)
    meta = _meta(
        eq, sol, q, M=M, inner_integral=inner.tolist(), sup_factor=sup.tolist(),
        coefficient_bound_violated_below=float(t[violated].max()) if np.any(violated) else None,
    )
    pre = BoundReport.evaluate(f"bloch_pre_eps{epsilon:g}", r, lhs, rhs, sol.theta, meta)

    tail = r >= asymptotic_from
    r_t = r[tail]
    logs = np.log(1.0 / (1.0 - r_t))
    c_fit = float(np.max(rhs[tail] / logs)) if r_t.size else float("nan")
    asym = BoundReport.evaluate(
        f"bloch_asymptotic_eps{epsilon:g}", r_t, lhs[tail], c_fit * logs, sol.theta,
        dict(meta, C_fit=c_fit, asymptotic_from=asymptotic_from),
    )
    return [pre, asym]
