"""Iterated-kernel estimate for |f^(k)|^(n_k) along a ray from the origin.

For n_k >= n_j and n_k >= 1,

    |f^(k)(r)|^(n_k) <= H(r) + int_0^r L(r, s) |f^(k)(s)|^(n_k) ds,

and iterating gives |f^(k)|^(n_k) <= sum_{i<=n} H_i + T^(n+1) M / n! with
H_0 = H, H_{i+1}(r) = int_0^r L(r, s) H_i(s) ds. Integrating back k times
bounds |f| itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..errors import DomainError, HypothesisError
from ..solver import EquationSpec, RaySolution, solve_ray
from .report import NOT_CONVERGED, BoundReport

GAUSS_ORDER = 16
GRADED_LEVELS = 8
OVERSAMPLE = 4


def _check_exponents(eq: EquationSpec):
    nk = eq.exponents[-1]
    if nk < 1 or any(n > nk for n in eq.exponents[:-1]):
        raise HypothesisError(f"need n_k >= n_j and n_k >= 1, got {eq.exponents}")


def _data(eq: EquationSpec, init: Sequence[complex]) -> np.ndarray:
    d = np.abs(np.asarray(init, dtype=np.complex128).ravel())
    if d.size != eq.k:
        raise DomainError(f"need {eq.k} initial derivatives, got {d.size}")
    return d


def _a_coeffs(eq: EquationSpec, theta: float, r: np.ndarray) -> np.ndarray:
    """a_j(r) = n_{k-j}^j |A_{k-j}(r e^{i theta})| for j = 1..k, shape (k, len(r))."""
    z = r * np.exp(1j * theta)
    out = np.zeros((eq.k, r.size))
    for j in range(1, eq.k + 1):
        A = eq.coefficients[eq.k - j]
        if not A.is_zero:
            out[j - 1] = eq.exponents[eq.k - j] ** j * np.abs(A(z))
    return out


def kernel_H(eq: EquationSpec, theta: float, init: Sequence[complex], r) -> np.ndarray:
    """H(r) built from the initial data and the coefficient moduli.

    When n_{k-j} = n_k the Young split is skipped and only the product term
    with the initial data remains.
    """
    _check_exponents(eq)
    d = _data(eq, init)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    nk = eq.exponents[-1]
    a = _a_coeffs(eq, theta, r)
    H = np.zeros(r.size)
    for j in range(1, eq.k + 1):
        n = eq.exponents[eq.k - j]
        poly = np.zeros(r.size)
        for m in range(1, j + 1):
            poly += d[eq.k - m] ** n * (r ** (j - m) / math.factorial(j - m)) ** n
        H += a[j - 1] * poly
        if n < nk:
            H += (nk - n) / nk * a[j - 1] ** (nk / (nk - n))
    return H


def kernel_L(eq: EquationSpec, theta: float, r, s) -> np.ndarray:
    """L(r, s) = sum_j c_j (r-s)^(n_k (j-1)) r^(n_k - 1) / ((j-1)!)^(n_k).

    c_j = n_{k-j}/n_k, except when n_{k-j} = n_k where the product term is
    carried whole and c_j = max(1, a_j(r)).
    """
    _check_exponents(eq)
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    rb, sb = np.broadcast_arrays(r, s)
    nk = eq.exponents[-1]
    a = _a_coeffs(eq, theta, rb.ravel()).reshape((eq.k,) + rb.shape)
    diff = np.clip(rb - sb, 0.0, None)
    out = np.zeros(rb.shape)
    for j in range(1, eq.k + 1):
        n = eq.exponents[eq.k - j]
        c = np.maximum(1.0, a[j - 1]) if n == nk else n / nk
        out += c * diff ** (nk * (j - 1)) * rb ** (nk - 1) / math.factorial(j - 1) ** nk
    return out


def volterra_kernels(eq: EquationSpec, theta: float, init: Sequence[complex], r: float, s: float):
    """(H(r), L(r, s)) for 0 <= s <= r < 1."""
    if not 0.0 <= s <= r < 1.0:
        raise DomainError(f"need 0 <= s <= r < 1, got s={s}, r={r}")
    return float(kernel_H(eq, theta, init, r)[0]), float(kernel_L(eq, theta, r, s))


class _PanelRule:
    """Composite Gauss rule on [0, R] with breaks at the requested radii and
    geometric grading towards the origin; holds the Nystrom matrices."""

    def __init__(self, breaks: np.ndarray, order: int = GAUSS_ORDER):
        R = float(breaks[-1])
        graded = R * 2.0 ** -np.arange(1, GRADED_LEVELS + 1)
        edges = np.unique(np.concatenate([[0.0], graded, breaks]))
        edges = edges[edges <= R]
        x, w = leggauss(order)
        self.order = order
        self.x_ref = x
        self.w_ref = w
        self.edges = edges
        lo, hi = edges[:-1], edges[1:]
        half = 0.5 * (hi - lo)
        self.nodes = (lo[:, None] + half[:, None] * (x[None, :] + 1)).ravel()
        self.weights = (half[:, None] * w[None, :]).ravel()
        self.panel_of = np.repeat(np.arange(lo.size), order)
        # Lagrange basis at the reference nodes, evaluated through Legendre fits
        V = np.polynomial.legendre.legvander(x, order - 1)
        self._Vinv = np.linalg.inv(V)

    def interp_rows(self, panel: int, pts: np.ndarray) -> np.ndarray:
        """Rows mapping the panel's node values to values at ``pts``."""
        a, b = self.edges[panel], self.edges[panel + 1]
        t = 2.0 * (pts - a) / (b - a) - 1.0
        return np.polynomial.legendre.legvander(t, self.order - 1) @ self._Vinv

    def volterra_matrix(self, kernel, targets: np.ndarray) -> np.ndarray:
        """W with (W @ g(nodes))[i] ~ int_0^{targets[i]} kernel(t_i, s) g(s) ds."""
        N = self.nodes.size
        W = np.zeros((targets.size, N))
        for i, t in enumerate(targets):
            full = self.edges[1:] <= t + 1e-15
            mask = full[self.panel_of]
            if np.any(mask):
                s = self.nodes[mask]
                W[i, mask] = kernel(t, s) * self.weights[mask]
            p = int(np.count_nonzero(full))
            if p < self.edges.size - 1 and t > self.edges[p] + 1e-15:
                a = self.edges[p]
                half = 0.5 * (t - a)
                s = a + half * (self.x_ref + 1)
                rows = self.interp_rows(p, s)
                W[i, p * self.order:(p + 1) * self.order] += (kernel(t, s) * half * self.w_ref) @ rows
        return W


@dataclass
class VolterraBound:
    r: np.ndarray
    H: list  # H_i on r, i = 0..n
    partial_sums: np.ndarray  # (n+1, len(r))
    tail: np.ndarray  # T^(n+1) M / n! for each n, shape (n+1, len(r))
    T: np.ndarray
    S: np.ndarray
    M: np.ndarray
    n_terms: int
    converged: bool
    f_bound: np.ndarray
    h_tail: np.ndarray  # bound on sum_{i>n} H_i
    checks: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "r": self.r.tolist(),
            "H": [h.tolist() for h in self.H],
            "T": self.T.tolist(),
            "S": self.S.tolist(),
            "M": self.M.tolist(),
            "n_terms": self.n_terms,
            "converged": self.converged,
            "f_bound": self.f_bound.tolist(),
            "checks": self.checks,
        }


def volterra_series_bound(
    eq: EquationSpec,
    theta: float,
    init: Sequence[complex],
    r_grid: Sequence[float],
    tol: float = 1e-10,
    n_max: int = 80,
    sol: Optional[RaySolution] = None,
    solver_tol: float = 1e-10,
) -> tuple[VolterraBound, list[BoundReport]]:
    """Iterate the kernels on ``r_grid`` and compare with a ray solve from 0.

    Returns the iterates with their tail constants and two reports: the
    estimate for |f^(k)|^(n_k) and the integrated estimate for |f|.
    """
    _check_exponents(eq)
    r = np.asarray(r_grid, dtype=float)
    if r.size == 0 or np.any(np.diff(r) <= 0) or r[0] < 0 or r[-1] >= 1.0:
        raise DomainError("r_grid must be strictly increasing within [0, 1)")
    d = _data(eq, init)
    R = float(r[-1])
    nk = eq.exponents[-1]
    if sol is None:
        sol = solve_ray(eq, theta, 0.0, R, init, solver_tol, extra_radii=r)

    rule = _PanelRule(r[r > 0] if r[0] == 0 else r)
    kern = lambda t, s: kernel_L(eq, theta, t, s)  # noqa: E731
    W_nodes = rule.volterra_matrix(kern, rule.nodes)
    W_grid = rule.volterra_matrix(kern, r)

    # tail constants as maxima over an oversampled grid on [0, r]
    fine = np.union1d(np.linspace(0.0, R, OVERSAMPLE * max(r.size, 64) + 1), r)
    Hf = kernel_H(eq, theta, init, fine)
    S = np.maximum.accumulate(Hf)[np.searchsorted(fine, r)]
    L_rows = np.array([np.max(kernel_L(eq, theta, x, fine[fine <= x])) for x in fine])
    T = np.maximum.accumulate(L_rows)[np.searchsorted(fine, r)]
    good = fine <= sol.last_good_r
    top = np.abs(sol.dense(fine[good], eq.k)) ** nk
    top = np.concatenate([top, np.abs(sol.values[:, eq.k]) ** nk])
    rr = np.concatenate([fine[good], sol.r])
    order = np.argsort(rr, kind="stable")
    run = np.maximum.accumulate(top[order])
    M = np.array([run[np.searchsorted(rr[order], x, side="right") - 1] for x in r])

    h_nodes = kernel_H(eq, theta, init, rule.nodes)
    H_grid = [kernel_H(eq, theta, init, r)]
    nodes_sum = h_nodes.copy()
    partial = [H_grid[0].copy()]
    tails = [T * M]
    converged = bool(np.all(tails[0] < tol))
    n = 0
    while not converged and n < n_max:
        H_grid.append(W_grid @ h_nodes)
        h_nodes = W_nodes @ h_nodes
        nodes_sum += h_nodes
        n += 1
        partial.append(partial[-1] + H_grid[-1])
        tails.append(T ** (n + 1) * M / math.factorial(n))
        converged = bool(np.all(tails[-1] < tol))
    partial = np.array(partial)
    tails = np.array(tails)

    # sum_{i>n} H_i <= S sum_{i>n} T^i / i! <= S T^(n+1) e^T / (n+1)!
    h_tail = S * T ** (n + 1) * np.exp(T) / math.factorial(n + 1)
    node_T = np.interp(rule.nodes, r, T) if r.size > 1 else np.full(rule.nodes.shape, T[0])
    node_S = np.interp(rule.nodes, r, S) if r.size > 1 else np.full(rule.nodes.shape, S[0])
    # the grid maxima are nondecreasing, so the value at the next grid radius dominates
    idx = np.clip(np.searchsorted(r, rule.nodes), 0, r.size - 1)
    node_T, node_S = np.maximum(node_T, T[idx]), np.maximum(node_S, S[idx])
    node_total = nodes_sum + node_S * node_T ** (n + 1) * np.exp(node_T) / math.factorial(n + 1)

    k = eq.k
    taylor = np.zeros(r.size)
    for m in range(1, k + 1):
        taylor += d[k - m] * r ** (k - m) / math.factorial(k - m)
    ker = lambda t, s: (t - s) ** (k - 1) / math.factorial(k - 1)  # noqa: E731
    f_bound = taylor + rule.volterra_matrix(ker, r) @ np.maximum(node_total, 0.0) ** (1.0 / nk)

    i_last = n
    nonneg = all(bool(np.all(h >= -1e-14)) for h in H_grid)
    monotone = bool(np.all(np.diff(partial, axis=0) >= -1e-14))
    start = np.ceil(T).astype(int)
    decreasing = True
    for col in range(r.size):
        seq = tails[start[col]:, col]
        if seq.size > 1 and not np.all(np.diff(seq) < 0) and seq[0] > 0:
            decreasing = False
    checks = {
        "H_nonnegative": nonneg,
        "partial_sums_nondecreasing": monotone,
        "tail_decreasing_after_ceil_T": decreasing,
    }
    vb = VolterraBound(
        r, H_grid, partial, tails, T, S, M, i_last + 1, converged, f_bound, h_tail, checks
    )

    ok = r <= sol.last_good_r + 1e-15
    lhs_top = np.array([abs(sol.at(x, k)) ** nk for x in r[ok]])
    lhs_f = np.array([abs(sol.at(x, 0)) for x in r[ok]])
    meta = {
        "equation": eq.name,
        "n_terms": i_last + 1,
        "converged": converged,
        "partial": bool(sol.truncated),
        **checks,
    }
    status = None if converged else NOT_CONVERGED
    top_report = BoundReport.evaluate(
        "volterra_top", r[ok], lhs_top, (partial[-1] + tails[-1])[ok], theta, meta, status
    )
    f_report = BoundReport.evaluate("volterra_f", r[ok], lhs_f, f_bound[ok], theta, meta, status)
    return vb, [top_report, f_report]
