"""Kernel weights K, the dilation envelope phi_K and the two integrability
conditions used to gate the Q_K membership results.

The power family K(t) = t^p is canonical; its envelope is s^p and both
conditions have closed forms. Tabulated kernels are evaluated numerically and
their verdicts are labelled ``heuristic``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError, KernelError

PHI_T_POINTS = 512
TRUNCATION = 1.0e6


@dataclass(frozen=True, eq=False)
class KernelWeight:
    """Nondecreasing weight K: [0, inf) -> [0, inf).

    family: ``"power"`` (``p``), ``"constant"`` (``value``) or
    ``"tabulated"`` (``t``, ``k`` samples; linear interpolation, held
    constant past the last sample).
    """

    family: str
    p: float = 0.0
    value: float = 1.0
    t: Optional[np.ndarray] = None
    k: Optional[np.ndarray] = None
    name: str = field(default="")

    def __post_init__(self):
        if self.family == "power":
            if not self.p > 0.0:
                raise KernelError(f"power kernel needs p > 0, got {self.p}")
        elif self.family == "constant":
            if not self.value > 0.0:
                raise KernelError(f"constant kernel needs a positive value, got {self.value}")
        elif self.family == "tabulated":
            t = np.asarray(self.t, dtype=float)
            k = np.asarray(self.k, dtype=float)
            if t.ndim != 1 or t.shape != k.shape or t.size < 2:
                raise KernelError("tabulated kernel needs matching 1-d t and k samples")
            if np.any(np.diff(t) <= 0) or t[0] < 0:
                raise KernelError("tabulated t samples must be nonnegative and increasing")
            if np.any(k < 0) or np.any(np.diff(k) < 0):
                raise KernelError("tabulated kernel must be nonnegative and nondecreasing")
            object.__setattr__(self, "t", t)
            object.__setattr__(self, "k", k)
        else:
            raise KernelError(f"unknown kernel family {self.family!r}")
        if not self.name:
            object.__setattr__(self, "name", self._default_name())

    def _default_name(self) -> str:
        if self.family == "power":
            return f"t^{self.p:g}"
        if self.family == "constant":
            return f"const{self.value:g}"
        return f"tabulated{self.t.size}"

    @classmethod
    def power(cls, p: float) -> "KernelWeight":
        return cls("power", p=float(p))

    @classmethod
    def constant(cls, value: float = 1.0) -> "KernelWeight":
        return cls("constant", value=float(value))

    @classmethod
    def tabulated(cls, t: Sequence[float], k: Sequence[float]) -> "KernelWeight":
        return cls("tabulated", t=np.asarray(t, float), k=np.asarray(k, float))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "power":
            with np.errstate(invalid="ignore"):
                out = np.where(t > 0, np.abs(t) ** self.p, 0.0)
        elif self.family == "constant":
            out = np.full(t.shape, self.value)
        else:
            out = np.interp(t, self.t, self.k)
        return out if out.ndim else float(out)

    def to_json(self) -> dict:
        if self.family == "power":
            return {"family": "power", "p": self.p}
        if self.family == "constant":
            return {"family": "constant", "value": self.value}
        return {"family": "tabulated", "t": self.t.tolist(), "k": self.k.tolist()}


def phi_k(K: KernelWeight, s: float) -> float:
    """sup_{0 <= t <= 1} K(s t) / K(t) for s > 0."""
    if not s > 0:
        raise DomainError(f"phi_K needs s > 0, got {s}")
    if K.family == "power":
        return s**K.p
    if K.family == "constant":
        return 1.0
    t = np.linspace(1.0 / PHI_T_POINTS, 1.0, PHI_T_POINTS)
    kt = K(t)
    keep = kt > 0
    if not np.any(keep):
        raise KernelError("kernel vanishes identically on (0, 1]")
    return float(np.max(K(s * t[keep]) / kt[keep]))


def _phi_vec(K: KernelWeight, s: np.ndarray) -> np.ndarray:
    if K.family == "power":
        return s**K.p
    if K.family == "constant":
        return np.ones_like(s)
    return np.array([phi_k(K, float(v)) for v in s])


@dataclass(frozen=True)
class ConditionVerdict:
    condition: int
    value: float
    divergent: bool
    passed: bool
    method: str  # closed_form | numeric | heuristic
    c: Optional[float] = None
    note: str = ""

    def to_json(self) -> dict:
        return {
            "condition": self.condition,
            "value": self.value,
            "divergent": self.divergent,
            "passed": self.passed,
            "method": self.method,
            "c": self.c,
            "note": self.note,
        }


def _log_panels(lo: float, hi: float, per_decade: int = 1, order: int = 24):
    """Gauss nodes/weights in log-space covering [lo, hi]."""
    n_pan = max(1, int(math.ceil(per_decade * math.log10(hi / lo))))
    edges = np.linspace(math.log(lo), math.log(hi), n_pan + 1)
    x, w = leggauss(order)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        xs.append(a + half * (x + 1))
        ws.append(half * w)
    return np.concatenate(xs), np.concatenate(ws)


def condition_22(K: KernelWeight, c: float) -> ConditionVerdict:
    """Evaluate int_1^inf phi_K(s) / s^(2c-1) ds for 1 < c < 3/2.

    With s = 1/u the range maps onto (0, 1]; the piece for s <= 1e6 is
    integrated on log-graded Gauss panels and the remainder is a power-law
    tail. Divergence is declared when the tail exponent is >= -1.
    """
    if not 1.0 < c < 1.5:
        raise DomainError(f"c must lie in (1, 3/2), got {c}")
    q = 2.0 * c - 1.0
    if K.family in ("power", "constant"):
        p = K.p if K.family == "power" else 0.0
        tail_exp = p - q
        method = "closed_form"
    else:
        # local growth exponent of phi_K over the last decade before truncation
        s1, s2 = TRUNCATION / 10.0, TRUNCATION
        p = math.log(phi_k(K, s2) / phi_k(K, s1)) / math.log(s2 / s1)
        tail_exp = p - q
        method = "heuristic"
    if tail_exp >= -1.0:
        return ConditionVerdict(22, math.inf, True, False, method, c,
                                f"integrand decays like s^{tail_exp:.6g}")

    # int over u in [1/S, 1] of phi(1/u) u^(q-2) du, done in x = log u
    x, w = _log_panels(1.0 / TRUNCATION, 1.0)
    u = np.exp(x)
    body = float(np.sum(w * _phi_vec(K, 1.0 / u) * u ** (q - 1.0)))
    tail = phi_k(K, TRUNCATION) * TRUNCATION ** (1.0 - q) / (-(tail_exp + 1.0))
    value = body + tail
    return ConditionVerdict(22, value, False, True, "numeric" if method == "closed_form" else method, c)


def condition_43(K: KernelWeight, cauchy_tol: float = 1e-6) -> ConditionVerdict:
    """Evaluate int_0^1 phi_K(s) / s ds."""
    if K.family == "power":
        return ConditionVerdict(43, 1.0 / K.p, False, True, "closed_form")
    if K.family == "constant":
        return ConditionVerdict(43, math.inf, True, False, "closed_form", note="harmonic divergence")

    # dyadic panels [2^-(i+1), 2^-i]; partial sums over the first m panels are nested
    x, w = leggauss(16)
    panel_vals = []
    for i in range(60):
        a, b = 2.0 ** (-(i + 1)), 2.0 ** (-i)
        la, lb = math.log(a), math.log(b)
        xs = la + 0.5 * (lb - la) * (x + 1)
        panel_vals.append(float(np.sum(0.5 * (lb - la) * w * _phi_vec(K, np.exp(xs)))))
    partial = np.cumsum(panel_vals)[[9, 19, 29, 39, 49, 59]]
    inc = np.diff(partial)
    converged = inc[-1] <= cauchy_tol * max(1.0, abs(partial[-1])) and inc[-1] <= inc[-2]
    if not converged:
        return ConditionVerdict(43, math.inf, True, False, "heuristic",
                                note=f"partial sums still growing by {inc[-1]:.3g}")
    return ConditionVerdict(43, float(partial[-1]), False, True, "heuristic")
