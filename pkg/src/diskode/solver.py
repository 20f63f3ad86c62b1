"""Radial ray solutions of

    (f^(k))^(n_k) + sum_{j<k} A_j(z) (f^(j))^(n_j) = 0

with every non-integer power taken on a continuously tracked branch.

A ray solution starts at ``z_theta = nu e^{i theta}`` from principal
arguments and continues each argument along the ray. The radicand
``w = -sum A_j (f^(j))^(n_j)`` has its own unwrapped phase; a step whose
stage evaluations would move any tracked phase by more than pi/2 is
rejected and retried with a smaller step.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np

from ._dopri import StepRejected, dopri5
from .analytic import PowerSeries
from .errors import DomainError, PreconditionError, SingularPowerError

BLOWUP_LIMIT = 1e12
PHASE_JUMP_LIMIT = 0.5 * math.pi
TWO_PI = 2.0 * math.pi


def _is_integer(n: float) -> bool:
    return float(n).is_integer()


def _unwrap(angle: float, ref: float) -> float:
    """The representative of ``angle`` mod 2 pi nearest to ``ref``."""
    return angle + TWO_PI * round((ref - angle) / TWO_PI)


def _tracked_power(y: complex, n: float, phase: float) -> complex:
    if y == 0:
        return 0j
    return abs(y) ** n * complex(math.cos(n * phase), math.sin(n * phase))


@dataclass(frozen=True)
class EquationSpec:
    """Order ``k``, exponents ``n_0..n_k`` and coefficients ``A_0..A_{k-1}``."""

    k: int
    exponents: tuple
    coefficients: tuple
    name: str = ""

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"order k must be a positive integer, got {self.k}")
        exps = tuple(float(n) for n in self.exponents)
        if len(exps) != self.k + 1:
            raise DomainError(f"need k+1 = {self.k + 1} exponents, got {len(exps)}")
        if any(not n > 0 for n in exps):
            raise DomainError(f"exponents must be positive, got {exps}")
        if len(self.coefficients) != self.k:
            raise DomainError(f"need k = {self.k} coefficient series, got {len(self.coefficients)}")
        if not all(isinstance(a, PowerSeries) for a in self.coefficients):
            raise DomainError("coefficients must be PowerSeries")
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "coefficients", tuple(self.coefficients))

    @property
    def n_c(self) -> int:
        """Number of coefficients that are not identically zero."""
        return sum(0 if a.is_zero else 1 for a in self.coefficients)

    @property
    def is_linear(self) -> bool:
        return all(n == 1.0 for n in self.exponents)

    @property
    def radius(self) -> float:
        """Largest radius on which every coefficient may be evaluated."""
        return min(a.declared_radius for a in self.coefficients)

    def coefficient_values(self, z: complex) -> np.ndarray:
        """A_0(z), ..., A_{k-1}(z) at a single point."""
        out = np.empty(self.k, dtype=np.complex128)
        for j, a in enumerate(self.coefficients):
            top = a._top
            out[j] = a.coefficients[0] if top == 0 else a(z)
        if abs(z) > self.radius:
            raise DomainError(f"|z|={abs(z)} exceeds the coefficients' declared radius")
        return out

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "k": self.k,
            "exponents": list(self.exponents),
            "coefficients": [a.to_json() for a in self.coefficients],
        }


class TopDerivative(NamedTuple):
    value: complex
    phase: float  # unwrapped argument of the radicand
    branch_reset: bool


def _radicand(eq: EquationSpec, coeffs: np.ndarray, lower: Sequence[complex], phases: Sequence[float]):
    w = 0j
    for j in range(eq.k):
        if coeffs[j] != 0:
            n = eq.exponents[j]
            p = lower[j] ** int(n) if _is_integer(n) else _tracked_power(lower[j], n, phases[j])
            w -= coeffs[j] * p
    return w


def _root(w: complex, nk: float, phase: float) -> complex:
    return math.exp(math.log(abs(w)) / nk) * complex(math.cos(phase / nk), math.sin(phase / nk))


def extract_top_derivative(
    eq: EquationSpec,
    z: complex,
    lower_derivs: Sequence[complex],
    prev_top: Optional[complex] = None,
) -> TopDerivative:
    """Solve the equation for ``f^(k)`` given ``f, ..., f^(k-1)`` at ``z``.

    Lower powers use principal arguments. Without ``prev_top`` the principal
    ``n_k``-th root is returned; otherwise the root on the sheet closest to
    ``prev_top``.
    """
    if abs(z) >= 1.0:
        raise DomainError(f"|z| must be < 1, got {abs(z)}")
    lower = [complex(v) for v in lower_derivs]
    if len(lower) != eq.k:
        raise DomainError(f"expected {eq.k} lower derivatives, got {len(lower)}")
    coeffs = eq.coefficient_values(z)
    if eq.is_linear:
        return TopDerivative(complex(-np.dot(coeffs, lower)), 0.0, False)
    w = _radicand(eq, coeffs, lower, [math.atan2(v.imag, v.real) for v in lower])
    return _top_from_radicand(w, eq.exponents[-1], prev_top)


def _top_from_radicand(w: complex, nk: float, prev_top: Optional[complex]) -> TopDerivative:
    if w == 0:
        if nk < 1:
            raise SingularPowerError(f"radicand vanishes and n_k = {nk} < 1")
        return TopDerivative(0j, 0.0, True)
    arg = math.atan2(w.imag, w.real)
    if nk == 1.0:
        return TopDerivative(w, arg, False)
    if prev_top is None:
        return TopDerivative(_root(w, nk, arg), arg, False)
    sheets = int(math.ceil(nk)) + 1
    best = None
    for m in range(-sheets, sheets + 1):
        ph = arg + TWO_PI * m
        v = _root(w, nk, ph)
        d = abs(v - prev_top)
        if best is None or d < best[0]:
            best = (d, v, ph)
    return TopDerivative(best[1], best[2], False)


@dataclass
class RaySolution:
    """Samples of ``f, ..., f^(k)`` along ``z = r e^{i theta}``.

    ``values[i, j]`` is ``f^(j)(r[i] e^{i theta})``; ``phases[i, j]`` holds
    the tracked argument of ``f^(j)`` for ``j < k`` and of the radicand in
    column ``k`` (the branch-phase history).
    """

    theta: float
    nu: float
    r: np.ndarray
    values: np.ndarray
    phases: np.ndarray
    is_report: np.ndarray
    equation: EquationSpec = field(repr=False)
    n_accepted: int = 0
    n_rejected: int = 0
    truncated: bool = False
    last_good_r: float = float("nan")
    branch_resets: list = field(default_factory=list)
    error: str = ""

    @property
    def k(self) -> int:
        return self.equation.k

    @property
    def branch_phase(self) -> np.ndarray:
        return self.phases[:, self.k]

    @property
    def ok(self) -> bool:
        return not self.error and not self.truncated

    @property
    def z(self) -> np.ndarray:
        return self.r * np.exp(1j * self.theta)

    def report(self) -> tuple[np.ndarray, np.ndarray]:
        """Radii and values on the uniform reporting grid only."""
        return self.r[self.is_report], self.values[self.is_report]

    def at(self, r: float, order: int = 0) -> complex:
        """``f^(order)`` at radius ``r``: the stored sample if there is one,
        dense output otherwise."""
        i = int(np.searchsorted(self.r, r))
        if i < self.r.size and self.r[i] == r:
            return complex(self.values[i, order])
        return complex(self.dense(r, order)[0])

    def dense(self, r, order: int = 0) -> np.ndarray:
        """Cubic Hermite interpolation of ``f^(order)`` between accepted steps.

        The top derivative is instead recomputed from the equation at the
        interpolated lower derivatives, on the branch nearest the
        interpolated radicand phase.
        """
        if not 0 <= order <= self.k:
            raise DomainError(f"order must lie in [0, {self.k}]")
        rr = np.atleast_1d(np.asarray(r, dtype=float))
        if self.r.size == 0 or np.any(rr < self.r[0] - 1e-15) or np.any(rr > self.r[-1] + 1e-15):
            raise DomainError("dense output requested outside the solved range")
        if order == self.k:
            return self._dense_top(rr)
        return self._hermite(rr, order)

    def _hermite(self, rr: np.ndarray, order: int) -> np.ndarray:
        e = np.exp(1j * self.theta)
        i = np.clip(np.searchsorted(self.r, rr, side="right") - 1, 0, self.r.size - 2)
        if self.r.size == 1:
            return np.full(rr.shape, self.values[0, order])
        r0, r1 = self.r[i], self.r[i + 1]
        h = r1 - r0
        s = (rr - r0) / h
        y0, y1 = self.values[i, order], self.values[i + 1, order]
        d0, d1 = e * self.values[i, order + 1], e * self.values[i + 1, order + 1]
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1

    def _dense_top(self, rr: np.ndarray) -> np.ndarray:
        eq = self.equation
        k = self.k
        i = np.clip(np.searchsorted(self.r, rr, side="right") - 1, 0, self.r.size - 1)
        exact = self.r[i] == rr
        lower = np.array([self._hermite(rr, j) for j in range(k)])  # (k, n)
        z = rr * np.exp(1j * self.theta)
        coeffs = np.array([a(z) if not a.is_zero else np.zeros(rr.shape, complex) for a in eq.coefficients])
        if eq.is_linear:
            out = -np.sum(coeffs * lower, axis=0)
        else:
            w = np.zeros(rr.shape, dtype=np.complex128)
            for j in range(k):
                n = eq.exponents[j]
                if _is_integer(n):
                    p = lower[j] ** int(n)
                else:
                    ref = self.phases[i, j]
                    a = np.angle(lower[j])
                    ph = a + TWO_PI * np.round((ref - a) / TWO_PI)
                    p = np.abs(lower[j]) ** n * np.exp(1j * n * ph)
                w -= coeffs[j] * p
            j1 = np.minimum(i + 1, self.r.size - 1)
            span = self.r[j1] - self.r[i]
            s = np.where(span > 0, (rr - self.r[i]) / np.where(span > 0, span, 1.0), 0.0)
            ref = (1 - s) * self.phases[i, k] + s * self.phases[j1, k]
            a = np.angle(w)
            ph = a + TWO_PI * np.round((ref - a) / TWO_PI)
            nk = eq.exponents[-1]
            with np.errstate(divide="ignore"):
                out = np.where(w == 0, 0j, np.abs(w) ** (1.0 / nk) * np.exp(1j * ph / nk))
        return np.where(exact, self.values[i, k], out)

    def residuals(self) -> np.ndarray:
        """Relative defining-equation residual at every sample."""
        eq = self.equation
        out = np.empty(self.r.size)
        for i, (zi, row) in enumerate(zip(self.z, self.values)):
            coeffs = eq.coefficient_values(zi)
            total = 0j
            scale = 1.0
            for j in range(eq.k):
                n = eq.exponents[j]
                p = row[j] ** int(n) if _is_integer(n) else _tracked_power(row[j], n, self.phases[i, j])
                total += coeffs[j] * p
                scale += abs(coeffs[j]) * abs(row[j]) ** n
            nk = eq.exponents[-1]
            top = row[eq.k]
            if _is_integer(nk):
                total += top ** int(nk)
            else:
                total += abs(top) ** nk * np.exp(1j * self.phases[i, eq.k])
            out[i] = abs(total) / scale
        return out

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "nu": self.nu,
            "r": self.r.tolist(),
            "values_re": self.values.real.tolist(),
            "values_im": self.values.imag.tolist(),
            "branch_phase": self.branch_phase.tolist(),
            "is_report": self.is_report.tolist(),
            "n_accepted": self.n_accepted,
            "n_rejected": self.n_rejected,
            "truncated": self.truncated,
            "last_good_r": self.last_good_r,
            "branch_resets": list(self.branch_resets),
            "error": self.error,
        }


class _RayState:
    """Right-hand side with branch bookkeeping for one ray."""

    def __init__(self, eq: EquationSpec, theta: float, y0: np.ndarray):
        self.eq = eq
        self.e = complex(math.cos(theta), math.sin(theta))
        self.theta = theta
        self.track = [not _is_integer(n) for n in eq.exponents[:-1]]
        self.lower_phase = np.array([math.atan2(v.imag, v.real) for v in y0])
        self.rad_phase = 0.0
        self.rad_started = False
        self.resets: list = []
        self.last_top = 0j
        self.last_phase_row = None

    def evaluate(self, r: float, y: np.ndarray, commit: bool = False) -> complex:
        eq = self.eq
        z = r * self.e
        coeffs = eq.coefficient_values(z)
        if eq.is_linear:
            top = complex(-np.dot(coeffs, y))
            if commit:
                self.last_top = top
                self.lower_phase = np.array([math.atan2(v.imag, v.real) for v in y])
                self.rad_phase = math.atan2(top.imag, top.real)
            return top
        ph = np.empty(eq.k)
        for j in range(eq.k):
            v = y[j]
            a = math.atan2(v.imag, v.real)
            ph[j] = _unwrap(a, self.lower_phase[j])
            if self.track[j] and coeffs[j] != 0 and v != 0 and abs(ph[j] - self.lower_phase[j]) > PHASE_JUMP_LIMIT:
                raise StepRejected(f"phase jump in derivative {j}")
        w = _radicand(eq, coeffs, y, ph)
        nk = eq.exponents[-1]
        if w == 0:
            if nk < 1:
                raise SingularPowerError(f"radicand vanishes at r={r} with n_k = {nk} < 1")
            top, rad = 0j, self.rad_phase
            if commit:
                self.resets.append(float(r))
                self.rad_started = False
        else:
            a = math.atan2(w.imag, w.real)
            if not self.rad_started:
                rad = a
            else:
                rad = _unwrap(a, self.rad_phase)
                if nk != 1.0 and abs(rad - self.rad_phase) > PHASE_JUMP_LIMIT:
                    raise StepRejected("radicand phase jump")
            top = w if nk == 1.0 else _root(w, nk, rad)
        if commit:
            self.lower_phase = ph
            self.rad_phase = rad
            if w != 0:
                self.rad_started = True
            self.last_top = top
        return top

    def rhs(self, r: float, y: np.ndarray) -> np.ndarray:
        top = self.evaluate(r, y)
        return self.e * np.append(y[1:], top)

    def phase_row(self) -> np.ndarray:
        return np.append(self.lower_phase, self.rad_phase)


def _check_ray_args(eq: EquationSpec, nu: float, r_max: float, tol: float, init) -> np.ndarray:
    if not (0.0 <= nu < r_max < 1.0):
        raise DomainError(f"need 0 <= nu < r_max < 1, got nu={nu}, r_max={r_max}")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if r_max > eq.radius:
        raise DomainError(f"r_max={r_max} exceeds the coefficients' declared radius {eq.radius}")
    y0 = np.asarray(init, dtype=np.complex128).ravel()
    if y0.size != eq.k:
        raise DomainError(f"need {eq.k} initial values, got {y0.size}")
    return y0


def solve_ray(
    eq: EquationSpec,
    theta: float,
    nu: float,
    r_max: float,
    init: Sequence[complex],
    tol: float = 1e-10,
    report_n: int = 101,
    extra_radii: Sequence[float] = (),
) -> RaySolution:
    """Integrate along ``r e^{i theta}`` for ``nu <= r <= r_max``.

    Samples are kept at every accepted step; steps also land exactly on
    ``report_n`` uniformly spaced radii and on any ``extra_radii``. Blow-up (|f^(k-1)| > 1e12), step
    underflow or a singular power stop the integration and return the
    partial solution with ``truncated`` set.
    """
    y0 = _check_ray_args(eq, nu, r_max, tol, init)
    theta = float(theta)
    report = np.linspace(nu, r_max, max(2, int(report_n)))
    extra = np.asarray(extra_radii, dtype=float)
    stops = np.unique(np.concatenate([report[1:], extra[(extra > nu) & (extra < r_max)]]))
    state = _RayState(eq, theta, y0)
    tops, phase_rows = [], []
    error = ""

    try:
        state.evaluate(nu, y0, commit=True)
    except (StepRejected, SingularPowerError) as exc:
        return _empty_solution(eq, theta, nu, y0, str(exc))
    tops.append(state.last_top)
    phase_rows.append(state.phase_row())

    def on_accept(r, y):
        state.evaluate(r, y, commit=True)
        tops.append(state.last_top)
        phase_rows.append(state.phase_row())

    def abort(r, y):
        if abs(y[-1]) > BLOWUP_LIMIT or not np.all(np.isfinite(y)):
            return f"blow-up: |f^(k-1)| exceeded {BLOWUP_LIMIT:g} at r={r:.17g}"
        return None

    try:
        res = dopri5(state.rhs, nu, y0, stops, tol, on_accept=on_accept, abort=abort)
        status, message = res.status, res.message
    except SingularPowerError as exc:
        res, status, message = None, "singular", str(exc)

    if res is None:
        # singular power inside a committed step: keep what was accepted
        return _empty_solution(eq, theta, nu, y0, message, truncated=True)
    n = len(res.t)
    r = np.array(res.t)
    values = np.column_stack([np.array(res.y), np.array(tops[:n])])
    phases = np.array(phase_rows[:n])
    truncated = status != "ok"
    if truncated:
        error = message
    is_report = np.isin(r, report)
    return RaySolution(
        theta=theta, nu=float(nu), r=r, values=values, phases=phases, is_report=is_report,
        equation=eq, n_accepted=res.n_accepted, n_rejected=res.n_rejected,
        truncated=truncated, last_good_r=float(r[-1]), branch_resets=state.resets, error=error,
    )


def _empty_solution(eq, theta, nu, y0, msg, truncated=True) -> RaySolution:
    vals = np.append(y0, np.nan).reshape(1, -1).astype(np.complex128)
    return RaySolution(
        theta=float(theta), nu=float(nu), r=np.array([float(nu)]), values=vals,
        phases=np.full((1, eq.k + 1), np.nan), is_report=np.array([True]), equation=eq,
        truncated=truncated, last_good_r=float(nu), error=msg,
    )


InitProvider = Union[Callable[[float], Sequence[complex]], Sequence[complex]]


def solve_fan(
    eq: EquationSpec,
    thetas: Sequence[float],
    nu: float,
    r_max: float,
    init_provider: InitProvider,
    tol: float = 1e-10,
    report_n: int = 101,
    threads: int = 1,
) -> list[RaySolution]:
    """Independent ``solve_ray`` calls, one per angle.

    ``init_provider`` is either a fixed sequence of initial values or a
    callable ``theta -> init``. A failing ray is returned as an empty,
    truncated solution carrying the error message.
    """

    def one(theta):
        try:
            init = init_provider(theta) if callable(init_provider) else init_provider
            return solve_ray(eq, theta, nu, r_max, init, tol, report_n)
        except (DomainError, PreconditionError, ValueError, ArithmeticError) as exc:
            y0 = np.zeros(eq.k, dtype=np.complex128)
            return _empty_solution(eq, theta, nu, y0, f"{type(exc).__name__}: {exc}")

    thetas = [float(t) for t in thetas]
    if threads > 1 and len(thetas) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, thetas))
    return [one(t) for t in thetas]
