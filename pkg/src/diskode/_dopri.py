"""Dormand-Prince 5(4) embedded pair with mixed absolute/relative control.

Written here rather than borrowed because the ray solver needs to veto a
step from inside the right-hand side (branch jumps) and to commit running
state only on accepted steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array(A[6] + [0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4
A_MAT = np.zeros((7, 7))
for _i, _row in enumerate(A):
    A_MAT[_i, : len(_row)] = _row

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


class StepRejected(Exception):
    """Raised by a right-hand side to force the current step to be retried smaller."""


@dataclass
class DopriResult:
    t: list = field(default_factory=list)
    y: list = field(default_factory=list)
    dy: list = field(default_factory=list)
    n_accepted: int = 0
    n_rejected: int = 0
    status: str = "ok"  # ok | underflow | aborted | failed
    message: str = ""


def dopri5(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    stops: Sequence[float],
    tol: float,
    on_accept: Optional[Callable[[float, np.ndarray], None]] = None,
    abort: Optional[Callable[[float, np.ndarray], Optional[str]]] = None,
    h_min: float = 1e-14,
    max_steps: int = 200_000,
) -> DopriResult:
    """Integrate from ``t0`` through every point of ``stops`` (increasing).

    Steps are clipped so that each stop is hit exactly. ``on_accept`` runs
    after every accepted step, before the next right-hand-side evaluation.
    """
    y = np.array(y0)
    t = float(t0)
    out = DopriResult()
    try:
        f = rhs(t, y)
    except StepRejected as exc:
        out.status, out.message = "failed", f"initial state rejected: {exc}"
        return out
    out.t.append(t)
    out.y.append(y.copy())
    out.dy.append(f.copy())
    t_end = float(stops[-1])
    h = min(0.01, 0.1 * (t_end - t))
    stop_iter = iter(float(s) for s in stops)
    next_stop = next(stop_iter)
    k = np.empty((7,) + y.shape, dtype=y.dtype)

    while out.n_accepted + out.n_rejected < max_steps:
        if h < h_min:
            out.status, out.message = "underflow", f"step size underflow at t={t:.17g}"
            return out
        step = min(h, next_stop - t)
        landing = step >= next_stop - t - 1e-14
        t_new = next_stop if landing else t + step
        step = t_new - t
        try:
            k[0] = f
            for i in range(1, 7):
                yi = y + step * (A_MAT[i, :i] @ k[:i])
                k[i] = rhs(t + C[i] * step, yi)
        except StepRejected:
            out.n_rejected += 1
            h = 0.25 * step
            continue
        y_new = y + step * (B5 @ k)
        err_vec = step * (E @ k)
        scale = tol + tol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(np.abs(err_vec) / scale))
        if not np.isfinite(err):
            out.n_rejected += 1
            h = 0.25 * step
            continue
        if err > 1.0:
            out.n_rejected += 1
            h = step * max(MIN_FACTOR, SAFETY * err ** -0.2)
            continue

        t, y, f = t_new, y_new, k[6].copy()
        out.n_accepted += 1
        if on_accept is not None:
            on_accept(t, y)
        out.t.append(t)
        out.y.append(y.copy())
        out.dy.append(f.copy())
        if abort is not None:
            msg = abort(t, y)
            if msg:
                out.status, out.message = "aborted", msg
                return out
        factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err ** -0.2))
        h = max(step, h) * factor if landing else step * factor
        if landing:
            try:
                next_stop = next(stop_iter)
            except StopIteration:
                return out
    out.status, out.message = "failed", "maximum number of steps exceeded"
    return out
