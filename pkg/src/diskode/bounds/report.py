"""Pointwise comparison of a computed quantity (LHS) against a bound (RHS)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

REL_SLACK = 1e-6
ABS_SLACK = 1e-9

PASS = "pass"
FAIL = "fail"
HYPOTHESES_UNMET = "hypotheses unmet"
NOT_CONVERGED = "series not converged"


def within_bound(lhs, rhs) -> np.ndarray:
    """Elementwise ``lhs <= rhs (1 + 1e-6) + 1e-9``."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    return lhs <= rhs * (1.0 + REL_SLACK) + ABS_SLACK


@dataclass
class BoundReport:
    """LHS and RHS of one inequality sampled on a grid of radii.

    ``status`` is ``pass``/``fail`` when a claim is made, otherwise
    ``hypotheses unmet`` or ``series not converged``.
    """

    bound_id: str
    r: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    theta: float = 0.0
    status: str = PASS
    metadata: dict = field(default_factory=dict)

    @classmethod
    def evaluate(cls, bound_id, r, lhs, rhs, theta=0.0, metadata=None, status=None) -> "BoundReport":
        r = np.asarray(r, dtype=float)
        lhs = np.asarray(lhs, dtype=float)
        rhs = np.asarray(rhs, dtype=float)
        if status is None:
            status = PASS if bool(np.all(within_bound(lhs, rhs))) else FAIL
        return cls(bound_id, r, lhs, rhs, float(theta), status, dict(metadata or {}))

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def margin(self) -> np.ndarray:
        """RHS minus LHS at each grid point."""
        return self.rhs - self.lhs

    @property
    def margin_min(self) -> float:
        return float(np.min(self.margin)) if self.r.size else float("nan")

    @property
    def pointwise_pass(self) -> np.ndarray:
        return within_bound(self.lhs, self.rhs)

    def to_json(self) -> dict:
        return {
            "bound_id": self.bound_id,
            "theta": self.theta,
            "status": self.status,
            "margin_min": self.margin_min,
            "r": self.r.tolist(),
            "lhs": self.lhs.tolist(),
            "rhs": self.rhs.tolist(),
            "metadata": self.metadata,
        }
