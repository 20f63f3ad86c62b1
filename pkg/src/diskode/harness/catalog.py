"""Named equations with known solutions or known coefficient norms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..analytic import PowerSeries
from ..bounds.comparison import MajorantProblem, constant_majorant
from ..errors import ScenarioError
from ..solver import EquationSpec

SELF_CHECK_TOL = 1e-9
BLOCH_DEGREE = 256


@dataclass(frozen=True)
class CatalogEntry:
    """An equation, its initial data at the origin and, when known, the
    derivatives ``f, f', ..., f^(k)`` of the intended solution."""

    name: str
    build: Callable[[], EquationSpec]
    init: tuple
    closed_form: Optional[Callable[[np.ndarray], np.ndarray]] = None
    note: str = ""
    majorant: Optional[Callable[[], tuple]] = None
    bloch_M: Optional[float] = None

    def equation(self) -> EquationSpec:
        return self.build()


def _const(v) -> PowerSeries:
    return PowerSeries.constant(v)


def _zero() -> PowerSeries:
    return PowerSeries.constant(0.0)


def _cos_derivs(z):
    return np.array([np.cos(z), -np.sin(z), -np.cos(z)])


def _exp_derivs(z):
    e = np.exp(z)
    return np.array([e, e])


ROT = 1j / math.sqrt(2.0)


def _rot_derivs(z):
    f = np.exp(ROT * z)
    return np.array([f, ROT * f])


def _volterra_derivs(z):
    g = 1.0 + 0.5j * z
    return np.array([g * g, 1j * g])


def _herold_derivs(z):
    f = np.exp(z / math.sqrt(2.0))
    return np.array([f, f / math.sqrt(2.0)])


def _bloch_coefficient() -> PowerSeries:
    return (2.0 / 3.0) * (PowerSeries.constant(1.0, BLOCH_DEGREE) + PowerSeries.log_one_minus(BLOCH_DEGREE))


def _herold_majorant():
    A = [_const(0.5)]
    return MajorantProblem(1, 2.0, (constant_majorant(1.0),), (1.0,)), A


CATALOG: dict[str, CatalogEntry] = {
    e.name: e
    for e in [
        CatalogEntry(
            "cos_linear",
            lambda: EquationSpec(2, (1, 1, 1), (_const(1.0), _zero()), "cos_linear"),
            (1.0, 0.0),
            _cos_derivs,
            "f'' + f = 0, f = cos z",
        ),
        CatalogEntry(
            "exp_nonlinear",
            lambda: EquationSpec(1, (2, 2), (_const(-1.0),), "exp_nonlinear"),
            (1.0,),
            _exp_derivs,
            "(f')^2 - f^2 = 0, f = e^z on the principal branch",
        ),
        CatalogEntry(
            "rot_nonlinear",
            lambda: EquationSpec(1, (2, 2), (_const(0.5),), "rot_nonlinear"),
            (1.0,),
            _rot_derivs,
            "(f')^2 + f^2/2 = 0, f = exp(i z / sqrt 2)",
        ),
        CatalogEntry(
            "volterra_k1",
            lambda: EquationSpec(1, (1, 2), (_const(1.0),), "volterra_k1"),
            (1.0,),
            _volterra_derivs,
            "(f')^2 + f = 0, f = (1 + i z/2)^2",
        ),
        CatalogEntry(
            "herold_pair",
            lambda: EquationSpec(1, (2, 2), (_const(-0.5),), "herold_pair"),
            (1.0,),
            _herold_derivs,
            "(v')^2 = v^2/2 with majorant u' = u, v = exp(x / sqrt 2), u = e^x",
            majorant=_herold_majorant,
        ),
        CatalogEntry(
            "bloch_coeff",
            lambda: EquationSpec(1, (2, 2), (_bloch_coefficient(),), "bloch_coeff"),
            (1.0,),
            None,
            "A_0 = (2/3)(1 + log(1/(1-z))), Bloch norm 2",
            bloch_M=2.0,
        ),
        CatalogEntry(
            "small_norm_qk",
            lambda: EquationSpec(2, (2, 2, 2), (_const(1e-3), _const(1e-3)), "small_norm_qk"),
            (1.0, 1.0),
            None,
            "k = 2 with tiny constant coefficients, for Q_K scans",
        ),
    ]
}


def get_entry(name: str) -> CatalogEntry:
    try:
        return CATALOG[name]
    except KeyError:
        raise ScenarioError(f"unknown catalog entry {name!r}; known: {', '.join(sorted(CATALOG))}") from None


def closed_form_residual(entry: CatalogEntry, n_r: int = 19, n_theta: int = 8) -> float:
    """Largest relative residual of the closed form in its equation."""
    if entry.closed_form is None:
        return 0.0
    eq = entry.equation()
    r = np.linspace(0.0, 0.9, n_r)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    z = (r[:, None] * np.exp(1j * th)[None, :]).ravel()
    d = entry.closed_form(z)
    total = d[eq.k] ** int(eq.exponents[-1])
    scale = np.ones(z.shape)
    for j, A in enumerate(eq.coefficients):
        a = A(z)
        p = d[j] ** int(eq.exponents[j])
        total = total + a * p
        scale = scale + np.abs(a) * np.abs(p)
    init_err = max(abs(d[j][0] - entry.init[j]) for j in range(eq.k))
    return float(max(np.max(np.abs(total) / scale), init_err))


def validate_catalog() -> dict[str, float]:
    """Residual of every closed form; raises if any exceeds 1e-9."""
    out = {}
    for name, entry in CATALOG.items():
        res = closed_form_residual(entry)
        if res > SELF_CHECK_TOL:
            raise ScenarioError(f"catalog entry {name} fails its closed-form check ({res:.3g})")
        out[name] = res
    return out
