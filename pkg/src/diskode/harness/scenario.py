"""Scenario files: one JSON document describing an equation, solver settings
and the experiments to run on it."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..analytic import PowerSeries
from ..errors import ScenarioError
from ..kernels import KernelWeight
from ..solver import EquationSpec
from .catalog import CATALOG, get_entry

SCHEMA_VERSION = 1


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class InlineEquation(_Model):
    """Coefficients as lists of ``[re, im]`` Taylor coefficients."""

    k: int = Field(ge=1)
    exponents: list[float]
    coefficients: list[list[tuple[float, float]]]
    init: list[tuple[float, float]]
    name: str = "inline"

    @model_validator(mode="after")
    def _shape(self):
        if len(self.exponents) != self.k + 1 or len(self.coefficients) != self.k or len(self.init) != self.k:
            raise ValueError("need k+1 exponents, k coefficient series and k initial values")
        if any(not n > 0 for n in self.exponents):
            raise ValueError("exponents must be positive")
        if any(len(c) == 0 for c in self.coefficients):
            raise ValueError("coefficient series must be non-empty")
        return self


class EquationRef(_Model):
    catalog: Optional[str] = None
    inline: Optional[InlineEquation] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.catalog is None) == (self.inline is None):
            raise ValueError("give exactly one of 'catalog' or 'inline'")
        if self.catalog is not None and self.catalog not in CATALOG:
            raise ValueError(f"unknown catalog entry {self.catalog!r}; known: {', '.join(sorted(CATALOG))}")
        return self


class KernelSpec(_Model):
    family: Literal["power", "constant", "tabulated"] = "power"
    p: float = 0.5
    value: float = 1.0
    t: Optional[list[float]] = None
    k: Optional[list[float]] = None

    def build(self) -> KernelWeight:
        if self.family == "power":
            return KernelWeight.power(self.p)
        if self.family == "constant":
            return KernelWeight.constant(self.value)
        return KernelWeight.tabulated(self.t or [], self.k or [])


class SolverSettings(_Model):
    tol: float = Field(default=1e-10, gt=0)
    r_max: float = Field(default=0.999, gt=0, lt=1)
    nu: float = Field(default=0.0, ge=0, lt=1)
    n_rays: int = Field(default=8, ge=1)
    report_n: int = Field(default=101, ge=2)

    @model_validator(mode="after")
    def _order(self):
        if not self.nu < self.r_max:
            raise ValueError("nu must be smaller than r_max")
        return self


class SolveExperiment(_Model):
    type: Literal["solve"] = "solve"


class NormsExperiment(_Model):
    type: Literal["norms"] = "norms"
    spaces: list[Literal["bloch", "bers", "hardy", "qk"]] = ["bloch", "bers"]
    s: float = 1.0
    t: float = 2.0
    r_max: float = Field(default=1.0 - 1e-4, gt=0, lt=1)
    radial_n: int = Field(default=64, ge=4)
    angular_n: int = Field(default=64, ge=4)
    kernel_form: Literal["green", "one_minus_phi_sq"] = "one_minus_phi_sq"


BoundName = Literal["growth", "derivative", "hinf", "bloch", "comparison"]


class BoundsExperiment(_Model):
    type: Literal["bounds"] = "bounds"
    which: list[BoundName] = ["growth", "derivative"]
    epsilons: list[float] = [0.1, 0.5]
    hinf_s: list[float] = [0.0, 0.5]
    bloch_M: Optional[float] = None

    @field_validator("epsilons")
    @classmethod
    def _eps(cls, v):
        if not v or any(not e > 0 for e in v):
            raise ValueError("epsilons must be positive")
        return v

    @field_validator("hinf_s")
    @classmethod
    def _s(cls, v):
        if any(not 0 <= s < 1 for s in v):
            raise ValueError("hinf_s values must lie in [0, 1)")
        return v


class ConditionsExperiment(_Model):
    type: Literal["conditions"] = "conditions"
    mode: Literal["thm_alpha", "thm_beta"] = "thm_beta"
    thresholds: list[float] = [1.0]
    c: Optional[float] = None
    r_max_sequence: list[float] = [0.9, 0.99, 0.999]

    @model_validator(mode="after")
    def _c(self):
        if self.mode == "thm_alpha" and (self.c is None or not 1.0 < self.c < 1.5):
            raise ValueError(f"c must lie in (1, 3/2) for thm_alpha, got {self.c}")
        if any(not t > 0 for t in self.thresholds):
            raise ValueError("thresholds must be positive")
        return self


class VolterraExperiment(_Model):
    type: Literal["volterra"] = "volterra"
    r_grid: list[float] = [round(0.05 * i, 10) for i in range(1, 19)]
    tol: float = Field(default=1e-10, gt=0)
    n_max: int = Field(default=80, ge=1)
    theta: float = 0.0


class ScanExperiment(_Model):
    type: Literal["scan"] = "scan"
    r_max_sequence: list[float] = [0.9, 0.99, 0.999]
    n_rays: int = Field(default=64, ge=4)
    radial_n: int = Field(default=48, ge=4)
    derivative_order: Optional[int] = None
    kernel_form: Literal["green", "one_minus_phi_sq"] = "one_minus_phi_sq"
    a_radii: list[float] = [0.2, 0.4, 0.6, 0.8, 0.9]
    a_angles: int = Field(default=16, ge=1)


Experiment = Annotated[
    Union[
        SolveExperiment,
        NormsExperiment,
        BoundsExperiment,
        ConditionsExperiment,
        VolterraExperiment,
        ScanExperiment,
    ],
    Field(discriminator="type"),
]


class OutputSettings(_Model):
    dir: Optional[str] = None
    format: Literal["csv", "json", "both"] = "csv"


def _expand_shorthand(item):
    """``"bounds:growth,hinf"`` -> ``{"type": "bounds", "which": [...]}``."""
    if not isinstance(item, str):
        return item
    kind, _, rest = item.partition(":")
    out = {"type": kind}
    if rest:
        if kind != "bounds":
            raise ValueError(f"only bounds experiments take a ':' selector, got {item!r}")
        out["which"] = rest.split(",")
    return out


class Scenario(_Model):
    schema_version: Literal[1] = SCHEMA_VERSION
    id: str = Field(min_length=1)
    equation: EquationRef
    kernel: KernelSpec = KernelSpec()
    solver: SolverSettings = SolverSettings()
    experiments: list[Experiment] = []
    output: OutputSettings = OutputSettings()

    @field_validator("experiments", mode="before")
    @classmethod
    def _shorthand(cls, v):
        return [_expand_shorthand(x) for x in v] if isinstance(v, list) else v

    def build_equation(self) -> tuple[EquationSpec, tuple]:
        """The equation and its initial data at ``nu``."""
        if self.equation.catalog is not None:
            entry = get_entry(self.equation.catalog)
            return entry.equation(), tuple(complex(v) for v in entry.init)
        inl = self.equation.inline
        coeffs = tuple(PowerSeries([complex(a, b) for a, b in c]) for c in inl.coefficients)
        eq = EquationSpec(inl.k, tuple(inl.exponents), coeffs, inl.name)
        return eq, tuple(complex(a, b) for a, b in inl.init)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def _format_errors(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{path}: {err['msg']}")
    return "; ".join(lines)


def parse_scenario(data) -> Scenario:
    """Validate a decoded JSON object; raises ScenarioError with field paths."""
    try:
        return Scenario.model_validate(data)
    except ValidationError as exc:
        raise ScenarioError(_format_errors(exc)) from None
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


def load_scenario(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {p}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: invalid JSON: {exc}") from None
    return parse_scenario(data)
