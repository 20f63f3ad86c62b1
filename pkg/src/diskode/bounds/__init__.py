"""Explicit growth and comparison estimates checked against ray solutions."""

from .comparison import (
    HypothesisCheck,
    MajorantProblem,
    MajorantTrajectory,
    check_majorant_hypotheses,
    comparison_check,
    comparison_equation,
    constant_majorant,
    herold_majorant,
    modulus_majorant,
)
from .growth import (
    C0,
    GrowthBoundQuery,
    bloch_growth_bound,
    bloch_inner_integral,
    derivative_growth_bound,
    growth_bound,
    growth_constant_base,
    hinf_growth_bound,
    integrated_weight,
    rate_function,
)
from .report import BoundReport, within_bound
from .volterra import VolterraBound, kernel_H, kernel_L, volterra_kernels, volterra_series_bound

__all__ = [name for name in dir() if not name.startswith("_")]
