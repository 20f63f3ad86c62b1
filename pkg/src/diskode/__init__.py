"""Numerical laboratory for nonlinear differential equations
(f^(k))^(n_k) + sum_{j<k} A_j(z) (f^(j))^(n_j) = 0 on the unit disk.

Ray solutions with branch tracking, function-space norms of coefficients
and solutions, kernel integrability conditions and checks of explicit
growth estimates.
"""

from .analytic import (
    DiskGrid,
    MobiusMap,
    PowerSeries,
    annular_quadrature,
    disk_quadrature,
    green,
    mobius,
    mobius_and_green,
    one_minus_phi_sq,
    series_derivative,
    series_eval,
)
from .errors import (
    DiskodeError,
    DomainError,
    HypothesisError,
    KernelError,
    PreconditionError,
    ScenarioError,
    SingularPowerError,
)
from .kernels import ConditionVerdict, KernelWeight, condition_22, condition_43, phi_k
from .solver import EquationSpec, RaySolution, extract_top_derivative, solve_fan, solve_ray
from .spaces import (
    NormEstimate,
    bers_norm,
    bloch_type_norm,
    default_a_grid,
    qk_seminorm,
    weighted_hardy_norm,
)

__version__ = "0.1.0"
