"""Monotone fronts of elliptic PDEs on truncated cylinders.

Computes heteroclinic (front-type) solutions connecting two x-independent
states, tracks them in a parameter by pseudo-arclength continuation with a
translational phase condition, and classifies how each branch ends.
"""

from .errors import (
    ConfigurationError,
    CylfrontsError,
    DegenerateTangentError,
    EigensolverError,
    EllipticityError,
    HypothesisViolationError,
    NewtonError,
    NumericError,
    RootFindingError,
    SeedRangeError,
    ShapeError,
    TruncationError,
)
from .grid import (
    Field,
    Grid,
    build_grid,
    differentiate,
    load_field,
    save_field,
    slice_integral,
)
from .robin import (
    RobinNonlinearity,
    RobinProblem,
    RobinState,
    conjugate_set_robin,
    flow_force_robin,
    kappa1_robin,
    quartic_nonlinearity,
    robin_residual,
    seed_robin,
    stationary_roots_robin,
    verify_truncated_heteroclinic,
)
from .bore import (
    BoreParams,
    BoreProblem,
    BoreState,
    bore_diagnostics,
    bore_jacobian,
    bore_residual,
    conjugate_state_bore,
    flow_force_bore,
    froude_squared,
    kappa1_bore,
    lambda_star,
    seed_bore,
)

__all__ = [
    "Field",
    "Grid",
    "build_grid",
    "differentiate",
    "slice_integral",
    "save_field",
    "load_field",
    "RobinNonlinearity",
    "RobinProblem",
    "RobinState",
    "quartic_nonlinearity",
    "conjugate_set_robin",
    "kappa1_robin",
    "robin_residual",
    "flow_force_robin",
    "seed_robin",
    "stationary_roots_robin",
    "verify_truncated_heteroclinic",
    "BoreParams",
    "BoreProblem",
    "BoreState",
    "froude_squared",
    "lambda_star",
    "kappa1_bore",
    "conjugate_state_bore",
    "bore_residual",
    "bore_jacobian",
    "flow_force_bore",
    "seed_bore",
    "bore_diagnostics",
    "CylfrontsError",
    "ConfigurationError",
    "ShapeError",
    "NumericError",
    "EllipticityError",
    "HypothesisViolationError",
    "SeedRangeError",
    "RootFindingError",
    "EigensolverError",
    "TruncationError",
    "NewtonError",
    "DegenerateTangentError",
]

__version__ = "0.1.0"
