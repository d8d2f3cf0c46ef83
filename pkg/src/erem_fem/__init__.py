"""Finite elements and the exponential Rosenbrock-Euler method for semilinear parabolic PDEs."""

from .base import SemilinearSystemBase
from .convergence import (
    ConvergenceTable,
    estimate_order,
    measure_error,
    run_spatial_study,
    run_temporal_study,
    theoretical_regime,
)
from .exceptions import (
    BlowUpError,
    CoefficientError,
    ConfigError,
    EremError,
    InsufficientDataError,
    IntegrationError,
    KrylovConvergenceError,
    MatrixFunctionError,
    SolverError,
    ValidationError,
)
from .fem import (
    BilinearFormSpec,
    CoefficientField,
    DiscreteOperators,
    apply_Ah,
    assemble_mass,
    assemble_stiffness,
    build_operators,
    l2_norm,
    l2_project,
)
from .integrator import (
    DenseSemilinearSystem,
    NonlinearTerm,
    SemilinearSystem,
    StepperConfig,
    erem_integrate,
    erem_step,
    exp_euler_step,
    jacobian_action,
    nemytskii_apply,
    remainder_Gn,
)
from .matfunc import (
    KrylovParams,
    OperatorAction,
    dense_expm,
    dense_phi1,
    krylov_expmv,
    krylov_phi1v,
)
from .mesh import Mesh, build_interval_mesh, build_rect_mesh, refine_uniform
from .problems import ProblemSpec, get_problem, problem_names
from .types import (
    BetaClass,
    BoundaryCondition,
    ConvergenceRow,
    MassMode,
    NemytskiiMode,
    Regime,
    Scheme,
    Snapshot,
    StudyKind,
)

__version__ = "0.1.0"

__all__ = [
    # Mesh
    "Mesh",
    "build_interval_mesh",
    "build_rect_mesh",
    "refine_uniform",
    # Finite elements
    "BilinearFormSpec",
    "CoefficientField",
    "DiscreteOperators",
    "apply_Ah",
    "assemble_mass",
    "assemble_stiffness",
    "build_operators",
    "l2_norm",
    "l2_project",
    # Matrix functions
    "KrylovParams",
    "OperatorAction",
    "dense_expm",
    "dense_phi1",
    "krylov_expmv",
    "krylov_phi1v",
    # Integrator
    "SemilinearSystemBase",
    "DenseSemilinearSystem",
    "NonlinearTerm",
    "SemilinearSystem",
    "StepperConfig",
    "erem_integrate",
    "erem_step",
    "exp_euler_step",
    "jacobian_action",
    "nemytskii_apply",
    "remainder_Gn",
    # Problems and studies
    "ProblemSpec",
    "get_problem",
    "problem_names",
    "ConvergenceTable",
    "estimate_order",
    "measure_error",
    "run_spatial_study",
    "run_temporal_study",
    "theoretical_regime",
    # Types
    "BetaClass",
    "BoundaryCondition",
    "ConvergenceRow",
    "MassMode",
    "NemytskiiMode",
    "Regime",
    "Scheme",
    "Snapshot",
    "StudyKind",
    # Exceptions
    "EremError",
    "ValidationError",
    "CoefficientError",
    "ConfigError",
    "InsufficientDataError",
    "SolverError",
    "KrylovConvergenceError",
    "MatrixFunctionError",
    "BlowUpError",
    "IntegrationError",
]
