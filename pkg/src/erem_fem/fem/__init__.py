"""P1 finite element discretization: forms, assembly and discrete operators."""

from .assembly import assemble_mass, assemble_stiffness, free_dofs_for, lumped_mass_full
from .forms import BilinearFormSpec, CoefficientField, garding_shift_for
from .operators import (
    DiscreteOperators,
    apply_Ah,
    build_operators,
    check_coercivity,
    coercivity_margin,
    dense_operator,
    interpolate,
    l2_norm,
    l2_project,
    write_coo,
)

__all__ = [
    "BilinearFormSpec",
    "CoefficientField",
    "DiscreteOperators",
    "apply_Ah",
    "assemble_mass",
    "assemble_stiffness",
    "build_operators",
    "check_coercivity",
    "coercivity_margin",
    "dense_operator",
    "free_dofs_for",
    "garding_shift_for",
    "interpolate",
    "l2_norm",
    "l2_project",
    "lumped_mass_full",
    "write_coo",
]
