"""Exponential Rosenbrock-Euler time integration."""

from .config import StepperConfig
from .driver import IntegrationResult, NormTracker, Observer, SnapshotRecorder, erem_integrate
from .nonlinear import (
    NonlinearTerm,
    constant_reaction,
    linear_reaction,
    quadratic_reaction,
    rational_reaction,
    zero_reaction,
)
from .steppers import STEPPERS, erem_step, erem_two_term_step, exp_euler_step, stepper_for
from .system import (
    DenseSemilinearSystem,
    SemilinearSystem,
    jacobian_action,
    nemytskii_apply,
    remainder_Gn,
)

__all__ = [
    "DenseSemilinearSystem",
    "IntegrationResult",
    "NonlinearTerm",
    "NormTracker",
    "Observer",
    "STEPPERS",
    "SemilinearSystem",
    "SnapshotRecorder",
    "StepperConfig",
    "constant_reaction",
    "erem_integrate",
    "erem_step",
    "erem_two_term_step",
    "exp_euler_step",
    "jacobian_action",
    "linear_reaction",
    "nemytskii_apply",
    "quadratic_reaction",
    "rational_reaction",
    "remainder_Gn",
    "stepper_for",
    "zero_reaction",
]
