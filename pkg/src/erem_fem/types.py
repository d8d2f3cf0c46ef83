"""Type definitions and data models for erem-fem."""

from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray

DofVector = NDArray[np.float64]
PointFunction = Callable[[NDArray[np.float64]], NDArray[np.float64]]
"""Vectorized function of position: points of shape (P, dim) -> values of shape (P,)."""
SpaceTimeFunction = Callable[[NDArray[np.float64], float], NDArray[np.float64]]
ScalarFunction = Callable[[NDArray[np.float64]], NDArray[np.float64]]
"""Elementwise real function applied to an array of states."""


class BoundaryCondition(str, Enum):
    """Boundary condition applied on the whole boundary."""

    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    ROBIN = "robin"


class MassMode(str, Enum):
    """Mass matrix treatment when applying the discrete operator."""

    LUMPED = "lumped"
    CONSISTENT = "consistent"


class NemytskiiMode(str, Enum):
    """How the projected nonlinearity P_h F(u_h) is evaluated."""

    NODAL = "nodal"  # f at the nodes, consistent with mass lumping
    CONSISTENT = "consistent"  # quadrature load vector and mass solve


class Scheme(str, Enum):
    """Exponential time stepping schemes."""

    EREM = "erem"
    EREM_TWO_TERM = "erem_two_term"
    EXP_EULER = "exp_euler"


class StudyKind(str, Enum):
    """Kind of run driven by the CLI."""

    TEMPORAL = "temporal"
    SPATIAL = "spatial"
    SINGLE_RUN = "single-run"


class BetaClass(str, Enum):
    """Declared smoothness regime of the initial data, u0 in D((-A)^(beta/2))."""

    SUB1 = "sub1"  # beta in [0, 1)
    ONE_TO_TWO = "one_to_two"  # beta in [1, 2)
    TWO = "two"


@dataclass(frozen=True)
class Snapshot:
    """State recorded by an observer after an accepted step."""

    step: int
    time: float
    state: DofVector


@dataclass(frozen=True)
class ConvergenceRow:
    """One measurement of a refinement study."""

    h: float
    dt: float
    t: float
    error: float


@dataclass(frozen=True)
class Regime:
    """Predicted convergence order with the tolerance band used for verdicts."""

    label: str
    expected_order: float
    lower: float
    upper: float

    def accepts(self, order: float) -> bool:
        return self.lower <= order <= self.upper
