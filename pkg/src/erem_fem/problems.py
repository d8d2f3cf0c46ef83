"""Registry of model problems with their declared initial-data regularity."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .exceptions import ValidationError
from .fem import (
    BilinearFormSpec,
    CoefficientField,
    DiscreteOperators,
    build_operators,
    garding_shift_for,
    l2_project,
)
from .integrator import (
    NonlinearTerm,
    SemilinearSystem,
    rational_reaction,
    zero_reaction,
)
from .mesh import Mesh, build_interval_mesh, build_rect_mesh
from .types import BetaClass, BoundaryCondition, MassMode, NemytskiiMode, PointFunction

logger = logging.getLogger(__name__)

SERIES_TAIL_TOL = 1e-12
_SERIES_MAX_TERMS = 200_000

ExactSolution = Callable[[NDArray[np.float64], float], NDArray[np.float64]]


@dataclass(frozen=True)
class ProblemSpec:
    """Model problem du/dt = A u + F(u) on an interval or a rectangle.

    ``nonlin`` is the physical reaction f; the system built by ``discretize`` uses
    f(u) + c0 u to compensate the shift c0 M added to the stiffness.
    ``smoothing_claim`` records whether F is believed to map into a slightly smoother
    space, which decides between the clean h^2 and the logarithmic regime for beta = 2.
    """

    name: str
    dim: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    coeffs: CoefficientField
    bc: BoundaryCondition
    nonlin: NonlinearTerm
    u0: PointFunction
    final_time: float
    beta_class: BetaClass
    beta: float
    alpha0: float = 0.0
    garding_shift: float = 0.0
    exact: ExactSolution | None = None
    smoothing_claim: bool = True
    default_cells: int = 64
    description: str = ""
    tags: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not self.final_time > 0:
            raise ValidationError(
                "final_time must be positive", field="final_time", value=self.final_time
            )
        if not 0.0 <= self.beta <= 2.0:
            raise ValidationError("beta must lie in [0, 2]", field="beta", value=self.beta)

    @property
    def form(self) -> BilinearFormSpec:
        return BilinearFormSpec(
            coeffs=self.coeffs, bc=self.bc, alpha0=self.alpha0, garding_shift=self.garding_shift
        )

    @property
    def shifted_nonlinearity(self) -> NonlinearTerm:
        return self.nonlin.shifted(self.garding_shift)

    @property
    def is_linear(self) -> bool:
        return self.nonlin.affine

    def build_mesh(self, cells: int | None = None) -> Mesh:
        """Uniform mesh with ``cells`` intervals per coordinate direction."""

        n = cells or self.default_cells
        if self.dim == 1:
            return build_interval_mesh(self.lower[0], self.upper[0], n)
        return build_rect_mesh(n, n, (self.lower, self.upper))


def discretize(
    problem: ProblemSpec,
    mesh: Mesh,
    mass_mode: MassMode = MassMode.LUMPED,
    nemytskii_mode: NemytskiiMode = NemytskiiMode.NODAL,
) -> SemilinearSystem:
    ops = build_operators(mesh, problem.form)
    return SemilinearSystem(
        ops=ops,
        nonlin=problem.shifted_nonlinearity,
        mass_mode=MassMode(mass_mode),
        nemytskii_mode=NemytskiiMode(nemytskii_mode),
    )


def initial_state(problem: ProblemSpec, ops: DiscreteOperators) -> NDArray[np.float64]:
    """u_h(0) = P_h u_0."""

    return l2_project(problem.u0, ops)


# ------------------------------------------------------------------
# Initial data and exact solutions


def _x(points: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.asarray(points, dtype=float)[:, 0]


def step_indicator(points: NDArray[np.float64]) -> NDArray[np.float64]:
    """Indicator of (1/4, 3/4)."""

    x = _x(points)
    return ((x > 0.25) & (x < 0.75)).astype(float)


def step_sine_coefficients(k: NDArray[np.int64] | int) -> NDArray[np.float64]:
    """c_k = 2 int_0^1 1_(1/4,3/4) sin(k pi x) dx."""

    kk = np.asarray(k, dtype=float)
    return (2.0 / (kk * np.pi)) * (np.cos(kk * np.pi / 4.0) - np.cos(3.0 * kk * np.pi / 4.0))


def series_terms(t: float, tol: float = SERIES_TAIL_TOL) -> int:
    """Number of sine modes whose neglected tail is below ``tol`` times the leading term.

    Uses |c_k| <= 4 / (k pi) and a geometric bound on the decaying exponentials.
    """

    if t <= 0:
        raise ValidationError("The series needs t > 0", field="t", value=t)
    ratio = math.exp(-(np.pi**2) * t)
    leading = abs(float(step_sine_coefficients(1))) * ratio
    for n in range(1, _SERIES_MAX_TERMS):
        k = n + 1
        tail = 4.0 / (k * np.pi) * math.exp(-(k * k) * np.pi**2 * t) / (1.0 - ratio)
        if tail <= tol * leading:
            return n
    raise ValidationError("Time too small for the sine series", field="t", value=t)


def step_heat_solution(
    points: NDArray[np.float64], t: float, *, terms: int | None = None
) -> NDArray[np.float64]:
    """Heat equation solution on (0, 1) with Dirichlet data and the step initial value."""

    if t == 0:
        return step_indicator(points)
    n = terms or series_terms(t)
    k = np.arange(1, n + 1)
    x = _x(points)
    weights = step_sine_coefficients(k) * np.exp(-(k**2) * np.pi**2 * t)
    return np.sin(np.pi * np.outer(x, k)) @ weights


# ------------------------------------------------------------------
# Problems


def problem_heat_smooth_1d() -> ProblemSpec:
    return ProblemSpec(
        name="heat_smooth_1d",
        dim=1,
        lower=(0.0,),
        upper=(1.0,),
        coeffs=CoefficientField.constant(1.0),
        bc=BoundaryCondition.DIRICHLET,
        nonlin=zero_reaction(),
        u0=lambda p: np.sin(np.pi * _x(p)),
        final_time=0.1,
        beta_class=BetaClass.TWO,
        beta=2.0,
        exact=lambda p, t: np.exp(-(np.pi**2) * t) * np.sin(np.pi * _x(p)),
        description="u_t = u_xx, u0 = sin(pi x)",
    )


def problem_heat_nonsmooth_1d() -> ProblemSpec:
    return ProblemSpec(
        name="heat_nonsmooth_1d",
        dim=1,
        lower=(0.0,),
        upper=(1.0,),
        coeffs=CoefficientField.constant(1.0),
        bc=BoundaryCondition.DIRICHLET,
        nonlin=zero_reaction(),
        u0=step_indicator,
        final_time=0.1,
        beta_class=BetaClass.SUB1,
        beta=0.49,
        exact=step_heat_solution,
        description="u_t = u_xx, u0 = indicator of (1/4, 3/4)",
    )


def _semilinear_1d_coefficients() -> CoefficientField:
    return CoefficientField.constant(0.1, 0.5)


def problem_semilinear_1d(nonsmooth: bool = False) -> ProblemSpec:
    """u_t = 0.1 u_xx + 0.5 u_x + (1 - u) / (1 + u^2) with Dirichlet data, T = 1."""

    coeffs = _semilinear_1d_coefficients()
    c0 = garding_shift_for(coeffs, np.zeros((1, 1)))
    if nonsmooth:
        name, u0, beta_class, beta = "semilinear_nonsmooth_1d", step_indicator, BetaClass.SUB1, 0.49
    else:
        name, beta_class, beta = "semilinear_1d", BetaClass.TWO, 2.0

        def u0(p: NDArray[np.float64]) -> NDArray[np.float64]:
            x = _x(p)
            return x * (1.0 - x)

    return ProblemSpec(
        name=name,
        dim=1,
        lower=(0.0,),
        upper=(1.0,),
        coeffs=coeffs,
        bc=BoundaryCondition.DIRICHLET,
        nonlin=rational_reaction(),
        u0=u0,
        final_time=1.0,
        beta_class=beta_class,
        beta=beta,
        garding_shift=c0,
        description="advection-diffusion with rational reaction",
    )


def problem_semilinear_2d() -> ProblemSpec:
    coeffs = CoefficientField.constant([[0.1, 0.0], [0.0, 0.1]], [0.5, 0.3], dim=2)
    return ProblemSpec(
        name="semilinear_2d",
        dim=2,
        lower=(0.0, 0.0),
        upper=(1.0, 1.0),
        coeffs=coeffs,
        bc=BoundaryCondition.DIRICHLET,
        nonlin=rational_reaction(),
        u0=lambda p: np.sin(np.pi * p[:, 0]) * np.sin(np.pi * p[:, 1]),
        final_time=0.5,
        beta_class=BetaClass.TWO,
        beta=2.0,
        garding_shift=garding_shift_for(coeffs, np.zeros((1, 2))),
        default_cells=32,
        description="2D advection-diffusion with rational reaction on the unit square",
    )


def _cosine_bump(p: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.cos(np.pi * _x(p)) + 1.0


def problem_robin_1d(alpha0: float = 1.0) -> ProblemSpec:
    """Heat equation with Robin data; u0 = cos(pi x) + 1 is not Robin-compatible, so beta < 3/2."""

    return ProblemSpec(
        name="robin_1d",
        dim=1,
        lower=(0.0,),
        upper=(1.0,),
        coeffs=CoefficientField.constant(1.0),
        bc=BoundaryCondition.ROBIN,
        alpha0=alpha0,
        nonlin=zero_reaction(),
        u0=_cosine_bump,
        final_time=0.1,
        beta_class=BetaClass.ONE_TO_TWO,
        beta=1.49,
        description="u_t = u_xx with du/dn + alpha0 u = 0",
    )


def problem_neumann_1d() -> ProblemSpec:
    """Mass-conserving heat flow; u0 = cos(pi x) + 1 satisfies the Neumann condition."""

    return ProblemSpec(
        name="neumann_1d",
        dim=1,
        lower=(0.0,),
        upper=(1.0,),
        coeffs=CoefficientField.constant(1.0),
        bc=BoundaryCondition.NEUMANN,
        nonlin=zero_reaction(),
        u0=_cosine_bump,
        final_time=0.1,
        beta_class=BetaClass.TWO,
        beta=2.0,
        exact=lambda p, t: np.exp(-(np.pi**2) * t) * np.cos(np.pi * _x(p)) + 1.0,
        description="u_t = u_xx with du/dn = 0",
    )


PROBLEMS: dict[str, Callable[[], ProblemSpec]] = {
    "heat_smooth_1d": problem_heat_smooth_1d,
    "heat_nonsmooth_1d": problem_heat_nonsmooth_1d,
    "semilinear_1d": problem_semilinear_1d,
    "semilinear_nonsmooth_1d": lambda: problem_semilinear_1d(nonsmooth=True),
    "semilinear_2d": problem_semilinear_2d,
    "robin_1d": problem_robin_1d,
    "neumann_1d": problem_neumann_1d,
}


def problem_names() -> list[str]:
    return sorted(PROBLEMS)


def get_problem(name: str) -> ProblemSpec:
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ValidationError(
            f"Unknown problem '{name}'; available: {', '.join(problem_names())}",
            field="problem",
            value=name,
        ) from None
    return factory()
