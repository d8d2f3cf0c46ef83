"""Pointwise (Nemytskii) reaction terms f with their first two derivatives."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..exceptions import ValidationError
from ..types import ScalarFunction

logger = logging.getLogger(__name__)

DERIVATIVE_CHECK_TOL = 1e-6
_FD_STEP = 1e-5

# sup |f'| for f(u) = (1 - u) / (1 + u^2), attained at u = 2 - sqrt(3)
RATIONAL_LIPSCHITZ = 1.275


@dataclass(frozen=True)
class NonlinearTerm:
    """Reaction f with derivatives df, d2f and a global Lipschitz bound.

    ``affine`` marks terms with f'' == 0, for which the exponential Rosenbrock step is exact.
    """

    f: ScalarFunction
    df: ScalarFunction
    d2f: ScalarFunction
    lipschitz_bound: float
    name: str = "custom"
    affine: bool = False
    globally_lipschitz: bool = True

    def __post_init__(self) -> None:
        if self.lipschitz_bound < 0 or math.isnan(self.lipschitz_bound):
            raise ValidationError(
                "lipschitz_bound must be nonnegative",
                field="lipschitz_bound",
                value=self.lipschitz_bound,
            )
        if self.globally_lipschitz and math.isinf(self.lipschitz_bound):
            raise ValidationError(
                "A globally Lipschitz term needs a finite bound",
                field="lipschitz_bound",
                value=self.lipschitz_bound,
            )

    def __call__(self, u: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.f(u)

    def shifted(self, c0: float) -> NonlinearTerm:
        """f(u) + c0 u, the compensation for a Garding shift c0 M in the stiffness."""

        if c0 == 0:
            return self
        f, df = self.f, self.df
        return NonlinearTerm(
            f=lambda u: f(u) + c0 * u,
            df=lambda u: df(u) + c0,
            d2f=self.d2f,
            lipschitz_bound=self.lipschitz_bound + abs(c0),
            name=f"{self.name}+{c0:g}u",
            affine=self.affine,
            globally_lipschitz=self.globally_lipschitz,
        )

    def check_lipschitz(
        self, *, radius: float = 10.0, samples: int = 2000, seed: int = 0
    ) -> float:
        """Largest sampled difference quotient on [-radius, radius]; must not exceed L."""

        rng = np.random.default_rng(seed)
        a, b = rng.uniform(-radius, radius, size=(2, samples))
        keep = np.abs(a - b) > 1e-8
        ratios = np.abs(self.f(a[keep]) - self.f(b[keep])) / np.abs(a[keep] - b[keep])
        observed = float(ratios.max(initial=0.0))
        if observed > self.lipschitz_bound * (1.0 + 1e-9) + 1e-12:
            raise ValidationError(
                f"Lipschitz bound of {self.name} violated on samples",
                field="lipschitz_bound",
                value=self.lipschitz_bound,
                details={"observed": observed},
            )
        return observed

    def check_derivatives(
        self, points: NDArray[np.float64], tol: float = DERIVATIVE_CHECK_TOL
    ) -> float:
        """Compare df and d2f to central differences; returns the worst relative defect."""

        u = np.asarray(points, dtype=float)
        worst = 0.0
        for func, deriv, label in ((self.f, self.df, "df"), (self.df, self.d2f, "d2f")):
            fd = (func(u + _FD_STEP) - func(u - _FD_STEP)) / (2 * _FD_STEP)
            exact = np.broadcast_to(np.asarray(deriv(u), dtype=float), u.shape)
            defect = np.abs(fd - exact) / np.maximum(np.abs(exact), 1.0)
            worst_here = float(defect.max(initial=0.0))
            if worst_here > tol:
                raise ValidationError(
                    f"{label} of {self.name} disagrees with finite differences",
                    field=label,
                    value=worst_here,
                    details={"tol": tol},
                )
            worst = max(worst, worst_here)
        return worst


def _zeros_like(u: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.zeros_like(np.asarray(u, dtype=float))


def rational_reaction() -> NonlinearTerm:
    """f(u) = (1 - u) / (1 + u^2)."""

    def f(u: NDArray[np.float64]) -> NDArray[np.float64]:
        return (1.0 - u) / (1.0 + u * u)

    def df(u: NDArray[np.float64]) -> NDArray[np.float64]:
        return (u * u - 2.0 * u - 1.0) / (1.0 + u * u) ** 2

    def d2f(u: NDArray[np.float64]) -> NDArray[np.float64]:
        return 2.0 * (-(u**3) + 3.0 * u * u + 3.0 * u - 1.0) / (1.0 + u * u) ** 3

    return NonlinearTerm(f=f, df=df, d2f=d2f, lipschitz_bound=RATIONAL_LIPSCHITZ, name="rational")


def linear_reaction(c: float) -> NonlinearTerm:
    """f(u) = c u."""

    return NonlinearTerm(
        f=lambda u: c * np.asarray(u, dtype=float),
        df=lambda u: np.full(np.shape(u), float(c)),
        d2f=_zeros_like,
        lipschitz_bound=abs(c),
        name=f"linear({c:g})",
        affine=True,
    )


def constant_reaction(c: float) -> NonlinearTerm:
    return NonlinearTerm(
        f=lambda u: np.full(np.shape(u), float(c)),
        df=_zeros_like,
        d2f=_zeros_like,
        lipschitz_bound=0.0,
        name=f"constant({c:g})",
        affine=True,
    )


def zero_reaction() -> NonlinearTerm:
    return NonlinearTerm(
        f=_zeros_like,
        df=_zeros_like,
        d2f=_zeros_like,
        lipschitz_bound=0.0,
        name="zero",
        affine=True,
    )


def quadratic_reaction() -> NonlinearTerm:
    """f(u) = u^2; only locally Lipschitz, used for scalar scheme checks."""

    return NonlinearTerm(
        f=lambda u: np.asarray(u, dtype=float) ** 2,
        df=lambda u: 2.0 * np.asarray(u, dtype=float),
        d2f=lambda u: np.full(np.shape(u), 2.0),
        lipschitz_bound=math.inf,
        name="quadratic",
        globally_lipschitz=False,
    )
