"""Coefficient fields and bilinear form specifications."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..exceptions import CoefficientError, ValidationError
from ..types import BoundaryCondition

logger = logging.getLogger(__name__)

TensorField = Callable[[NDArray[np.float64]], NDArray[np.float64]]


@dataclass(frozen=True)
class CoefficientField:
    """Diffusion tensor q_ij and advection vector q_i as vectorized functions of position.

    ``diffusion`` maps points (P, dim) to tensors (P, dim, dim); ``advection`` maps
    points to vectors (P, dim). ``ellipticity`` is the stated lower bound c1 of the
    symmetric part of the diffusion tensor.
    """

    dim: int
    diffusion: TensorField
    ellipticity: float
    advection: TensorField | None = None

    def __post_init__(self) -> None:
        if self.ellipticity <= 0.0:
            raise ValidationError(
                "Ellipticity constant must be positive", field="ellipticity", value=self.ellipticity
            )

    @classmethod
    def constant(
        cls,
        diffusion: float | Sequence[Sequence[float]],
        advection: float | Sequence[float] | None = None,
        *,
        dim: int = 1,
        ellipticity: float | None = None,
    ) -> CoefficientField:
        """Spatially constant coefficients; scalars are expanded to isotropic tensors."""

        q = np.asarray(diffusion, dtype=float)
        tensor = q * np.eye(dim) if q.ndim == 0 else q.reshape(dim, dim)
        if ellipticity is None:
            ellipticity = float(np.min(np.linalg.eigvalsh(0.5 * (tensor + tensor.T))))

        advection_field: TensorField | None = None
        if advection is not None:
            velocity = np.broadcast_to(np.asarray(advection, dtype=float), (dim,)).copy()
            advection_field = _uniform_field(velocity)

        return cls(
            dim=dim,
            diffusion=_uniform_field(tensor),
            ellipticity=ellipticity,
            advection=advection_field,
        )

    def diffusion_at(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        values = np.asarray(self.diffusion(points), dtype=float)
        if values.shape != (len(points), self.dim, self.dim):
            raise ValidationError(
                "Diffusion field returned the wrong shape", field="diffusion", value=values.shape
            )
        return values

    def advection_at(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.advection is None:
            return np.zeros((len(points), self.dim))
        values = np.asarray(self.advection(points), dtype=float)
        if values.shape != (len(points), self.dim):
            raise ValidationError(
                "Advection field returned the wrong shape", field="advection", value=values.shape
            )
        return values

    @property
    def has_advection(self) -> bool:
        return self.advection is not None

    def sampled_ellipticity(self, points: NDArray[np.float64]) -> float:
        """Smallest eigenvalue of the symmetric diffusion part over the sample points."""

        q = self.diffusion_at(points)
        return float(np.min(np.linalg.eigvalsh(0.5 * (q + np.swapaxes(q, 1, 2)))))

    def advection_bound(self, points: NDArray[np.float64]) -> float:
        return float(np.max(np.linalg.norm(self.advection_at(points), axis=1), initial=0.0))

    def check(self, points: NDArray[np.float64], *, strict: bool = False) -> None:
        """Sampled ellipticity and boundedness check (singular-coefficient)."""

        smallest = self.sampled_ellipticity(points)
        finite = np.all(np.isfinite(self.diffusion_at(points))) and np.all(
            np.isfinite(self.advection_at(points))
        )
        if smallest >= self.ellipticity * (1.0 - 1e-12) and finite:
            return

        message = (
            f"singular-coefficient: sampled ellipticity {smallest:.3e} below stated "
            f"c1={self.ellipticity:.3e}"
            if finite
            else "singular-coefficient: coefficient field is not bounded on the samples"
        )
        if strict:
            raise CoefficientError(
                message, field="diffusion", value=smallest, details={"c1": self.ellipticity}
            )
        logger.warning(message)


def _uniform_field(value: NDArray[np.float64]) -> TensorField:
    def field(points: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.broadcast_to(value, (len(points), *value.shape))

    return field


def garding_shift_for(coeffs: CoefficientField, points: NDArray[np.float64]) -> float:
    """Young-inequality shift c0 = |q_adv|^2 / (4 c1) restoring coercivity."""

    bound = coeffs.advection_bound(points)
    return bound * bound / (4.0 * coeffs.ellipticity)


@dataclass(frozen=True)
class BilinearFormSpec:
    """Bilinear form a(u, v) with boundary treatment and Garding shift c0."""

    coeffs: CoefficientField
    bc: BoundaryCondition
    alpha0: float = 0.0
    garding_shift: float = 0.0
    strict_ellipticity: bool = False

    def __post_init__(self) -> None:
        if self.bc is BoundaryCondition.NEUMANN and self.alpha0 != 0.0:
            raise ValidationError(
                "Neumann boundary conditions require alpha0 = 0", field="alpha0", value=self.alpha0
            )
        if self.garding_shift < 0.0:
            raise ValidationError(
                "Garding shift must be nonnegative", field="garding_shift", value=self.garding_shift
            )

    @property
    def robin_coefficient(self) -> float:
        return self.alpha0 if self.bc is BoundaryCondition.ROBIN else 0.0
