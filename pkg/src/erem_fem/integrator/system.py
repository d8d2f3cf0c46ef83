"""Semidiscrete systems du/dt = A_h u + P_h F(u) and their linearization."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse.linalg as spla
from numpy.typing import ArrayLike, NDArray

from ..base import SemilinearSystemBase
from ..exceptions import BlowUpError, ValidationError
from ..fem import DiscreteOperators, apply_Ah, l2_norm
from ..matfunc import OperatorAction
from ..types import DofVector, MassMode, NemytskiiMode
from .nonlinear import NonlinearTerm

logger = logging.getLogger(__name__)


def _ensure_finite(values: NDArray[np.float64], stage: str) -> NDArray[np.float64]:
    if not np.all(np.isfinite(values)):
        raise BlowUpError(
            f"Non-finite values in {stage}",
            details={"stage": stage, "bad_entries": int(np.count_nonzero(~np.isfinite(values)))},
        )
    return values


@dataclass(frozen=True, eq=False)
class SemilinearSystem(SemilinearSystemBase):
    """Finite element semidiscretization.

    ``nonlin`` must already include the +c0 u compensation of the Garding shift that is
    built into ``ops.stiffness``.
    """

    ops: DiscreteOperators
    nonlin: NonlinearTerm
    mass_mode: MassMode = MassMode.LUMPED
    nemytskii_mode: NemytskiiMode = NemytskiiMode.NODAL

    @property
    def dim(self) -> int:
        return self.ops.n

    @cached_property
    def _linear(self) -> OperatorAction:
        ops, mode = self.ops, self.mass_mode
        norm_estimate = operator_norm_estimate(ops, mode)
        return OperatorAction(
            dim=ops.n, apply=lambda v: apply_Ah(ops, v, mode), norm_estimate=norm_estimate
        )

    def linear_action(self) -> OperatorAction:
        return self._linear

    def nonlinear(self, u: DofVector) -> DofVector:
        self.ops.check_length(u)
        if self.nemytskii_mode is NemytskiiMode.NODAL:
            return self.nonlin(u)
        values = self.nonlin(self.ops.quadrature_values(u))
        return self.ops.project_quadrature_values(values)

    def jacobian(self, u: DofVector) -> OperatorAction:
        self.ops.check_length(u)
        if self.nemytskii_mode is NemytskiiMode.NODAL:
            diag = np.asarray(self.nonlin.df(u), dtype=float)
            return OperatorAction(
                dim=self.dim, apply=lambda v: diag * v, norm_estimate=float(np.abs(diag).max())
            )

        ops = self.ops
        weights = np.asarray(self.nonlin.df(ops.quadrature_values(u)), dtype=float)

        def apply(v: DofVector) -> DofVector:
            return ops.project_quadrature_values(weights * ops.quadrature_values(v))

        return OperatorAction(dim=self.dim, apply=apply, norm_estimate=float(np.abs(weights).max()))

    def norm(self, v: DofVector) -> float:
        return l2_norm(self.ops, v)


class DenseSemilinearSystem(SemilinearSystemBase):
    """du/dt = A u + f(u) with an explicit small matrix and a pointwise f."""

    def __init__(self, matrix: ArrayLike, nonlin: NonlinearTerm):
        a = np.atleast_2d(np.asarray(matrix, dtype=float))
        if a.shape[0] != a.shape[1]:
            raise ValidationError("Matrix must be square", field="matrix", value=a.shape)
        self.matrix = a
        self.nonlin = nonlin
        self._linear = OperatorAction.from_matrix(a)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def linear_action(self) -> OperatorAction:
        return self._linear

    def nonlinear(self, u: DofVector) -> DofVector:
        return self.nonlin(np.asarray(u, dtype=float))

    def jacobian(self, u: DofVector) -> OperatorAction:
        diag = np.asarray(self.nonlin.df(np.asarray(u, dtype=float)), dtype=float)
        return OperatorAction(
            dim=self.dim, apply=lambda v: diag * v, norm_estimate=float(np.abs(diag).max())
        )

    def norm(self, v: DofVector) -> float:
        return float(np.linalg.norm(v))


# ------------------------------------------------------------------
# Operations


def operator_norm_estimate(ops: DiscreteOperators, mass_mode: MassMode) -> float:
    """1-norm of A_h for the given mass mode.

    Exact column sums of |D^{-1} S| when lumped; Hager's estimate through mass solves
    when consistent.
    """

    stiffness = ops.stiffness_for(mass_mode)
    if mass_mode is MassMode.LUMPED:
        return float(abs(stiffness).multiply(1.0 / ops.lumped_mass[:, None]).sum(axis=0).max())
    linear = spla.LinearOperator(
        (ops.n, ops.n),
        matvec=lambda x: apply_Ah(ops, np.ravel(x), mass_mode),
        rmatvec=lambda x: -(stiffness.T @ ops.mass_solve(np.ravel(x))),
    )
    # t=1 keeps the estimate deterministic
    return float(spla.onenormest(linear, t=1))


def nemytskii_apply(system: SemilinearSystemBase, u: DofVector) -> DofVector:
    """P_h F(u); raises BlowUpError on non-finite output."""

    return _ensure_finite(np.asarray(system.nonlinear(u), dtype=float), "nonlinearity")


def jacobian_action(system: SemilinearSystemBase, u_n: DofVector) -> OperatorAction:
    """K_n = A_h + J_n with J_n the derivative of P_h F frozen at u_n."""

    return system.linear_action().plus(system.jacobian(u_n))


def remainder_Gn(  # noqa: N802
    system: SemilinearSystemBase,
    u_n: DofVector,
    u: DofVector,
    jac: OperatorAction | None = None,
) -> DofVector:
    """G_n(u) = P_h F(u) - J_n u with J_n frozen at u_n."""

    jac = jac if jac is not None else system.jacobian(u_n)
    return nemytskii_apply(system, u) - jac(np.asarray(u, dtype=float))
