"""Discrete operators: projection P_h, operator A_h and the discrete L2 norm."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numpy.typing import NDArray

from ..exceptions import SolverError, ValidationError
from ..mesh import Mesh
from ..types import DofVector, MassMode, PointFunction
from .assembly import (
    assemble_mass,
    assemble_stiffness,
    free_dofs_for,
    lumped_mass_full,
)
from .forms import BilinearFormSpec
from .quadrature import (
    evaluate_nodal,
    gauss_rule,
    integrate_against_basis,
    quadrature_points,
)

logger = logging.getLogger(__name__)

MASS_SOLVE_RTOL = 1e-12
COERCIVITY_TOL = 1e-10
_DENSE_EIG_LIMIT = 400


@dataclass(frozen=True, eq=False)
class DiscreteOperators:
    """Assembled matrices on the free dofs of a mesh.

    ``stiffness`` already contains the Garding shift c0 M and the Robin boundary term,
    so that A_h = -M^{-1} S. In lumped mode the shift is taken against the lumped
    diagonal instead (see ``stiffness_for``), so A_h + c0 I does not depend on c0.
    """

    mesh: Mesh
    form: BilinearFormSpec
    mass: sp.csr_matrix
    lumped_mass: NDArray[np.float64]
    stiffness: sp.csr_matrix
    free_dofs: NDArray[np.int64]

    @property
    def n(self) -> int:
        return int(len(self.free_dofs))

    @cached_property
    def preconditioner(self) -> spla.LinearOperator:
        """Jacobi preconditioner for the mass solves."""

        inv_diag = 1.0 / self.mass.diagonal()
        return spla.LinearOperator(self.mass.shape, matvec=lambda x: inv_diag * x)

    @cached_property
    def lumped_stiffness(self) -> sp.csr_matrix:
        """``stiffness`` with the shift c0 M replaced by c0 D."""

        c0 = self.form.garding_shift
        if not c0:
            return self.stiffness
        return sp.csr_matrix(self.stiffness + c0 * (sp.diags(self.lumped_mass) - self.mass))

    def stiffness_for(self, mass_mode: MassMode) -> sp.csr_matrix:
        """S with the shift assembled against the mass matrix that A_h inverts."""

        if mass_mode is MassMode.LUMPED:
            return self.lumped_stiffness
        return self.stiffness

    def prepare(self) -> None:
        """Build the cached solver data before the operators are shared between threads."""

        _ = self.preconditioner
        _ = self.lumped_stiffness

    def expand(self, v: DofVector) -> NDArray[np.float64]:
        """Nodal values on the whole mesh (zero at constrained nodes)."""

        self.check_length(v)
        full = np.zeros(self.mesh.n_nodes)
        full[self.free_dofs] = v
        return full

    def restrict(self, nodal: NDArray[np.float64]) -> DofVector:
        if len(nodal) != self.mesh.n_nodes:
            raise ValidationError(
                "dimension-mismatch: nodal vector does not match the mesh",
                field="nodal",
                value=(len(nodal), self.mesh.n_nodes),
            )
        return np.asarray(nodal, dtype=float)[self.free_dofs]

    def check_length(self, v: DofVector) -> None:
        if np.shape(v) != (self.n,):
            raise ValidationError(
                "dimension-mismatch: dof vector has the wrong length",
                field="v",
                value=np.shape(v),
                details={"expected": self.n},
            )

    def mass_solve(self, rhs: DofVector, *, stage: str = "mass-solve") -> DofVector:
        """Solve M x = rhs with conjugate gradients to relative residual 1e-12."""

        if not np.any(rhs):
            return np.zeros(self.n)
        iterations = 0

        def count(_xk: NDArray[np.float64]) -> None:
            nonlocal iterations
            iterations += 1

        x, info = spla.cg(
            self.mass,
            rhs,
            rtol=MASS_SOLVE_RTOL,
            atol=0.0,
            maxiter=10 * self.n + 100,
            M=self.preconditioner,
            callback=count,
        )
        if info != 0:
            residual = float(np.linalg.norm(self.mass @ x - rhs) / np.linalg.norm(rhs))
            raise SolverError(
                "solver-nonconvergence: CG on the mass matrix did not converge",
                stage=stage,
                iterations=iterations,
                residual=residual,
            )
        return x

    def quadrature_values(self, v: DofVector) -> NDArray[np.float64]:
        """Values of the finite element function v at the Gauss points, shape (E, Q)."""

        return evaluate_nodal(self.mesh, self.expand(v), gauss_rule(self.mesh.dim))

    def project_quadrature_values(self, values: NDArray[np.float64]) -> DofVector:
        """P_h of a function known at the Gauss points."""

        load = integrate_against_basis(self.mesh, values, gauss_rule(self.mesh.dim))
        return self.mass_solve(load[self.free_dofs], stage="l2-projection")


def build_operators(mesh: Mesh, form: BilinearFormSpec) -> DiscreteOperators:
    """Assemble mass, lumped mass and stiffness on the free dofs of ``mesh``."""

    free = free_dofs_for(mesh, form.bc)
    ops = DiscreteOperators(
        mesh=mesh,
        form=form,
        mass=assemble_mass(mesh, free),
        lumped_mass=lumped_mass_full(mesh)[free],
        stiffness=assemble_stiffness(mesh, form, free),
        free_dofs=free,
    )
    logger.info(
        "Assembled operators: dim=%d, %d dofs, h=%.4e, bc=%s",
        mesh.dim,
        ops.n,
        mesh.h,
        form.bc.value,
    )
    return ops


def l2_project(g: PointFunction, ops: DiscreteOperators) -> DofVector:
    """Coefficients of P_h g, solving M c = (g, phi_i) with Gauss quadrature."""

    points = quadrature_points(ops.mesh, gauss_rule(ops.mesh.dim))
    n_elements, n_quad, dim = points.shape
    values = np.asarray(g(points.reshape(-1, dim)), dtype=float).reshape(n_elements, n_quad)
    return ops.project_quadrature_values(values)


def interpolate(g: PointFunction, ops: DiscreteOperators) -> DofVector:
    """Nodal interpolant of g on the free dofs."""

    return np.asarray(g(ops.mesh.nodes[ops.free_dofs]), dtype=float)


def apply_Ah(  # noqa: N802
    ops: DiscreteOperators, v: DofVector, mass_mode: MassMode = MassMode.LUMPED
) -> DofVector:
    """Action of A_h = -M^{-1} S on a dof vector."""

    ops.check_length(v)
    rhs = -(ops.stiffness_for(mass_mode) @ v)
    if mass_mode is MassMode.LUMPED:
        return rhs / ops.lumped_mass
    return ops.mass_solve(rhs, stage="apply-Ah")


def l2_norm(ops: DiscreteOperators, v: DofVector) -> float:
    """sqrt(v^T M v) with the consistent mass matrix."""

    ops.check_length(v)
    return float(np.sqrt(max(float(v @ (ops.mass @ v)), 0.0)))


def dense_operator(ops: DiscreteOperators, mass_mode: MassMode = MassMode.LUMPED) -> NDArray:
    """Explicit A_h as a dense matrix; only meant for small oracle checks."""

    stiffness = ops.stiffness_for(mass_mode).toarray()
    if mass_mode is MassMode.LUMPED:
        return -stiffness / ops.lumped_mass[:, None]
    return -scipy.linalg.solve(ops.mass.toarray(), stiffness, assume_a="pos")


def coercivity_margin(ops: DiscreteOperators) -> float:
    """Smallest eigenvalue of the symmetric part of S on the free dofs."""

    sym = 0.5 * (ops.stiffness + ops.stiffness.T)
    if ops.n <= _DENSE_EIG_LIMIT:
        return float(np.min(np.linalg.eigvalsh(sym.toarray())))
    return float(spla.eigsh(sym.tocsc(), k=1, which="SA", return_eigenvectors=False)[0])


def check_coercivity(ops: DiscreteOperators, tol: float = COERCIVITY_TOL) -> float:
    """Verify that the shifted form is coercive; returns the margin."""

    margin = coercivity_margin(ops)
    if margin < -tol:
        raise ValidationError(
            "Shifted bilinear form is not coercive; increase the Garding shift",
            field="garding_shift",
            value=ops.form.garding_shift,
            details={"min_eigenvalue": margin},
        )
    return margin


def write_coo(matrix: sp.spmatrix, path: str | Path) -> None:
    """Write a sparse matrix as (row, col, value) text lines."""

    coo = sp.coo_matrix(matrix)
    lines = [f"{r} {c} {v:.17g}" for r, c, v in zip(coo.row, coo.col, coo.data)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
