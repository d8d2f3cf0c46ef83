"""P1 finite element assembly of mass and stiffness matrices."""

from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray

from ..mesh import Mesh
from ..types import BoundaryCondition
from .forms import BilinearFormSpec

logger = logging.getLogger(__name__)


def free_dofs_for(mesh: Mesh, bc: BoundaryCondition) -> NDArray[np.int64]:
    """Unconstrained nodes: all nodes except Dirichlet boundary nodes."""

    everything = np.arange(mesh.n_nodes, dtype=np.int64)
    if bc is BoundaryCondition.DIRICHLET:
        return np.setdiff1d(everything, mesh.boundary_nodes)
    return everything


def p1_gradients(mesh: Mesh) -> NDArray[np.float64]:
    """Constant gradients of the element basis functions, shape (n_elements, dim + 1, dim)."""

    x = mesh.nodes[mesh.elements]
    jac = np.swapaxes(x[:, 1:] - x[:, :1], 1, 2)
    ref = np.vstack([-np.ones((1, mesh.dim)), np.eye(mesh.dim)])
    return np.einsum("ik,ekd->eid", ref, np.linalg.inv(jac))


def local_mass(mesh: Mesh) -> NDArray[np.float64]:
    """Exact element mass blocks measure / ((d+1)(d+2)) * (1 + delta_ij)."""

    d = mesh.dim
    pattern = (np.ones((d + 1, d + 1)) + np.eye(d + 1)) / ((d + 1) * (d + 2))
    return mesh.element_measures[:, None, None] * pattern


def lumped_mass_full(mesh: Mesh) -> NDArray[np.float64]:
    """Row sums of the consistent mass matrix, i.e. the integrals of the basis functions."""

    share = np.repeat(mesh.element_measures / (mesh.dim + 1), mesh.dim + 1)
    return np.bincount(mesh.elements.ravel(), weights=share, minlength=mesh.n_nodes)


def _scatter(mesh: Mesh, local: NDArray[np.float64]) -> sp.csr_matrix:
    k = mesh.dim + 1
    rows = np.repeat(mesh.elements, k, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, k)).ravel()
    return sp.coo_matrix(
        (local.ravel(), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)
    ).tocsr()


def restrict(matrix: sp.spmatrix, free_dofs: NDArray[np.int64]) -> sp.csr_matrix:
    return sp.csr_matrix(sp.csr_matrix(matrix)[free_dofs, :][:, free_dofs])


def assemble_mass(mesh: Mesh, free_dofs: NDArray[np.int64] | None = None) -> sp.csr_matrix:
    """Consistent mass matrix M_ij = (phi_i, phi_j) restricted to the free dofs."""

    full = _scatter(mesh, local_mass(mesh))
    if free_dofs is None:
        return full
    return restrict(full, free_dofs)


def _robin_matrix(mesh: Mesh, alpha0: float) -> sp.csr_matrix:
    """alpha0 times the boundary mass matrix on the boundary facets."""

    if mesh.dim == 1:
        nodes = mesh.facets[:, 0]
        values = np.full(len(nodes), alpha0)
        return sp.coo_matrix(
            (values, (nodes, nodes)), shape=(mesh.n_nodes, mesh.n_nodes)
        ).tocsr()

    lengths = np.linalg.norm(
        mesh.nodes[mesh.facets[:, 1]] - mesh.nodes[mesh.facets[:, 0]], axis=1
    )
    local = alpha0 * lengths[:, None, None] * np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
    rows = np.repeat(mesh.facets, 2, axis=1).ravel()
    cols = np.tile(mesh.facets, (1, 2)).ravel()
    return sp.coo_matrix(
        (local.ravel(), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)
    ).tocsr()


def assemble_stiffness(
    mesh: Mesh, spec: BilinearFormSpec, free_dofs: NDArray[np.int64] | None = None
) -> sp.csr_matrix:
    """Matrix of a(phi_j, phi_i) + c0 (phi_j, phi_i), including the Robin boundary term.

    Coefficients are sampled at element midpoints, which is exact for constant fields.
    """

    midpoints = mesh.nodes[mesh.elements].mean(axis=1)
    spec.coeffs.check(midpoints, strict=spec.strict_ellipticity)

    grads = p1_gradients(mesh)
    measures = mesh.element_measures
    q = spec.coeffs.diffusion_at(midpoints)
    # S_ij = |K| grad(phi_j) . q grad(phi_i)
    local = np.einsum("e,ejk,ekl,eil->eij", measures, grads, q, grads)

    if spec.coeffs.has_advection:
        b = spec.coeffs.advection_at(midpoints)
        transport = np.einsum("e,ek,ejk->ej", measures / (mesh.dim + 1), b, grads)
        local = local + transport[:, None, :]

    if spec.garding_shift:
        local = local + spec.garding_shift * local_mass(mesh)

    full = _scatter(mesh, local)
    if spec.robin_coefficient:
        full = full + _robin_matrix(mesh, spec.robin_coefficient)

    logger.debug(
        "Assembled stiffness: %d nodes, bc=%s, c0=%g",
        mesh.n_nodes,
        spec.bc.value,
        spec.garding_shift,
    )
    if free_dofs is None:
        return sp.csr_matrix(full)
    return restrict(full, free_dofs)
