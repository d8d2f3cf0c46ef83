"""Element quadrature rules in barycentric coordinates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..mesh import Mesh


@dataclass(frozen=True)
class QuadratureRule:
    """Barycentric points of shape (Q, dim + 1) and weights summing to one."""

    barycentric: NDArray[np.float64]
    weights: NDArray[np.float64]


def gauss_rule(dim: int) -> QuadratureRule:
    """2-point Gauss rule on intervals, symmetric 3-point rule on triangles."""

    if dim == 1:
        s = 0.5 / np.sqrt(3.0)
        xi = np.array([0.5 - s, 0.5 + s])
        return QuadratureRule(np.column_stack([1.0 - xi, xi]), np.full(2, 0.5))
    if dim == 2:
        a, b = 2.0 / 3.0, 1.0 / 6.0
        bary = np.array([[a, b, b], [b, a, b], [b, b, a]])
        return QuadratureRule(bary, np.full(3, 1.0 / 3.0))
    raise ValueError(f"No quadrature rule for dim={dim}")


def quadrature_points(mesh: Mesh, rule: QuadratureRule) -> NDArray[np.float64]:
    """Physical quadrature points of shape (n_elements, Q, dim)."""

    return np.einsum("qk,ekd->eqd", rule.barycentric, mesh.nodes[mesh.elements])


def evaluate_nodal(
    mesh: Mesh, nodal_values: NDArray[np.float64], rule: QuadratureRule
) -> NDArray[np.float64]:
    """Values of the P1 function with the given nodal values at the quadrature points."""

    return nodal_values[mesh.elements] @ rule.barycentric.T


def integrate_against_basis(
    mesh: Mesh, values: NDArray[np.float64], rule: QuadratureRule
) -> NDArray[np.float64]:
    """Load vector b_i = sum over elements of the quadrature of values * phi_i."""

    weighted = values * rule.weights * mesh.element_measures[:, None]
    local = weighted @ rule.barycentric
    return np.bincount(
        mesh.elements.ravel(), weights=local.ravel(), minlength=mesh.n_nodes
    ).astype(float)
