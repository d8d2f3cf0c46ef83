"""Structured simplicial meshes of intervals and rectangles with uniform refinement."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .exceptions import ValidationError

logger = logging.getLogger(__name__)

INTERVAL_MARKERS = ("left", "right")
RECT_MARKERS = ("bottom", "right", "top", "left")

_BOUNDARY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Mesh:
    """Simplicial triangulation with boundary facet markers.

    ``nodes`` has shape (n_nodes, dim), ``elements`` holds counterclockwise node indices
    (2 per interval, 3 per triangle) and ``facets`` the boundary facets (1 node in 1D,
    2 in 2D) with one marker per facet. Meshes produced by :func:`refine_uniform` keep
    a reference to their parent and the parent-edge of every added node, which makes
    P1 prolongation exact.
    """

    dim: int
    nodes: NDArray[np.float64]
    elements: NDArray[np.int64]
    facets: NDArray[np.int64]
    facet_markers: tuple[str, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    parent: Mesh | None = None
    midpoint_parents: NDArray[np.int64] | None = None

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValidationError(
                "Only 1D and 2D meshes are supported", field="dim", value=self.dim
            )
        if self.nodes.ndim != 2 or self.nodes.shape[1] != self.dim:
            raise ValidationError(
                "Node array must have shape (n_nodes, dim)", field="nodes", value=self.nodes.shape
            )
        if self.elements.ndim != 2 or self.elements.shape[1] != self.dim + 1:
            raise ValidationError(
                "Element array must have dim + 1 columns",
                field="elements",
                value=self.elements.shape,
            )
        if len(self.facets) != len(self.facet_markers):
            raise ValidationError(
                "Every boundary facet needs exactly one marker",
                field="facet_markers",
                value=(len(self.facets), len(self.facet_markers)),
            )
        for array in (self.nodes, self.elements, self.facets, self.midpoint_parents):
            if array is not None:
                array.setflags(write=False)

    # ------------------------------------------------------------------
    # Geometry
    # ------------------------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def n_elements(self) -> int:
        return int(self.elements.shape[0])

    @property
    def boundary_facets(self) -> list[tuple[tuple[int, ...], str]]:
        return [
            (tuple(int(i) for i in facet), marker)
            for facet, marker in zip(self.facets, self.facet_markers)
        ]

    @property
    def domain_measure(self) -> float:
        return float(np.prod(np.subtract(self.upper, self.lower)))

    @cached_property
    def element_measures(self) -> NDArray[np.float64]:
        """Signed length (1D) or area (2D) of every element."""

        x = self.nodes[self.elements]
        if self.dim == 1:
            return x[:, 1, 0] - x[:, 0, 0]
        e1 = x[:, 1] - x[:, 0]
        e2 = x[:, 2] - x[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def h(self) -> float:
        """Maximal edge length over all elements."""

        x = self.nodes[self.elements]
        if self.dim == 1:
            return float(np.max(np.abs(x[:, 1, 0] - x[:, 0, 0])))
        lengths = [
            np.linalg.norm(x[:, (k + 1) % 3] - x[:, k], axis=1) for k in range(3)
        ]
        return float(np.max(lengths))

    @cached_property
    def boundary_nodes(self) -> NDArray[np.int64]:
        return np.unique(self.facets.ravel())

    def edges(self) -> NDArray[np.int64]:
        """Unique element edges as sorted node pairs (2D only)."""

        if self.dim != 2:
            raise ValidationError(
                "Edges are only defined for 2D meshes", field="dim", value=self.dim
            )
        local = self.elements[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)
        return np.unique(np.sort(local, axis=1), axis=0)

    # ------------------------------------------------------------------
    # Invariants
    # ------------------------------------------------------------------
    def validate(self) -> None:
        """Check the structural invariants, raising ValidationError on the first violation."""

        measures = self.element_measures
        if np.any(measures <= 0.0):
            bad = int(np.argmin(measures))
            raise ValidationError(
                "Element with non-positive measure",
                field="elements",
                value=bad,
                details={"measure": float(measures[bad])},
            )

        lower = np.asarray(self.lower)
        upper = np.asarray(self.upper)
        scale = float(np.max(upper - lower))
        facet_points = self.nodes[self.facets.ravel()]
        on_boundary = np.any(
            (np.abs(facet_points - lower) <= _BOUNDARY_TOL * scale)
            | (np.abs(facet_points - upper) <= _BOUNDARY_TOL * scale),
            axis=1,
        )
        if not np.all(on_boundary):
            raise ValidationError("Boundary facet node off the domain boundary", field="facets")

        if self.dim == 2:
            local = np.sort(self.elements[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2), axis=1)
            edges, counts = np.unique(local, axis=0, return_counts=True)
            if np.any(counts > 2):
                raise ValidationError("Edge shared by more than two elements", field="elements")
            boundary_edges = {tuple(edge) for edge, c in zip(edges.tolist(), counts) if c == 1}
            facet_edges = {tuple(sorted(facet)) for facet in self.facets.tolist()}
            if boundary_edges != facet_edges:
                raise ValidationError(
                    "Boundary facets do not match the edges owned by a single element",
                    field="facets",
                    details={"n_boundary_edges": len(boundary_edges), "n_facets": len(facet_edges)},
                )

    # ------------------------------------------------------------------
    # Debug dump
    # ------------------------------------------------------------------
    def dumps(self) -> str:
        """Plain-text dump: header, node coordinates, 0-based elements, facets with marker."""

        lines = [f"{self.dim} {self.n_nodes} {self.n_elements} {len(self.facets)}"]
        lines.extend(" ".join(format(c, ".17g") for c in node) for node in self.nodes)
        lines.extend(" ".join(str(int(i)) for i in element) for element in self.elements)
        lines.extend(
            " ".join(str(int(i)) for i in facet) + f" {marker}"
            for facet, marker in zip(self.facets, self.facet_markers)
        )
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")


# ----------------------------------------------------------------------
# Builders
# ----------------------------------------------------------------------
def build_interval_mesh(a: float, b: float, n: int) -> Mesh:
    """Uniform mesh of [a, b] with n elements."""

    if not a < b:
        raise ValidationError("invalid-range: interval needs a < b", field="a", value=(a, b))
    if n < 1:
        raise ValidationError("invalid-size: at least one element required", field="n", value=n)

    nodes = np.linspace(a, b, n + 1).reshape(-1, 1)
    idx = np.arange(n, dtype=np.int64)
    elements = np.column_stack([idx, idx + 1])
    facets = np.array([[0], [n]], dtype=np.int64)
    mesh = Mesh(
        dim=1,
        nodes=nodes,
        elements=elements,
        facets=facets,
        facet_markers=INTERVAL_MARKERS,
        lower=(float(a),),
        upper=(float(b),),
    )
    logger.debug("Built interval mesh [%g, %g] with %d elements", a, b, n)
    return mesh


def build_rect_mesh(
    nx: int, ny: int, corners: Sequence[Sequence[float]] = ((0.0, 0.0), (1.0, 1.0))
) -> Mesh:
    """Structured triangulation of an axis-aligned rectangle.

    Each cell is split along its lower-left to upper-right diagonal.
    """

    (x0, y0), (x1, y1) = (tuple(map(float, corner)) for corner in corners)
    if not (x0 < x1 and y0 < y1):
        raise ValidationError(
            "degenerate-rectangle: corners must satisfy x0 < x1 and y0 < y1",
            field="corners",
            value=((x0, y0), (x1, y1)),
        )
    if nx < 1 or ny < 1:
        raise ValidationError("invalid-size: nx and ny must be >= 1", field="nx", value=(nx, ny))

    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])

    def node(i: NDArray[np.int64] | int, j: NDArray[np.int64] | int) -> NDArray[np.int64]:
        return np.asarray(j * (nx + 1) + i, dtype=np.int64)

    ci, cj = (a.ravel() for a in np.meshgrid(np.arange(nx), np.arange(ny)))
    n00, n10, n01, n11 = node(ci, cj), node(ci + 1, cj), node(ci, cj + 1), node(ci + 1, cj + 1)
    lower_tri = np.column_stack([n00, n10, n11])
    upper_tri = np.column_stack([n00, n11, n01])
    elements = np.stack([lower_tri, upper_tri], axis=1).reshape(-1, 3)

    ix = np.arange(nx)
    jy = np.arange(ny)
    sides = [
        np.column_stack([node(ix, 0), node(ix + 1, 0)]),
        np.column_stack([node(nx, jy), node(nx, jy + 1)]),
        np.column_stack([node(ix + 1, ny), node(ix, ny)]),
        np.column_stack([node(0, jy + 1), node(0, jy)]),
    ]
    facets = np.vstack(sides)
    markers = tuple(
        marker for marker, side in zip(RECT_MARKERS, sides) for _ in range(len(side))
    )

    mesh = Mesh(
        dim=2,
        nodes=nodes,
        elements=elements,
        facets=facets,
        facet_markers=markers,
        lower=(x0, y0),
        upper=(x1, y1),
    )
    logger.debug("Built %dx%d rectangle mesh with %d triangles", nx, ny, mesh.n_elements)
    return mesh


def refine_uniform(mesh: Mesh) -> Mesh:
    """Bisect every interval (1D) or red-refine every triangle (2D).

    Parent nodes keep their indices; the node created on parent edge (p, q) is placed
    at its midpoint and recorded in ``midpoint_parents``.
    """

    n = mesh.n_nodes
    if mesh.dim == 1:
        parents = np.asarray(mesh.elements, dtype=np.int64)
        mid = n + np.arange(mesh.n_elements, dtype=np.int64)
        a, b = parents[:, 0], parents[:, 1]
        elements = np.stack(
            [np.column_stack([a, mid]), np.column_stack([mid, b])], axis=1
        ).reshape(-1, 2)
        facets = np.array(mesh.facets, dtype=np.int64)
        markers = mesh.facet_markers
    else:
        local = np.sort(mesh.elements[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2), axis=1)
        parents, inverse = np.unique(local, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1, 3)
        a, b, c = mesh.elements.T
        m_ab, m_bc, m_ca = (n + inverse[:, k] for k in range(3))
        elements = np.stack(
            [
                np.column_stack([a, m_ab, m_ca]),
                np.column_stack([m_ab, b, m_bc]),
                np.column_stack([m_ca, m_bc, c]),
                np.column_stack([m_ab, m_bc, m_ca]),
            ],
            axis=1,
        ).reshape(-1, 3)

        keys = parents[:, 0] * n + parents[:, 1]
        facet_sorted = np.sort(mesh.facets, axis=1)
        facet_mid = n + np.searchsorted(keys, facet_sorted[:, 0] * n + facet_sorted[:, 1])
        p, q = mesh.facets[:, 0], mesh.facets[:, 1]
        facets = np.stack(
            [np.column_stack([p, facet_mid]), np.column_stack([facet_mid, q])], axis=1
        ).reshape(-1, 2)
        markers = tuple(marker for marker in mesh.facet_markers for _ in range(2))

    nodes = np.vstack([mesh.nodes, 0.5 * (mesh.nodes[parents[:, 0]] + mesh.nodes[parents[:, 1]])])
    refined = Mesh(
        dim=mesh.dim,
        nodes=nodes,
        elements=np.asarray(elements, dtype=np.int64),
        facets=np.asarray(facets, dtype=np.int64),
        facet_markers=markers,
        lower=mesh.lower,
        upper=mesh.upper,
        parent=mesh,
        midpoint_parents=np.asarray(parents, dtype=np.int64),
    )
    logger.debug(
        "Refined mesh: %d -> %d elements, h %.3e -> %.3e",
        mesh.n_elements,
        refined.n_elements,
        mesh.h,
        refined.h,
    )
    return refined


def prolong(values: NDArray[np.float64], coarse: Mesh, fine: Mesh) -> NDArray[np.float64]:
    """P1 interpolation of nodal values from ``coarse`` onto a descendant mesh ``fine``."""

    chain: list[Mesh] = []
    current: Mesh | None = fine
    while current is not None and current is not coarse:
        chain.append(current)
        current = current.parent
    if current is None:
        raise ValidationError(
            "dimension-mismatch: fine mesh is not a refinement of the coarse mesh",
            field="fine",
        )
    if len(values) != coarse.n_nodes:
        raise ValidationError(
            "dimension-mismatch: nodal vector does not match the coarse mesh",
            field="values",
            value=(len(values), coarse.n_nodes),
        )

    result = np.asarray(values, dtype=float)
    for level in reversed(chain):
        pairs = level.midpoint_parents
        assert pairs is not None
        result = np.concatenate([result, 0.5 * (result[pairs[:, 0]] + result[pairs[:, 1]])])
    return result
