"""Tests for mesh construction, refinement and prolongation."""

import numpy as np
import pytest

from erem_fem.exceptions import ValidationError
from erem_fem.mesh import (
    build_interval_mesh,
    build_rect_mesh,
    prolong,
    refine_uniform,
)


class TestIntervalMesh:
    """Test uniform interval meshes."""

    def test_four_elements(self) -> None:
        mesh = build_interval_mesh(0.0, 1.0, 4)
        assert mesh.n_nodes == 5
        assert mesh.n_elements == 4
        np.testing.assert_allclose(mesh.nodes[:, 0], [0.0, 0.25, 0.5, 0.75, 1.0])
        assert mesh.h == pytest.approx(0.25)
        assert [marker for _, marker in mesh.boundary_facets] == ["left", "right"]
        assert [facet for facet, _ in mesh.boundary_facets] == [(0,), (4,)]

    def test_single_element(self) -> None:
        mesh = build_interval_mesh(0.0, 1.0, 1)
        assert mesh.n_elements == 1
        assert mesh.h == pytest.approx(1.0)

    def test_symmetric_interval(self) -> None:
        mesh = build_interval_mesh(-1.0, 1.0, 8)
        assert mesh.n_elements == 8
        assert mesh.h == pytest.approx(0.25)
        assert mesh.element_measures.sum() == pytest.approx(2.0, rel=1e-12)

    def test_invalid_range(self) -> None:
        with pytest.raises(ValidationError, match="invalid-range"):
            build_interval_mesh(1.0, 1.0, 4)

    def test_invalid_size(self) -> None:
        with pytest.raises(ValidationError, match="invalid-size") as exc_info:
            build_interval_mesh(0.0, 1.0, 0)
        assert exc_info.value.field == "n"


class TestRectMesh:
    """Test structured triangulations of rectangles."""

    def test_unit_square_single_cell(self) -> None:
        mesh = build_rect_mesh(1, 1)
        assert mesh.n_nodes == 4
        assert mesh.n_elements == 2
        assert mesh.element_measures.sum() == pytest.approx(1.0, rel=1e-12)

    def test_two_by_two_areas(self) -> None:
        mesh = build_rect_mesh(2, 2)
        assert mesh.n_elements == 8
        np.testing.assert_allclose(mesh.element_measures, 1.0 / 8.0)

    def test_h_is_cell_diagonal(self) -> None:
        mesh = build_rect_mesh(4, 4)
        assert mesh.h == pytest.approx(np.sqrt(2.0) / 4.0)

    def test_positive_orientation_and_validation(self) -> None:
        mesh = build_rect_mesh(3, 2, ((0.0, -1.0), (2.0, 1.0)))
        assert np.all(mesh.element_measures > 0)
        assert mesh.element_measures.sum() == pytest.approx(4.0, rel=1e-12)
        mesh.validate()

    def test_facet_count(self) -> None:
        mesh = build_rect_mesh(2, 3)
        assert len(mesh.boundary_facets) == 2 * (2 + 3)
        assert {marker for _, marker in mesh.boundary_facets} == {"bottom", "right", "top", "left"}

    def test_degenerate_rectangle(self) -> None:
        with pytest.raises(ValidationError, match="degenerate-rectangle"):
            build_rect_mesh(2, 2, ((0.0, 0.0), (1.0, 0.0)))


class TestRefinement:
    """Test uniform refinement."""

    def test_interval_bisection(self) -> None:
        coarse = build_interval_mesh(0.0, 1.0, 4)
        fine = refine_uniform(coarse)
        assert fine.n_elements == 8
        assert fine.h == pytest.approx(0.125)
        assert len(fine.boundary_facets) == 2
        np.testing.assert_array_equal(fine.nodes[: coarse.n_nodes], coarse.nodes)
        assert np.all(fine.element_measures > 0)

    def test_red_refinement(self) -> None:
        coarse = build_rect_mesh(2, 2)
        fine = refine_uniform(coarse)
        assert fine.n_elements == 32
        assert fine.h == pytest.approx(coarse.h / 2)
        assert fine.element_measures.sum() == pytest.approx(1.0, rel=1e-12)
        np.testing.assert_array_equal(fine.nodes[: coarse.n_nodes], coarse.nodes)
        fine.validate()

    def test_facets_double_per_level(self) -> None:
        mesh = build_rect_mesh(2, 3)
        for _ in range(2):
            mesh = refine_uniform(mesh)
        assert len(mesh.boundary_facets) == 2 * (2 + 3) * 4
        mesh.validate()

    def test_refined_mesh_is_similar(self) -> None:
        coarse = build_rect_mesh(1, 1)
        fine = refine_uniform(coarse)
        np.testing.assert_allclose(fine.element_measures, 0.5 / 4)


def test_prolong_reproduces_linear_functions() -> None:
    coarse = build_rect_mesh(2, 2)
    fine = refine_uniform(refine_uniform(coarse))

    def linear(points: np.ndarray) -> np.ndarray:
        return 1.0 + 2.0 * points[:, 0] - 3.0 * points[:, 1]

    prolonged = prolong(linear(coarse.nodes), coarse, fine)
    np.testing.assert_allclose(prolonged, linear(fine.nodes), atol=1e-14)


def test_prolong_rejects_unrelated_meshes() -> None:
    coarse = build_interval_mesh(0.0, 1.0, 4)
    other = build_interval_mesh(0.0, 1.0, 8)
    with pytest.raises(ValidationError, match="dimension-mismatch"):
        prolong(np.zeros(coarse.n_nodes), coarse, other)


def test_mesh_arrays_are_read_only() -> None:
    mesh = build_interval_mesh(0.0, 1.0, 2)
    with pytest.raises(ValueError):
        mesh.nodes[0, 0] = 5.0


def test_dump_header(tmp_path) -> None:
    mesh = build_rect_mesh(1, 1)
    text = mesh.dumps()
    assert text.splitlines()[0] == "2 4 2 4"
    assert text.splitlines()[-1].endswith("left")
    path = tmp_path / "mesh.txt"
    mesh.write(path)
    assert path.read_text(encoding="utf-8") == text
