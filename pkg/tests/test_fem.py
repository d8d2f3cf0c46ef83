"""Tests for P1 assembly, projection and the discrete operator."""

import numpy as np
import pytest
import scipy.linalg

from erem_fem.exceptions import CoefficientError, ValidationError
from erem_fem.fem import (
    BilinearFormSpec,
    CoefficientField,
    apply_Ah,
    assemble_mass,
    assemble_stiffness,
    build_operators,
    check_coercivity,
    coercivity_margin,
    dense_operator,
    free_dofs_for,
    garding_shift_for,
    interpolate,
    l2_norm,
    l2_project,
    write_coo,
)
from erem_fem.mesh import build_interval_mesh, build_rect_mesh
from erem_fem.types import BoundaryCondition, MassMode


def _laplace_form(
    bc: BoundaryCondition = BoundaryCondition.DIRICHLET, **kwargs
) -> BilinearFormSpec:
    return BilinearFormSpec(coeffs=CoefficientField.constant(1.0), bc=bc, **kwargs)


def _ops_1d(n: int, bc: BoundaryCondition = BoundaryCondition.DIRICHLET):
    return build_operators(build_interval_mesh(0.0, 1.0, n), _laplace_form(bc))


class TestAssembly:
    """Test mass and stiffness stencils."""

    def test_interior_mass_stencil(self) -> None:
        mesh = build_interval_mesh(0.0, 1.0, 8)
        h = 1.0 / 8
        free = free_dofs_for(mesh, BoundaryCondition.DIRICHLET)
        mass = assemble_mass(mesh, free).toarray()
        expected = h / 6 * np.array([1.0, 4.0, 1.0])
        np.testing.assert_allclose(mass[3, 2:5], expected, rtol=0, atol=1e-14)
        np.testing.assert_allclose(mass, mass.T, atol=0)

    def test_mass_sums_to_domain_measure(self) -> None:
        for mesh in (build_interval_mesh(0.0, 2.0, 5), build_rect_mesh(3, 2)):
            assert assemble_mass(mesh).sum() == pytest.approx(mesh.domain_measure, rel=1e-12)

    def test_unit_square_mass_trace(self) -> None:
        mass = assemble_mass(build_rect_mesh(1, 1)).toarray()
        assert mass.shape == (4, 4)
        # each triangle contributes 3 * (2 |T| / 12)
        assert np.trace(mass) == pytest.approx(0.5, rel=1e-14)
        assert np.all(np.linalg.eigvalsh(mass) > 0)

    def test_interior_stiffness_stencil(self) -> None:
        mesh = build_interval_mesh(0.0, 1.0, 8)
        h = 1.0 / 8
        free = free_dofs_for(mesh, BoundaryCondition.DIRICHLET)
        stiffness = assemble_stiffness(mesh, _laplace_form(), free).toarray()
        np.testing.assert_allclose(
            stiffness[3, 2:5], np.array([-1.0, 2.0, -1.0]) / h, rtol=0, atol=1e-12
        )
        np.testing.assert_allclose(stiffness, stiffness.T, atol=1e-12)

    def test_advection_adds_antisymmetric_stencil(self) -> None:
        mesh = build_interval_mesh(0.0, 1.0, 8)
        free = free_dofs_for(mesh, BoundaryCondition.DIRICHLET)
        b = 0.7
        plain = assemble_stiffness(mesh, _laplace_form(), free).toarray()
        form = BilinearFormSpec(CoefficientField.constant(1.0, b), BoundaryCondition.DIRICHLET)
        advected = assemble_stiffness(mesh, form, free).toarray()
        np.testing.assert_allclose(
            (advected - plain)[3, 2:5], b / 2 * np.array([-1.0, 0.0, 1.0]), atol=1e-14
        )

    def test_robin_with_zero_alpha_equals_neumann(self) -> None:
        mesh = build_interval_mesh(0.0, 1.0, 6)
        robin = assemble_stiffness(mesh, _laplace_form(BoundaryCondition.ROBIN, alpha0=0.0))
        neumann = assemble_stiffness(mesh, _laplace_form(BoundaryCondition.NEUMANN))
        assert abs(robin - neumann).max() == 0.0

    def test_robin_adds_alpha_on_boundary_diagonal(self) -> None:
        mesh = build_interval_mesh(0.0, 1.0, 6)
        robin = assemble_stiffness(mesh, _laplace_form(BoundaryCondition.ROBIN, alpha0=1.5))
        neumann = assemble_stiffness(mesh, _laplace_form(BoundaryCondition.NEUMANN))
        diff = (robin - neumann).toarray()
        expected = np.zeros_like(diff)
        expected[0, 0] = expected[6, 6] = 1.5
        np.testing.assert_allclose(diff, expected, atol=1e-14)

    def test_neumann_rejects_alpha(self) -> None:
        with pytest.raises(ValidationError, match="alpha0"):
            _laplace_form(BoundaryCondition.NEUMANN, alpha0=1.0)

    def test_strict_ellipticity_check(self) -> None:
        coeffs = CoefficientField.constant(0.5, ellipticity=1.0)
        form = BilinearFormSpec(coeffs, BoundaryCondition.DIRICHLET, strict_ellipticity=True)
        with pytest.raises(CoefficientError, match="singular-coefficient"):
            assemble_stiffness(build_interval_mesh(0.0, 1.0, 4), form)


class TestProjection:
    """Test the L2 projection P_h."""

    def test_identity_on_finite_element_functions(self) -> None:
        ops = _ops_1d(16, BoundaryCondition.NEUMANN)
        values = np.random.default_rng(3).standard_normal(ops.n)
        x_nodes = ops.mesh.nodes[:, 0]

        def hat_combination(points: np.ndarray) -> np.ndarray:
            return np.interp(points[:, 0], x_nodes, values)

        np.testing.assert_allclose(l2_project(hat_combination, ops), values, atol=1e-10)

    def test_constants_are_reproduced(self) -> None:
        ops = _ops_1d(10, BoundaryCondition.NEUMANN)
        projected = l2_project(lambda p: np.ones(len(p)), ops)
        np.testing.assert_allclose(projected, np.ones(ops.n), atol=1e-10)

    def test_step_function_integral(self) -> None:
        ops = _ops_1d(64)

        def step(points: np.ndarray) -> np.ndarray:
            x = points[:, 0]
            return ((x > 0.25) & (x < 0.75)).astype(float)

        coefficients = l2_project(step, ops)
        assert float(ops.lumped_mass @ coefficients) == pytest.approx(0.5, abs=1e-3)

    def test_projection_is_idempotent_in_2d(self) -> None:
        ops = build_operators(
            build_rect_mesh(4, 4),
            BilinearFormSpec(CoefficientField.constant(1.0, dim=2), BoundaryCondition.NEUMANN),
        )
        first = l2_project(lambda p: np.sin(p[:, 0]) * np.cos(p[:, 1]), ops)
        x, y = ops.mesh.nodes.T

        # re-project the P1 function through its quadrature values
        values = ops.quadrature_values(first)
        np.testing.assert_allclose(ops.project_quadrature_values(values), first, atol=1e-10)
        assert interpolate(lambda p: p[:, 0] + p[:, 1], ops) == pytest.approx(x + y)


class TestDiscreteOperator:
    """Test A_h = -M^{-1} S and the L2 norm."""

    def test_zero_vector(self) -> None:
        ops = _ops_1d(8)
        assert np.all(apply_Ah(ops, np.zeros(ops.n)) == 0)
        assert np.all(apply_Ah(ops, np.zeros(ops.n), MassMode.CONSISTENT) == 0)

    def test_wrong_length(self) -> None:
        ops = _ops_1d(8)
        with pytest.raises(ValidationError, match="dimension-mismatch"):
            apply_Ah(ops, np.zeros(ops.n + 1))

    def test_generalized_eigenvectors(self) -> None:
        ops = _ops_1d(32)
        eigvals, eigvecs = scipy.linalg.eigh(ops.stiffness.toarray(), ops.mass.toarray())
        for k in (0, 3):
            v = eigvecs[:, k]
            np.testing.assert_allclose(
                apply_Ah(ops, v, MassMode.CONSISTENT), -eigvals[k] * v, atol=1e-8 * eigvals[k]
            )

    def test_lumped_eigenvectors(self) -> None:
        ops = _ops_1d(32)
        eigvals, eigvecs = scipy.linalg.eigh(ops.stiffness.toarray(), np.diag(ops.lumped_mass))
        v = eigvecs[:, 1]
        np.testing.assert_allclose(apply_Ah(ops, v), -eigvals[1] * v, atol=1e-10 * eigvals[1])

    def test_lumped_and_consistent_agree_to_second_order(self) -> None:
        gaps = []
        for n in (16, 32):
            ops = _ops_1d(n)
            v = interpolate(lambda p: np.sin(np.pi * p[:, 0]), ops)
            gap = apply_Ah(ops, v) - apply_Ah(ops, v, MassMode.CONSISTENT)
            gaps.append(l2_norm(ops, gap))
        assert 3.5 < gaps[0] / gaps[1] < 4.5

    def test_galerkin_consistency(self) -> None:
        mesh = build_interval_mesh(0.0, 1.0, 12)
        form = BilinearFormSpec(CoefficientField.constant(0.3, 1.2), BoundaryCondition.DIRICHLET)
        ops = build_operators(mesh, form)
        rng = np.random.default_rng(7)
        u, v = rng.standard_normal((2, ops.n))
        lhs = apply_Ah(ops, u, MassMode.CONSISTENT) @ (ops.mass @ v)
        rhs = -(u @ (ops.stiffness.T @ v))
        assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_eigenvalues_converge_at_second_order(self) -> None:
        errors, hs = [], []
        for n in (8, 16, 32, 64):
            ops = _ops_1d(n)
            smallest = scipy.linalg.eigh(
                ops.stiffness.toarray(), ops.mass.toarray(), eigvals_only=True
            )[0]
            errors.append(abs(smallest - np.pi**2))
            hs.append(1.0 / n)
        slope = np.polyfit(np.log(hs), np.log(errors), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.1)

    def test_l2_norm_values(self) -> None:
        neumann = _ops_1d(10, BoundaryCondition.NEUMANN)
        assert l2_norm(neumann, np.zeros(neumann.n)) == 0.0
        assert l2_norm(neumann, np.ones(neumann.n)) == pytest.approx(1.0, rel=1e-12)
        ops = _ops_1d(64)
        v = interpolate(lambda p: np.sin(np.pi * p[:, 0]), ops)
        assert l2_norm(ops, v) == pytest.approx(np.sqrt(0.5), abs=1e-3)

    @pytest.mark.parametrize("mass_mode", list(MassMode))
    def test_shift_moves_the_spectrum_by_c0(self, mass_mode: MassMode) -> None:
        mesh = build_interval_mesh(0.0, 1.0, 8)
        coeffs = CoefficientField.constant(0.1, 0.5)
        c0 = 0.625
        plain = build_operators(mesh, BilinearFormSpec(coeffs, BoundaryCondition.DIRICHLET))
        shifted = build_operators(
            mesh, BilinearFormSpec(coeffs, BoundaryCondition.DIRICHLET, garding_shift=c0)
        )
        expected = dense_operator(plain, mass_mode)
        np.testing.assert_allclose(
            dense_operator(shifted, mass_mode) + c0 * np.eye(shifted.n),
            expected,
            atol=1e-10 * np.abs(expected).max(),
        )

    def test_prepare_caches_solver_data(self) -> None:
        mesh = build_interval_mesh(0.0, 1.0, 8)
        ops = build_operators(mesh, _laplace_form(garding_shift=0.5))
        assert "preconditioner" not in vars(ops)
        ops.prepare()
        assert {"preconditioner", "lumped_stiffness"} <= set(vars(ops))
        v = np.ones(ops.n)
        np.testing.assert_allclose(ops.preconditioner.matvec(v), v / ops.mass.diagonal())


class TestCoercivity:
    """Test the Garding shift and the coercivity check."""

    def test_neumann_advection_needs_shift(self) -> None:
        mesh = build_interval_mesh(0.0, 1.0, 8)
        coeffs = CoefficientField.constant(0.1, 5.0)
        unshifted = build_operators(mesh, BilinearFormSpec(coeffs, BoundaryCondition.NEUMANN))
        assert coercivity_margin(unshifted) < 0
        with pytest.raises(ValidationError, match="not coercive"):
            check_coercivity(unshifted)

        c0 = garding_shift_for(coeffs, mesh.nodes)
        assert c0 == pytest.approx(25.0 / 0.4)
        shifted = build_operators(
            mesh, BilinearFormSpec(coeffs, BoundaryCondition.NEUMANN, garding_shift=c0)
        )
        assert check_coercivity(shifted) >= -1e-10

    def test_negative_shift_rejected(self) -> None:
        with pytest.raises(ValidationError, match="Garding"):
            _laplace_form(garding_shift=-1.0)


def test_write_coo(tmp_path) -> None:
    ops = _ops_1d(4)
    path = tmp_path / "mass.txt"
    write_coo(ops.mass, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == ops.mass.nnz
    row, col, value = lines[0].split()
    assert float(value) == pytest.approx(ops.mass[int(row), int(col)])
