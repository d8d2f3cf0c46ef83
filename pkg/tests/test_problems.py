"""Tests for the model problem registry and exact solutions."""

import dataclasses

import numpy as np
import pytest

from erem_fem.exceptions import ValidationError
from erem_fem.fem import check_coercivity, l2_norm
from erem_fem.integrator import StepperConfig, erem_integrate
from erem_fem.problems import (
    discretize,
    get_problem,
    initial_state,
    problem_names,
    problem_robin_1d,
    series_terms,
    step_heat_solution,
    step_indicator,
    step_sine_coefficients,
)
from erem_fem.types import BetaClass, BoundaryCondition


def _points(*xs: float) -> np.ndarray:
    return np.array(xs, dtype=float).reshape(-1, 1)


class TestRegistry:
    """Test problem lookup."""

    def test_names(self) -> None:
        names = problem_names()
        assert names == sorted(names)
        assert {"heat_smooth_1d", "heat_nonsmooth_1d", "semilinear_1d", "semilinear_2d"} <= set(
            names
        )

    def test_unknown_problem(self) -> None:
        with pytest.raises(ValidationError, match="Unknown problem 'nope'") as exc_info:
            get_problem("nope")
        assert "heat_smooth_1d" in exc_info.value.message

    @pytest.mark.parametrize("name", problem_names())
    def test_every_problem_is_coercive(self, name: str) -> None:
        problem = get_problem(name)
        system = discretize(problem, problem.build_mesh(8))
        assert check_coercivity(system.ops) >= -1e-10
        assert problem.build_mesh(8).dim == problem.dim

    def test_declared_regularity(self) -> None:
        assert get_problem("heat_smooth_1d").beta_class is BetaClass.TWO
        assert get_problem("heat_nonsmooth_1d").beta_class is BetaClass.SUB1
        assert get_problem("heat_nonsmooth_1d").beta < 0.5
        robin = get_problem("robin_1d")
        assert robin.beta_class is BetaClass.ONE_TO_TWO
        assert robin.bc is BoundaryCondition.ROBIN

    def test_garding_shifts(self) -> None:
        assert get_problem("semilinear_1d").garding_shift == pytest.approx(0.625)
        assert get_problem("semilinear_2d").garding_shift == pytest.approx(0.85)
        assert get_problem("heat_smooth_1d").garding_shift == 0.0

    def test_linearity_flag(self) -> None:
        assert get_problem("heat_smooth_1d").is_linear
        assert not get_problem("semilinear_1d").is_linear

    def test_invalid_final_time(self) -> None:
        with pytest.raises(ValidationError, match="final_time"):
            dataclasses.replace(get_problem("heat_smooth_1d"), final_time=0.0)


class TestExactSolutions:
    """Test closed-form and series solutions."""

    def test_smooth_heat_value(self) -> None:
        exact = get_problem("heat_smooth_1d").exact
        assert exact(_points(0.5), 0.1)[0] == pytest.approx(np.exp(-(np.pi**2) * 0.1), rel=1e-14)
        assert exact(_points(0.5), 0.1)[0] == pytest.approx(0.3727, abs=1e-4)

    def test_step_coefficients(self) -> None:
        expected = 2.0 / np.pi * (np.cos(np.pi / 4) - np.cos(3 * np.pi / 4))
        assert step_sine_coefficients(1) == pytest.approx(expected)
        assert step_sine_coefficients(2) == pytest.approx(0.0, abs=1e-15)
        assert step_sine_coefficients(4) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("t", [0.01, 0.1, 1.0])
    def test_series_truncation(self, t: float) -> None:
        x = _points(0.1, 0.3, 0.5, 0.9)
        n = series_terms(t)
        base = step_heat_solution(x, t, terms=n)
        doubled = step_heat_solution(x, t, terms=2 * n)
        leading = abs(step_sine_coefficients(1)) * np.exp(-(np.pi**2) * t)
        assert np.max(np.abs(base - doubled)) <= 1e-12 * leading

    def test_series_tolerance_is_relative(self) -> None:
        assert series_terms(1.0) <= series_terms(0.01)
        assert series_terms(1.0, tol=1e-6) <= series_terms(1.0)

    def test_series_needs_positive_time(self) -> None:
        with pytest.raises(ValidationError, match="t > 0"):
            series_terms(0.0)

    def test_series_at_zero_is_the_indicator(self) -> None:
        x = _points(0.1, 0.5, 0.8)
        np.testing.assert_array_equal(step_heat_solution(x, 0.0), step_indicator(x))

    def test_series_is_symmetric_and_bounded(self) -> None:
        x = np.linspace(0.0, 1.0, 41).reshape(-1, 1)
        values = step_heat_solution(x, 0.05)
        np.testing.assert_allclose(values, values[::-1], atol=1e-12)
        assert np.all(values <= 1.0) and np.all(values >= -1e-12)

    def test_neumann_exact_value(self) -> None:
        exact = get_problem("neumann_1d").exact
        assert exact(_points(0.0), 0.0)[0] == pytest.approx(2.0)
        assert exact(_points(0.5), 0.1)[0] == pytest.approx(1.0)


def test_step_initial_data_projection() -> None:
    problem = get_problem("heat_nonsmooth_1d")
    ops = discretize(problem, problem.build_mesh(64)).ops
    u0 = initial_state(problem, ops)
    assert float(ops.lumped_mass @ u0) == pytest.approx(0.5, abs=1e-3)
    assert l2_norm(ops, u0) <= np.sqrt(0.5) + 1e-12


def test_neumann_problem_conserves_mass() -> None:
    problem = get_problem("neumann_1d")
    system = discretize(problem, problem.build_mesh(32))
    u0 = initial_state(problem, system.ops)
    result = erem_integrate(system, u0, StepperConfig.from_final_time(problem.final_time, 10))
    ones = np.ones(system.dim)
    before = float(ones @ (system.ops.mass @ u0))
    after = float(ones @ (system.ops.mass @ result.final_state))
    assert after == pytest.approx(before, rel=1e-8)
    assert before == pytest.approx(1.0, rel=1e-10)


def test_robin_alpha_parameter() -> None:
    problem = problem_robin_1d(alpha0=2.5)
    assert problem.alpha0 == 2.5
    assert problem.form.robin_coefficient == 2.5


def test_two_dimensional_problem_mesh() -> None:
    problem = get_problem("semilinear_2d")
    mesh = problem.build_mesh(4)
    assert mesh.n_elements == 32
    system = discretize(problem, mesh)
    assert system.dim == 9
