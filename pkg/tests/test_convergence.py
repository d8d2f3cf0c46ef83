"""Tests for error measurement, order fits and the refinement studies."""

import numpy as np
import pytest

from erem_fem.convergence import (
    ConvergenceTable,
    ReferenceSolution,
    cells_for,
    estimate_order,
    log_factor_order,
    measure_error,
    run_spatial_study,
    run_temporal_study,
    steps_for,
    synthetic_errors,
    theoretical_regime,
)
from erem_fem.exceptions import InsufficientDataError, ValidationError
from erem_fem.fem import interpolate, l2_project
from erem_fem.matfunc import KrylovParams
from erem_fem.mesh import refine_uniform
from erem_fem.problems import discretize, get_problem
from erem_fem.types import BetaClass, ConvergenceRow, MassMode, StudyKind


class TestOrderFit:
    """Test the least-squares order estimate."""

    @pytest.mark.parametrize("slope", [1.0, 2.0, 1.49])
    def test_exact_power_law(self, slope: float) -> None:
        rows = synthetic_errors(slope, 5, constant=3.0)
        assert estimate_order(rows, "dt") == pytest.approx(slope, abs=1e-10)

    def test_noisy_power_law(self) -> None:
        rows = synthetic_errors(2.0, 6, parameter="h", noise=0.05, seed=0)
        assert estimate_order(rows, "h") == pytest.approx(2.0, abs=0.1)

    def test_two_rows_are_not_enough(self) -> None:
        with pytest.raises(InsufficientDataError, match="insufficient-data"):
            estimate_order(synthetic_errors(2.0, 2))

    def test_zero_errors_are_dropped(self) -> None:
        rows = synthetic_errors(2.0, 4)
        rows.append(ConvergenceRow(h=0.1, dt=1e-6, t=1.0, error=0.0))
        assert estimate_order(rows) == pytest.approx(2.0, abs=1e-10)

    def test_unknown_parameter(self) -> None:
        with pytest.raises(ValidationError, match="parameter"):
            estimate_order(synthetic_errors(2.0, 4), "t")

    def test_log_factor_fit(self) -> None:
        rows = [
            ConvergenceRow(h=h, dt=1e-3, t=1.0, error=h**2 * (1.0 + np.log(1.0 / h**2)))
            for h in (1 / 8, 1 / 16, 1 / 32, 1 / 64)
        ]
        assert log_factor_order(rows) == pytest.approx(2.0, abs=1e-10)
        assert estimate_order(rows, "h") < 2.0


class TestRegimes:
    """Test the predicted orders and their bands."""

    def test_temporal(self) -> None:
        regime = theoretical_regime(StudyKind.TEMPORAL)
        assert (regime.expected_order, regime.lower, regime.upper) == (2.0, 1.8, 2.2)

    def test_smooth_spatial(self) -> None:
        regime = theoretical_regime(StudyKind.SPATIAL, BetaClass.TWO, 2.0)
        assert regime.accepts(2.0)
        assert not regime.accepts(1.8)

    def test_logarithmic_spatial(self) -> None:
        regime = theoretical_regime(StudyKind.SPATIAL, BetaClass.TWO, 2.0, smoothing_claim=False)
        assert regime.upper == pytest.approx(2.1)
        assert "ln" in regime.label

    def test_intermediate_spatial(self) -> None:
        regime = theoretical_regime(StudyKind.SPATIAL, BetaClass.ONE_TO_TWO, 1.49)
        assert regime.expected_order == pytest.approx(1.49)
        assert regime.lower == pytest.approx(1.34)

    def test_rough_spatial(self) -> None:
        regime = theoretical_regime(StudyKind.SPATIAL, BetaClass.SUB1, 0.49)
        assert regime.expected_order == pytest.approx(1.49)
        assert (regime.lower, regime.upper) == (1.3, 2.0)

    def test_verdicts(self) -> None:
        regime = theoretical_regime(StudyKind.TEMPORAL)
        table = ConvergenceTable("p", StudyKind.TEMPORAL, synthetic_errors(2.0, 3), regime)
        assert table.verdict == "no-fit"
        table.fitted_order = 2.05
        assert table.verdict == "pass"
        table.fitted_order = 1.2
        assert table.verdict == "fail"
        table.exact = True
        assert table.verdict == "exact"
        assert table.monotone
        assert table.parameter == "dt"

    def test_reduction_verdict(self) -> None:
        regime = theoretical_regime(StudyKind.SPATIAL, BetaClass.SUB1, 0.49)
        table = ConvergenceTable("p", StudyKind.SPATIAL, synthetic_errors(1.5, 4), regime)
        assert table.order_reduction is None
        table.fitted_order = 1.5
        assert table.order_reduction == pytest.approx(0.5)
        assert table.reduction_verdict == "observed"
        table.fitted_order = 1.97
        assert table.reduction_verdict == "not-observed"
        smooth = ConvergenceTable(
            "p", StudyKind.SPATIAL, synthetic_errors(2.0, 4), theoretical_regime(StudyKind.SPATIAL)
        )
        smooth.fitted_order = 2.0
        assert smooth.reduction_verdict is None


class TestMeasureError:
    """Test the consistent-mass L2 error."""

    def test_projected_exact_solution_has_zero_error(self) -> None:
        problem = get_problem("heat_smooth_1d")
        system = discretize(problem, problem.build_mesh(16))
        projected = l2_project(lambda p: problem.exact(p, 0.05), system.ops)
        assert measure_error(system, projected, problem.exact, 0.05) == pytest.approx(0, abs=1e-12)

    def test_constant_offset(self) -> None:
        problem = get_problem("neumann_1d")
        system = discretize(problem, problem.build_mesh(16))
        projected = l2_project(lambda p: problem.exact(p, 0.1), system.ops)
        error = measure_error(system, projected + 0.01, problem.exact, 0.1)
        assert error == pytest.approx(0.01, rel=1e-8)

    def test_zero_numeric_solution(self) -> None:
        problem = get_problem("heat_smooth_1d")
        system = discretize(problem, problem.build_mesh(64))
        error = measure_error(system, np.zeros(system.dim), problem.exact, 0.1)
        assert error == pytest.approx(np.exp(-(np.pi**2) * 0.1) * np.sqrt(0.5), rel=1e-3)

    def test_vector_reference(self) -> None:
        problem = get_problem("neumann_1d")
        system = discretize(problem, problem.build_mesh(8))
        ones = np.ones(system.dim)
        assert measure_error(system, 3.0 * ones, ones, 0.0) == pytest.approx(2.0, rel=1e-12)
        with pytest.raises(ValidationError, match="dimension-mismatch"):
            measure_error(system, ones, np.ones(3), 0.0)

    def test_prolonged_reference(self) -> None:
        problem = get_problem("neumann_1d")
        coarse = discretize(problem, problem.build_mesh(4))
        fine = discretize(problem, refine_uniform(refine_uniform(coarse.ops.mesh)))

        def linear(points: np.ndarray) -> np.ndarray:
            return 1.0 + 2.0 * points[:, 0]

        reference = ReferenceSolution(fine.ops, interpolate(linear, fine.ops))
        numeric = interpolate(linear, coarse.ops)
        assert measure_error(coarse, numeric, reference, 0.1) == pytest.approx(0.0, abs=1e-13)
        shifted = ReferenceSolution(fine.ops, reference.values + 0.5)
        assert measure_error(coarse, numeric, shifted, 0.1) == pytest.approx(0.5, rel=1e-12)


class TestStudyInputs:
    """Test validation of refinement sequences."""

    def test_steps_for(self) -> None:
        assert steps_for(0.1, 0.025) == 4
        assert steps_for(1.0, 1.0 / 64) == 64
        with pytest.raises(ValidationError, match="constraint-violation"):
            steps_for(1.0, 0.3)

    def test_cells_for(self) -> None:
        assert cells_for(get_problem("heat_smooth_1d"), 1 / 8) == 8
        with pytest.raises(ValidationError, match="constraint-violation"):
            cells_for(get_problem("heat_smooth_1d"), 0.3)

    def test_dt_list_must_decrease(self) -> None:
        problem = get_problem("heat_smooth_1d")
        with pytest.raises(ValidationError, match="strictly decreasing"):
            run_temporal_study(problem, 1 / 8, [0.025, 0.05, 0.0125])

    def test_h_list_must_halve(self) -> None:
        problem = get_problem("heat_smooth_1d")
        with pytest.raises(ValidationError, match="successive uniform refinements"):
            run_spatial_study(problem, [1 / 4, 1 / 16, 1 / 32], 0.025)


TEMPORAL_DTS = [1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128]


@pytest.fixture(scope="module")
def temporal_studies() -> dict[str, ConvergenceTable]:
    """Temporal studies of the semilinear problems on h = 1/256 with dt = T/8 .. T/128."""
    smooth = get_problem("semilinear_1d")
    nonsmooth = get_problem("semilinear_nonsmooth_1d")
    dts = [smooth.final_time * factor for factor in TEMPORAL_DTS]
    return {
        "smooth": run_temporal_study(smooth, 1 / 256, dts, sample_times=[0.5], jobs=4),
        "nonsmooth": run_temporal_study(nonsmooth, 1 / 256, dts, jobs=4),
        "finer_reference": run_temporal_study(smooth, 1 / 256, dts, reference_factor=32, jobs=4),
        "tighter_krylov": run_temporal_study(
            smooth, 1 / 256, dts, KrylovParams(tol=5e-10), jobs=4
        ),
    }


class TestTemporalStudies:
    """Test refinement in dt on a fixed mesh."""

    def test_linear_problem_is_exact(self) -> None:
        problem = get_problem("heat_smooth_1d")
        T = problem.final_time
        table = run_temporal_study(problem, 1 / 32, [T / 2, T / 4, T / 8])
        assert table.exact
        assert table.verdict == "exact"
        assert table.fitted_order is None
        assert len(table.rows) == 3

    @pytest.mark.parametrize("key", ["smooth", "nonsmooth"])
    def test_second_order_in_time(self, temporal_studies: dict, key: str) -> None:
        table = temporal_studies[key]
        assert not table.exact
        assert table.monotone
        assert 1.8 <= table.fitted_order <= 2.2
        assert table.verdict == "pass"

    def test_transient_rows(self, temporal_studies: dict) -> None:
        table = temporal_studies["smooth"]
        assert [row.t for row in table.transient_rows] == [0.5] * len(TEMPORAL_DTS)
        assert all(row.error > 0.0 for row in table.transient_rows)

    def test_nonsmooth_data_keeps_the_temporal_order(self, temporal_studies: dict) -> None:
        smooth = temporal_studies["smooth"].fitted_order
        nonsmooth = temporal_studies["nonsmooth"].fitted_order
        assert abs(nonsmooth - smooth) <= 0.2

    def test_errors_do_not_depend_on_the_reference(self, temporal_studies: dict) -> None:
        default = temporal_studies["smooth"].errors
        finer = temporal_studies["finer_reference"].errors
        for coarse_ref, fine_ref in zip(default, finer):
            assert abs(coarse_ref - fine_ref) / fine_ref < 0.05

    def test_errors_do_not_depend_on_the_krylov_tolerance(self, temporal_studies: dict) -> None:
        default = temporal_studies["smooth"].errors
        tighter = temporal_studies["tighter_krylov"].errors
        for loose, tight in zip(default, tighter):
            assert abs(loose - tight) / loose < 0.01

    def test_parallel_runs_match_serial(self) -> None:
        problem = get_problem("semilinear_1d")
        T = problem.final_time
        dts = [T / 4, T / 8, T / 16]
        serial = run_temporal_study(problem, 1 / 16, dts, jobs=1)
        parallel = run_temporal_study(problem, 1 / 16, dts, jobs=3)
        assert parallel.errors == pytest.approx(serial.errors, rel=1e-12)


class TestSpatialStudies:
    """Test refinement in h at a fixed small dt."""

    def test_smooth_heat_is_second_order(self) -> None:
        problem = get_problem("heat_smooth_1d")
        table = run_spatial_study(
            problem, [1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128], problem.final_time / 4096
        )
        assert table.monotone
        assert table.verdict == "pass"
        assert table.spot_check_ratio is None
        assert table.reduction_verdict is None

    def test_consistent_mass_smooth_heat(self) -> None:
        problem = get_problem("heat_smooth_1d")
        table = run_spatial_study(
            problem,
            [1 / 8, 1 / 16, 1 / 32, 1 / 64],
            problem.final_time / 4,
            mass_mode=MassMode.CONSISTENT,
        )
        assert table.monotone
        assert table.verdict == "pass"

    def test_nonsmooth_heat(self) -> None:
        problem = get_problem("heat_nonsmooth_1d")
        table = run_spatial_study(
            problem, [1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128], problem.final_time / 4096
        )
        assert table.monotone
        assert 1.3 <= table.fitted_order <= 2.0
        assert table.verdict == "pass"
        # projected step data on a node-aligned mesh converges at the smooth rate
        assert table.order_reduction is not None
        assert table.reduction_verdict == "not-observed"

    def test_finer_mesh_reference(self) -> None:
        problem = get_problem("robin_1d")
        table = run_spatial_study(
            problem, [1 / 4, 1 / 8, 1 / 16], problem.final_time / 4, reference_levels=2
        )
        assert problem.exact is None
        assert len(table.rows) == 3
        assert table.monotone
        assert table.fitted_order > 1.3

    def test_spot_check_for_nonlinear_problems(self) -> None:
        problem = get_problem("semilinear_1d")
        table = run_spatial_study(
            problem, [1 / 4, 1 / 8, 1 / 16], problem.final_time / 32, reference_levels=2
        )
        assert table.spot_check_ratio is not None
        assert table.spot_check_ratio >= 0.0
        assert table.monotone
