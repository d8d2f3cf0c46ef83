"""Refinement studies in dt and h, error measurement and order fits."""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InsufficientDataError, IntegrationError, ValidationError
from .fem import DiscreteOperators, l2_norm, l2_project
from .integrator import (
    SemilinearSystem,
    SnapshotRecorder,
    StepperConfig,
    erem_integrate,
)
from .matfunc import KrylovParams
from .mesh import Mesh, prolong, refine_uniform
from .problems import ExactSolution, ProblemSpec, discretize, initial_state
from .types import (
    BetaClass,
    ConvergenceRow,
    DofVector,
    MassMode,
    NemytskiiMode,
    Regime,
    Scheme,
    StudyKind,
)

logger = logging.getLogger(__name__)

EXACTNESS_FACTOR = 10.0
TEMPORAL_REFERENCE_FACTOR = 16
SPATIAL_REFERENCE_LEVELS = 3
SPOT_CHECK_THRESHOLD = 0.01
SMOOTH_SPATIAL_ORDER = 2.0
REDUCTION_MARGIN = 0.1
MIN_FIT_ROWS = 3
_DIVISOR_TOL = 1e-9


@dataclass(frozen=True)
class ReferenceSolution:
    """A discrete solution on a (possibly finer, nested) mesh."""

    ops: DiscreteOperators
    values: DofVector


@dataclass
class ConvergenceTable:
    """Measurements of one study; ``rows`` are sorted by decreasing refined parameter."""

    problem: str
    study_kind: StudyKind
    rows: list[ConvergenceRow]
    regime: Regime
    fitted_order: float | None = None
    exact: bool = False
    log_factor_order: float | None = None
    spot_check_ratio: float | None = None
    transient_rows: list[ConvergenceRow] = field(default_factory=list)
    wall_seconds: float = 0.0

    @property
    def parameter(self) -> str:
        return "dt" if self.study_kind is StudyKind.TEMPORAL else "h"

    @property
    def errors(self) -> list[float]:
        return [row.error for row in self.rows]

    @property
    def monotone(self) -> bool:
        errors = self.errors
        return all(b < a for a, b in zip(errors, errors[1:]))

    @property
    def verdict(self) -> str:
        if self.exact:
            return "exact"
        if self.fitted_order is None:
            return "no-fit"
        return "pass" if self.regime.accepts(self.fitted_order) else "fail"

    @property
    def order_reduction(self) -> float | None:
        """Gap to the smooth-data spatial order, for studies predicting a reduced order."""
        if self.study_kind is not StudyKind.SPATIAL or self.fitted_order is None:
            return None
        if self.regime.expected_order >= SMOOTH_SPATIAL_ORDER:
            return None
        return SMOOTH_SPATIAL_ORDER - self.fitted_order

    @property
    def reduction_verdict(self) -> str | None:
        reduction = self.order_reduction
        if reduction is None:
            return None
        return "observed" if reduction >= REDUCTION_MARGIN else "not-observed"


# ------------------------------------------------------------------
# Regimes and fits


def theoretical_regime(
    study_kind: StudyKind,
    beta_class: BetaClass = BetaClass.TWO,
    beta: float = 2.0,
    smoothing_claim: bool = True,
) -> Regime:
    """Predicted order with the tolerance band used for verdicts."""

    if study_kind is not StudyKind.SPATIAL:
        return Regime("dt^2", 2.0, 1.8, 2.2)
    if beta_class is BetaClass.TWO:
        if smoothing_claim:
            return Regime("h^2", 2.0, 1.85, 2.15)
        return Regime("h^2 (1 + ln(t/h^2))", 2.0, 1.85, 2.1)
    if beta_class is BetaClass.ONE_TO_TWO:
        return Regime(f"h^{beta:g}", beta, beta - 0.15, 2.15)
    return Regime(f"h^(1+{beta:g}) t^(({beta:g}-1)/2)", 1.0 + beta, 1.3, 2.0)


def estimate_order(rows: Sequence[ConvergenceRow], parameter: str = "dt") -> float:
    """Least-squares slope of log(error) against log(parameter); zero errors are dropped."""

    if parameter not in ("dt", "h"):
        raise ValidationError("parameter must be 'dt' or 'h'", field="parameter", value=parameter)
    usable = [row for row in rows if row.error > 0 and math.isfinite(row.error)]
    if len(usable) < MIN_FIT_ROWS:
        raise InsufficientDataError(
            f"insufficient-data: need at least {MIN_FIT_ROWS} rows with positive error",
            field="rows",
            value=len(usable),
        )
    x = np.log([getattr(row, parameter) for row in usable])
    y = np.log([row.error for row in usable])
    return float(np.polyfit(x, y, 1)[0])


def log_factor_order(rows: Sequence[ConvergenceRow]) -> float:
    """Slope of error / (1 + ln(t / h^2)) against h."""

    scaled = [
        ConvergenceRow(row.h, row.dt, row.t, row.error / (1.0 + math.log(row.t / row.h**2)))
        for row in rows
    ]
    return estimate_order(scaled, "h")


def synthetic_errors(
    slope: float,
    levels: int,
    *,
    parameter: str = "dt",
    start: float = 0.1,
    constant: float = 1.0,
    noise: float = 0.0,
    seed: int | None = None,
) -> list[ConvergenceRow]:
    """Rows with error = C p^slope for halving p, optionally with multiplicative noise."""

    rng = np.random.default_rng(seed)
    rows = []
    for k in range(levels):
        p = start / 2**k
        factor = 1.0 + rng.uniform(-noise, noise) if noise else 1.0
        error = constant * p**slope * factor
        h, dt = (p, start) if parameter == "h" else (start, p)
        rows.append(ConvergenceRow(h=h, dt=dt, t=1.0, error=error))
    return rows


# ------------------------------------------------------------------
# Error measurement


def measure_error(
    system: SemilinearSystem,
    numeric: DofVector,
    reference: ExactSolution | DofVector | ReferenceSolution,
    t: float,
) -> float:
    """Consistent-mass L2 distance between ``numeric`` and the reference at time t.

    Exact solutions are L2-projected onto the mesh first. A reference on a finer nested
    mesh is compared after prolonging ``numeric`` to that mesh.
    """

    ops = system.ops
    ops.check_length(numeric)
    if isinstance(reference, ReferenceSolution):
        if reference.ops.mesh is ops.mesh:
            return l2_norm(ops, numeric - reference.values)
        fine = reference.ops
        nodal = prolong(ops.expand(numeric), ops.mesh, fine.mesh)
        return l2_norm(fine, fine.restrict(nodal) - reference.values)
    if callable(reference):
        exact = reference
        projected = l2_project(lambda points: exact(points, t), ops)
        return l2_norm(ops, numeric - projected)
    ref = np.asarray(reference, dtype=float)
    if ref.shape != np.shape(numeric):
        raise ValidationError(
            "dimension-mismatch: reference vector has the wrong length",
            field="reference",
            value=ref.shape,
            details={"expected": np.shape(numeric)},
        )
    return l2_norm(ops, numeric - ref)


# ------------------------------------------------------------------
# Studies


def steps_for(final_time: float, dt: float) -> int:
    """N with N dt = T; raises when dt does not divide T."""

    if not dt > 0:
        raise ValidationError("dt must be positive", field="dt", value=dt)
    ratio = final_time / dt
    n = round(ratio)
    if n < 1 or abs(ratio - n) > _DIVISOR_TOL * max(1.0, ratio):
        raise ValidationError(
            "constraint-violation: dt must divide the final time",
            field="dt",
            value=dt,
            details={"final_time": final_time},
        )
    return int(n)


def cells_for(problem: ProblemSpec, h: float) -> int:
    """Cells per direction for the cell width h."""

    width = problem.upper[0] - problem.lower[0]
    cells = round(width / h)
    if cells < 1 or abs(width / h - cells) > _DIVISOR_TOL * cells:
        raise ValidationError(
            "constraint-violation: h must divide the domain width", field="h", value=h
        )
    return int(cells)


def _map(jobs: int, func: Callable, items: Sequence) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def _integrate(
    system: SemilinearSystem,
    u0: DofVector,
    cfg: StepperConfig,
    sample_times: Sequence[float] = (),
) -> tuple[DofVector, dict[float, DofVector]]:
    recorder = SnapshotRecorder(sample_times)
    try:
        result = erem_integrate(system, u0, cfg, observers=[recorder] if sample_times else ())
    except IntegrationError as exc:
        raise IntegrationError(
            f"{exc.message} (dt={cfg.dt:.6g}, h={system.ops.mesh.h:.6g})",
            step_index=exc.step_index,
            time=exc.time,
            details={**exc.details, "dt": cfg.dt, "h": system.ops.mesh.h},
        ) from exc
    # key by the requested time so that runs on different step grids line up
    by_request = {
        min(sample_times, key=lambda s: abs(s - snap.time)): snap.state for snap in result.snapshots
    }
    return result.final_state, by_request


def _prime(system: SemilinearSystem) -> None:
    # materialize cached operator data before worker threads share the system
    system.ops.prepare()
    system.linear_action()


def run_temporal_study(
    problem: ProblemSpec,
    h_fixed: float,
    dt_list: Sequence[float],
    krylov: KrylovParams | None = None,
    *,
    mass_mode: MassMode = MassMode.LUMPED,
    nemytskii_mode: NemytskiiMode = NemytskiiMode.NODAL,
    scheme: Scheme = Scheme.EREM,
    reference_factor: int = TEMPORAL_REFERENCE_FACTOR,
    sample_times: Sequence[float] = (),
    jobs: int = 1,
) -> ConvergenceTable:
    """Final-time errors for a sequence of dt on a fixed mesh of cell width ``h_fixed``.

    The reference shares the mesh, so spatial error cancels. For affine F a single step of
    length T is the exact semidiscrete solution; otherwise the reference uses dt_min / factor.
    """

    krylov = krylov or KrylovParams()
    dts = [float(dt) for dt in dt_list]
    if any(b >= a for a, b in zip(dts, dts[1:])):
        raise ValidationError(
            "constraint-violation: dt_list must be strictly decreasing", field="dt_list", value=dts
        )
    T = problem.final_time
    steps = [steps_for(T, dt) for dt in dts]
    if reference_factor < 1:
        raise ValidationError("reference_factor must be >= 1", field="reference_factor")

    started = time.perf_counter()
    mesh = problem.build_mesh(cells_for(problem, h_fixed))
    system = discretize(problem, mesh, mass_mode, nemytskii_mode)
    _prime(system)
    u0 = initial_state(problem, system.ops)
    samples = [t for t in sample_times if 0 < t < T]

    ref_steps = 1 if problem.is_linear else steps[-1] * reference_factor
    configs = [StepperConfig.from_final_time(T, n, krylov, scheme) for n in steps]
    ref_cfg = StepperConfig.from_final_time(
        T, ref_steps, krylov, Scheme.EREM if problem.is_linear else scheme
    )
    logger.info(
        "Temporal study %s: h=%.4e, %d levels, reference N=%d",
        problem.name,
        mesh.h,
        len(dts),
        ref_steps,
    )

    ref_samples = [] if problem.is_linear else samples
    outcomes = _map(
        jobs,
        lambda cfg: _integrate(system, u0, cfg, samples if cfg is not ref_cfg else ref_samples),
        [*configs, ref_cfg],
    )
    (ref_final, ref_snaps) = outcomes[-1]

    rows = [
        ConvergenceRow(h=mesh.h, dt=cfg.dt, t=T, error=measure_error(system, final, ref_final, T))
        for cfg, (final, _) in zip(configs, outcomes)
    ]
    transient = [
        ConvergenceRow(
            h=mesh.h, dt=cfg.dt, t=t, error=measure_error(system, snaps[t], ref_snaps[t], t)
        )
        for cfg, (_, snaps) in zip(configs, outcomes)
        for t in sorted(snaps)
        if t in ref_snaps
    ]

    table = ConvergenceTable(
        problem=problem.name,
        study_kind=StudyKind.TEMPORAL,
        rows=rows,
        regime=theoretical_regime(StudyKind.TEMPORAL),
        transient_rows=transient,
    )
    scale = max(system.norm(ref_final), np.finfo(float).tiny)
    threshold = EXACTNESS_FACTOR * krylov.tol * max(steps) * scale
    if problem.is_linear and all(row.error <= threshold for row in rows):
        table.exact = True
        logger.info("Temporal study %s: exact to Krylov tolerance, no order fit", problem.name)
    else:
        table.fitted_order = estimate_order(rows, "dt")
        logger.info("Temporal study %s: fitted order %.3f", problem.name, table.fitted_order)
    table.wall_seconds = time.perf_counter() - started
    return table


def _nested_meshes(problem: ProblemSpec, h_list: Sequence[float]) -> list[Mesh]:
    hs = [float(h) for h in h_list]
    for a, b in zip(hs, hs[1:]):
        if abs(a / b - 2.0) > _DIVISOR_TOL:
            raise ValidationError(
                "constraint-violation: h_list must come from successive uniform refinements",
                field="h_list",
                value=hs,
            )
    meshes = [problem.build_mesh(cells_for(problem, hs[0]))]
    for _ in hs[1:]:
        meshes.append(refine_uniform(meshes[-1]))
    return meshes


def run_spatial_study(
    problem: ProblemSpec,
    h_list: Sequence[float],
    dt_fixed_small: float,
    krylov: KrylovParams | None = None,
    *,
    mass_mode: MassMode = MassMode.LUMPED,
    nemytskii_mode: NemytskiiMode = NemytskiiMode.NODAL,
    scheme: Scheme = Scheme.EREM,
    reference_levels: int = SPATIAL_REFERENCE_LEVELS,
    sample_times: Sequence[float] = (),
    spot_check: bool = True,
    jobs: int = 1,
) -> ConvergenceTable:
    """Errors at t = T against the exact solution, or against a finer nested mesh run.

    ``h_list`` holds cell widths of successive uniform refinements.
    """

    krylov = krylov or KrylovParams()
    T = problem.final_time
    n_steps = steps_for(T, dt_fixed_small)
    cfg = StepperConfig.from_final_time(T, n_steps, krylov, scheme)
    if len(h_list) < 1:
        raise InsufficientDataError("insufficient-data: h_list is empty", field="h_list")

    started = time.perf_counter()
    meshes = _nested_meshes(problem, h_list)
    exact = problem.exact
    reference_mesh: Mesh | None = None
    if exact is None:
        reference_mesh = meshes[-1]
        for _ in range(reference_levels):
            reference_mesh = refine_uniform(reference_mesh)
    logger.info(
        "Spatial study %s: %d levels, dt=%.4e, reference=%s",
        problem.name,
        len(meshes),
        cfg.dt,
        "exact" if exact is not None else f"mesh h={reference_mesh.h:.4e}",
    )

    samples = [t for t in sample_times if 0 < t < T]

    def solve(mesh: Mesh) -> tuple[SemilinearSystem, DofVector, dict[float, DofVector]]:
        system = discretize(problem, mesh, mass_mode, nemytskii_mode)
        final, snaps = _integrate(system, initial_state(problem, system.ops), cfg, samples)
        return system, final, snaps

    targets = meshes if reference_mesh is None else [*meshes, reference_mesh]
    outcomes = _map(jobs, solve, targets)

    if reference_mesh is None:
        assert exact is not None
        rows = [
            ConvergenceRow(h=mesh.h, dt=cfg.dt, t=T, error=measure_error(sys_, final, exact, T))
            for mesh, (sys_, final, _) in zip(meshes, outcomes)
        ]
        transient = [
            ConvergenceRow(h=mesh.h, dt=cfg.dt, t=t, error=measure_error(sys_, snaps[t], exact, t))
            for mesh, (sys_, _, snaps) in zip(meshes, outcomes)
            for t in sorted(snaps)
        ]
    else:
        ref_sys, ref_final, ref_snaps = outcomes[-1]
        rows = [
            ConvergenceRow(
                h=mesh.h,
                dt=cfg.dt,
                t=T,
                error=measure_error(sys_, final, ReferenceSolution(ref_sys.ops, ref_final), T),
            )
            for mesh, (sys_, final, _) in zip(meshes, outcomes)
        ]
        transient = [
            ConvergenceRow(
                h=mesh.h,
                dt=cfg.dt,
                t=t,
                error=measure_error(
                    sys_, snaps[t], ReferenceSolution(ref_sys.ops, ref_snaps[t]), t
                ),
            )
            for mesh, (sys_, _, snaps) in zip(meshes, outcomes)
            for t in sorted(snaps)
            if t in ref_snaps
        ]

    table = ConvergenceTable(
        problem=problem.name,
        study_kind=StudyKind.SPATIAL,
        rows=rows,
        regime=theoretical_regime(
            StudyKind.SPATIAL, problem.beta_class, problem.beta, problem.smoothing_claim
        ),
        transient_rows=transient,
    )
    if len(rows) >= MIN_FIT_ROWS:
        table.fitted_order = estimate_order(rows, "h")
        if problem.beta_class is BetaClass.TWO and not problem.smoothing_claim:
            table.log_factor_order = log_factor_order(rows)
        logger.info("Spatial study %s: fitted order %.3f", problem.name, table.fitted_order)

    if spot_check and not problem.is_linear:
        finest_sys, finest_final, _ = outcomes[len(meshes) - 1]
        halved = StepperConfig.from_final_time(T, 2 * n_steps, krylov, scheme)
        refined_final, _ = _integrate(finest_sys, initial_state(problem, finest_sys.ops), halved)
        # Richardson estimate of the dt^2 error at dt
        temporal = finest_sys.norm(finest_final - refined_final) * 4.0 / 3.0
        table.spot_check_ratio = temporal / max(rows[-1].error, np.finfo(float).tiny)
        if table.spot_check_ratio > SPOT_CHECK_THRESHOLD:
            logger.warning(
                "Spatial study %s: temporal error is %.2f%% of the finest spatial error",
                problem.name,
                100.0 * table.spot_check_ratio,
            )
    table.wall_seconds = time.perf_counter() - started
    return table
