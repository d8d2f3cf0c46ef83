"""Execute a validated RunConfig and write its artifacts."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..convergence import ConvergenceTable, cells_for, run_spatial_study, run_temporal_study
from ..integrator import NormTracker, SnapshotRecorder, StepperConfig, erem_integrate
from ..problems import discretize, initial_state
from ..types import StudyKind
from ..utils import halving_sequence
from .config import RunConfig
from .report import write_single_run, write_study

logger = logging.getLogger(__name__)


@dataclass
class RunOutcome:
    exit_status: int
    artifacts: list[Path] = field(default_factory=list)
    table: ConvergenceTable | None = None


def default_jobs() -> int:
    return os.cpu_count() or 1


def run(cfg: RunConfig) -> RunOutcome:
    """Run the configured study.

    Exit status 0 means the run completed; order verdicts are reported in the summary.
    """

    spec = cfg.spec
    jobs = cfg.jobs or default_jobs()
    out_dir = Path(cfg.output_path)
    logger.info("Running %s on %s with %d worker(s)", cfg.study.value, spec.name, jobs)

    if cfg.study is StudyKind.TEMPORAL:
        table = run_temporal_study(
            spec,
            cfg.resolved_h(),
            halving_sequence(cfg.resolved_dt(), cfg.levels),
            cfg.krylov,
            mass_mode=cfg.mass_mode,
            nemytskii_mode=cfg.nemytskii_mode,
            scheme=cfg.scheme,
            reference_factor=cfg.reference_factor,
            sample_times=cfg.sample_times,
            jobs=jobs,
        )
        return RunOutcome(0, write_study(table, out_dir), table)

    if cfg.study is StudyKind.SPATIAL:
        table = run_spatial_study(
            spec,
            halving_sequence(cfg.resolved_h(), cfg.levels),
            cfg.resolved_dt(),
            cfg.krylov,
            mass_mode=cfg.mass_mode,
            nemytskii_mode=cfg.nemytskii_mode,
            scheme=cfg.scheme,
            reference_levels=cfg.reference_levels,
            sample_times=cfg.sample_times,
            jobs=jobs,
        )
        return RunOutcome(0, write_study(table, out_dir), table)

    mesh = spec.build_mesh(cells_for(spec, cfg.resolved_h()))
    system = discretize(spec, mesh, cfg.mass_mode, cfg.nemytskii_mode)
    step_cfg = StepperConfig(
        dt=cfg.resolved_dt(),
        n_steps=round(spec.final_time / cfg.resolved_dt()),
        krylov=cfg.krylov,
        scheme=cfg.scheme,
    )
    step_cfg.check_final_time(spec.final_time)
    tracker = NormTracker(system)
    recorder = SnapshotRecorder(cfg.sample_times)
    result = erem_integrate(system, initial_state(spec, system.ops), step_cfg, [tracker, recorder])
    logger.info(
        "Single run %s: final L2 norm %.6e, growth constant %.4f",
        spec.name,
        tracker.norms[-1],
        tracker.growth_constant,
    )
    artifacts = write_single_run(
        spec.name, mesh.h, result, tracker, out_dir, mesh.nodes, system.ops.expand
    )
    return RunOutcome(0, artifacts)
