"""Fixed-step time integration loop with observers."""

from __future__ import annotations

import logging
import time as _time
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from ..base import SemilinearSystemBase
from ..exceptions import EremError, IntegrationError, ValidationError
from ..types import DofVector, Snapshot
from .config import StepperConfig
from .steppers import stepper_for

logger = logging.getLogger(__name__)


class Observer(Protocol):
    def __call__(self, step: int, time: float, state: DofVector) -> None: ...


@dataclass
class IntegrationResult:
    final_state: DofVector
    final_time: float
    n_steps: int
    snapshots: list[Snapshot] = field(default_factory=list)
    wall_seconds: float = 0.0


class SnapshotRecorder:
    """Keeps copies of the state at the requested times (matched to the step grid)."""

    def __init__(self, times: Sequence[float], *, rel_tol: float = 1e-9):
        self.times = sorted(float(t) for t in times)
        self.rel_tol = rel_tol
        self.snapshots: list[Snapshot] = []

    def __call__(self, step: int, time: float, state: DofVector) -> None:
        for requested in self.times:
            if abs(time - requested) <= self.rel_tol * max(1.0, abs(requested)):
                self.snapshots.append(Snapshot(step=step, time=time, state=np.array(state)))
                return


class NormTracker:
    """Records sup_n |u_n| in the system norm."""

    def __init__(self, system: SemilinearSystemBase):
        self.system = system
        self.initial_norm = 0.0
        self.sup_norm = 0.0
        self.norms: list[float] = []

    def __call__(self, step: int, time: float, state: DofVector) -> None:
        value = self.system.norm(state)
        if step == 0:
            self.initial_norm = value
        self.norms.append(value)
        self.sup_norm = max(self.sup_norm, value)

    @property
    def growth_constant(self) -> float:
        """Smallest C with sup_n |u_n| <= C (1 + |u_0|)."""

        return self.sup_norm / (1.0 + self.initial_norm)


def _notify(observers: Iterable[Observer], step: int, time: float, state: DofVector) -> None:
    view = state.view()
    view.flags.writeable = False
    for observer in observers:
        observer(step, time, view)


def erem_integrate(
    system: SemilinearSystemBase,
    u0: DofVector,
    cfg: StepperConfig,
    observers: Sequence[Observer] = (),
) -> IntegrationResult:
    """Apply ``cfg.n_steps`` steps of the configured scheme starting from u0 (normally P_h u_0).

    Observers are called with (step, t_n, read-only u_n) for n = 0 .. N.
    """

    u = np.array(u0, dtype=float)
    if u.shape != (system.dim,):
        raise ValidationError(
            "dimension-mismatch: initial state has the wrong length",
            field="u0",
            value=u.shape,
            details={"expected": system.dim},
        )
    step_fn = stepper_for(cfg.scheme)
    recorders = [obs for obs in observers if isinstance(obs, SnapshotRecorder)]
    started = _time.perf_counter()
    _notify(observers, 0, 0.0, u)

    for n in range(cfg.n_steps):
        t_n = n * cfg.dt
        try:
            u = step_fn(system, u, cfg.dt, cfg.krylov)
        except EremError as exc:
            logger.error("Step %d at t=%.6g failed: %s", n, t_n, exc.message)
            raise IntegrationError(
                f"Step {n} at t={t_n:.6g} failed: {exc.message}",
                step_index=n,
                time=t_n,
                details={"cause": type(exc).__name__, "dt": cfg.dt, **exc.details},
            ) from exc
        _notify(observers, n + 1, (n + 1) * cfg.dt, u)
        logger.debug("Step %d/%d done, t=%.6g", n + 1, cfg.n_steps, (n + 1) * cfg.dt)

    elapsed = _time.perf_counter() - started
    logger.info(
        "Integrated %d %s steps of dt=%.4e on %d dofs in %.2fs",
        cfg.n_steps,
        cfg.scheme.value,
        cfg.dt,
        system.dim,
        elapsed,
    )
    snapshots = [snap for rec in recorders for snap in rec.snapshots]
    return IntegrationResult(
        final_state=u,
        final_time=cfg.final_time,
        n_steps=cfg.n_steps,
        snapshots=snapshots,
        wall_seconds=elapsed,
    )
