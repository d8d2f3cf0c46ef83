"""Configuration for Krylov matrix-function actions."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..exceptions import ValidationError

DEFAULT_KRYLOV_M_MAX = 60
DEFAULT_KRYLOV_TOL = 1e-9
DEFAULT_KRYLOV_MAX_SUBSTEPS = 128


@dataclass(frozen=True)
class KrylovParams:
    """Arnoldi dimension cap, relative accuracy target and substep budget."""

    m_max: int = DEFAULT_KRYLOV_M_MAX
    tol: float = DEFAULT_KRYLOV_TOL
    max_substeps: int = DEFAULT_KRYLOV_MAX_SUBSTEPS

    def __post_init__(self) -> None:
        if self.m_max < 2:
            raise ValidationError("m_max must be at least 2", field="m_max", value=self.m_max)
        if not 0.0 < self.tol < 1.0:
            raise ValidationError("tol must lie in (0, 1)", field="tol", value=self.tol)
        if self.max_substeps < 1:
            raise ValidationError(
                "max_substeps must be at least 1", field="max_substeps", value=self.max_substeps
            )

    def with_overrides(self, **overrides: float | int) -> KrylovParams:
        return replace(self, **overrides)
