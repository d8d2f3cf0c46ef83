"""Configuration for fixed-step time integration."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..exceptions import ValidationError
from ..matfunc import KrylovParams
from ..types import Scheme

DEFAULT_SCHEME = Scheme.EREM
FINAL_TIME_TOL = 1e-12


@dataclass(frozen=True)
class StepperConfig:
    """Fixed step dt repeated n_steps times."""

    dt: float
    n_steps: int
    krylov: KrylovParams = field(default_factory=KrylovParams)
    scheme: Scheme = DEFAULT_SCHEME

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValidationError("dt must be positive", field="dt", value=self.dt)
        if self.n_steps < 1:
            raise ValidationError("n_steps must be at least 1", field="n_steps", value=self.n_steps)
        object.__setattr__(self, "scheme", Scheme(self.scheme))

    @property
    def final_time(self) -> float:
        return self.dt * self.n_steps

    @classmethod
    def from_final_time(
        cls,
        final_time: float,
        n_steps: int,
        krylov: KrylovParams | None = None,
        scheme: Scheme = DEFAULT_SCHEME,
    ) -> StepperConfig:
        if not final_time > 0:
            raise ValidationError(
                "final_time must be positive", field="final_time", value=final_time
            )
        if n_steps < 1:
            raise ValidationError("n_steps must be at least 1", field="n_steps", value=n_steps)
        return cls(
            dt=final_time / n_steps,
            n_steps=n_steps,
            krylov=krylov or KrylovParams(),
            scheme=scheme,
        )

    def check_final_time(self, final_time: float) -> None:
        """Enforce dt * n_steps = T to 1e-12 (relative for T > 1)."""

        if abs(self.final_time - final_time) > FINAL_TIME_TOL * max(1.0, abs(final_time)):
            raise ValidationError(
                "dt * n_steps does not equal the final time",
                field="dt",
                value=self.dt,
                details={"n_steps": self.n_steps, "final_time": final_time},
            )
