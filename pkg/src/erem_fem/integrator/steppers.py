"""One-step exponential schemes."""

from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np

from ..base import SemilinearSystemBase
from ..exceptions import ValidationError
from ..matfunc import KrylovParams, krylov_expmv, krylov_phi1v
from ..types import DofVector, Scheme
from .system import _ensure_finite, jacobian_action, nemytskii_apply, remainder_Gn

logger = logging.getLogger(__name__)

Stepper = Callable[[SemilinearSystemBase, DofVector, float, KrylovParams | None], DofVector]


def _check_step(system: SemilinearSystemBase, u_n: DofVector, dt: float) -> DofVector:
    if dt <= 0:
        raise ValidationError("dt must be positive", field="dt", value=dt)
    u = np.asarray(u_n, dtype=float)
    if u.shape != (system.dim,):
        raise ValidationError(
            "dimension-mismatch: state has the wrong length",
            field="u_n",
            value=u.shape,
            details={"expected": system.dim},
        )
    return u


def erem_step(
    system: SemilinearSystemBase, u_n: DofVector, dt: float, krylov: KrylovParams | None = None
) -> DofVector:
    """u_{n+1} = u_n + dt phi_1(dt K_n) [K_n u_n + G_n(u_n)], one phi_1 action per step."""

    u = _check_step(system, u_n, dt)
    k_n = jacobian_action(system, u)
    # K_n u_n + G_n(u_n) reduces to A_h u_n + P_h F(u_n)
    r = system.linear_action()(u) + nemytskii_apply(system, u)
    u_next = u + dt * krylov_phi1v(k_n, dt, r, krylov)
    return _ensure_finite(u_next, "erem step")


def erem_two_term_step(
    system: SemilinearSystemBase, u_n: DofVector, dt: float, krylov: KrylovParams | None = None
) -> DofVector:
    """u_{n+1} = e^{dt K_n} u_n + dt phi_1(dt K_n) G_n(u_n)."""

    u = _check_step(system, u_n, dt)
    jac = system.jacobian(u)
    k_n = system.linear_action().plus(jac)
    g_n = remainder_Gn(system, u, u, jac)
    u_next = krylov_expmv(k_n, dt, u, krylov)
    if np.any(g_n):
        u_next = u_next + dt * krylov_phi1v(k_n, dt, g_n, krylov)
    return _ensure_finite(u_next, "erem two-term step")


def exp_euler_step(
    system: SemilinearSystemBase, u_n: DofVector, dt: float, krylov: KrylovParams | None = None
) -> DofVector:
    """u_{n+1} = u_n + dt phi_1(dt A_h) [A_h u_n + P_h F(u_n)], first order."""

    u = _check_step(system, u_n, dt)
    a = system.linear_action()
    r = a(u) + nemytskii_apply(system, u)
    u_next = u + dt * krylov_phi1v(a, dt, r, krylov)
    return _ensure_finite(u_next, "exponential Euler step")


STEPPERS: dict[Scheme, Stepper] = {
    Scheme.EREM: erem_step,
    Scheme.EREM_TWO_TERM: erem_two_term_step,
    Scheme.EXP_EULER: exp_euler_step,
}


def stepper_for(scheme: Scheme | str) -> Stepper:
    return STEPPERS[Scheme(scheme)]
