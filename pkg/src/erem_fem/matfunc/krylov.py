"""Krylov (Arnoldi) actions of e^{tK} and phi_1(tK) on a vector.

The projected functions are evaluated with the dense Pade exponential of a small
augmented Hessenberg matrix. The augmentation yields both the projected action and
the generalized residual estimate from a single ``expm`` call. When the estimate does
not meet the target at the maximal dimension, the time interval is split into
substeps which reuse the basis already built.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from numpy.typing import ArrayLike, NDArray

from ..exceptions import KrylovConvergenceError, ValidationError
from ..types import DofVector
from .config import KrylovParams
from .dense import dense_expm

logger = logging.getLogger(__name__)

SAFETY = 0.1
LINEARITY_TOL = 1e-12
_BREAKDOWN_TOL = 1e-13
_NORM_FLOOR = 1e-6
_MIN_TAU_FRACTION = 2.0**-40


@dataclass(frozen=True)
class OperatorAction:
    """A linear map given only through its action on vectors."""

    dim: int
    apply: Callable[[DofVector], DofVector]
    norm_estimate: float = 0.0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValidationError(
                "Operator dimension must be positive", field="dim", value=self.dim
            )
        if self.norm_estimate < 0 or not np.isfinite(self.norm_estimate):
            raise ValidationError(
                "norm_estimate must be finite and nonnegative",
                field="norm_estimate",
                value=self.norm_estimate,
            )

    def __call__(self, v: DofVector) -> DofVector:
        out = np.asarray(self.apply(v))
        if out.shape != (self.dim,):
            raise ValidationError(
                "dimension-mismatch: operator output has the wrong length",
                field="apply",
                value=out.shape,
                details={"expected": self.dim},
            )
        return out

    @classmethod
    def from_matrix(cls, matrix: ArrayLike | sp.spmatrix) -> OperatorAction:
        """Wrap a dense or sparse square matrix; the norm estimate is its exact 1-norm."""

        if sp.issparse(matrix):
            a = sp.csr_matrix(matrix)
            norm_1 = float(abs(a).sum(axis=0).max()) if a.nnz else 0.0
        else:
            a = np.asarray(matrix, dtype=float)
            norm_1 = float(np.abs(a).sum(axis=0).max()) if a.size else 0.0
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("Matrix must be square", field="matrix", value=a.shape)
        return cls(dim=a.shape[0], apply=lambda v: a @ v, norm_estimate=norm_1)

    def shifted(self, c: float) -> OperatorAction:
        """v -> K v + c v."""

        return OperatorAction(
            dim=self.dim,
            apply=lambda v: self.apply(v) + c * v,
            norm_estimate=self.norm_estimate + abs(c),
        )

    def plus(self, other: OperatorAction) -> OperatorAction:
        if other.dim != self.dim:
            raise ValidationError(
                "dimension-mismatch: operators of different size",
                field="other",
                value=(self.dim, other.dim),
            )
        return OperatorAction(
            dim=self.dim,
            apply=lambda v: self.apply(v) + other.apply(v),
            norm_estimate=self.norm_estimate + other.norm_estimate,
        )


def check_linearity(
    op: OperatorAction, *, seed: int = 0, trials: int = 3, tol: float = LINEARITY_TOL
) -> float:
    """Randomized check that op(a u + b v) = a op(u) + b op(v); returns the worst defect."""

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        u, v = rng.standard_normal((2, op.dim))
        a, b = rng.standard_normal(2)
        lhs = op(a * u + b * v)
        rhs = a * op(u) + b * op(v)
        scale = max(float(np.linalg.norm(lhs)), float(np.linalg.norm(rhs)), 1.0)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)) / scale)
    if worst > tol:
        raise ValidationError(
            "Operator action is not linear", field="apply", value=worst, details={"tol": tol}
        )
    return worst


@dataclass(frozen=True)
class KrylovStats:
    substeps: int
    max_dimension: int
    error_estimate: float


class _Arnoldi:
    """Incrementally built orthonormal basis and Hessenberg matrix.

    Orthogonalization is classical Gram-Schmidt applied twice against the full basis.
    """

    def __init__(self, op: OperatorAction, start: DofVector, m_max: int):
        self.op = op
        self.beta = float(np.linalg.norm(start))
        self.basis = np.zeros((m_max + 1, op.dim))
        self.basis[0] = start / self.beta
        self.hess = np.zeros((m_max + 1, m_max))
        self.size = 0
        self.breakdown = False

    def extend(self) -> None:
        j = self.size
        w = self.op(self.basis[j])
        active = self.basis[: j + 1]
        for _ in range(2):
            coeffs = active @ w
            w = w - coeffs @ active
            self.hess[: j + 1, j] += coeffs
        h_next = float(np.linalg.norm(w))
        self.hess[j + 1, j] = h_next
        scale = max(self.op.norm_estimate, float(np.linalg.norm(self.hess[: j + 1, j])))
        if h_next <= _BREAKDOWN_TOL * scale:
            self.breakdown = True
            self.hess[j + 1, j] = 0.0
        else:
            self.basis[j + 1] = w / h_next
        self.size = j + 1


def _project_exp(hess: NDArray, m: int, tau: float) -> tuple[NDArray, float]:
    """Coefficients of e^{tau H} e1 and the residual-row entry."""

    z = np.zeros((m + 1, m + 1))
    z[:m, :m] = tau * hess[:m, :m]
    z[m, m - 1] = tau * hess[m, m - 1]
    f = dense_expm(z)
    return f[:m, 0], abs(float(f[m, 0]))


def _project_phi1(hess: NDArray, m: int, tau: float) -> tuple[NDArray, float]:
    """Coefficients of tau phi_1(tau H) e1 and the residual-row entry.

    The extra source row carries the constant forcing, so the last column of the
    exponential integrates y' = tau H y + tau e1 from y(0) = 0.
    """

    z = np.zeros((m + 2, m + 2))
    z[:m, :m] = tau * hess[:m, :m]
    z[0, m + 1] = tau
    z[m, m - 1] = tau * hess[m, m - 1]
    f = dense_expm(z)
    return f[:m, m + 1], abs(float(f[m, m + 1]))


def _advance(
    op: OperatorAction,
    t: float,
    v: DofVector,
    params: KrylovParams,
    *,
    forced: bool,
) -> tuple[DofVector, KrylovStats]:
    """Integrate w' = K w (forced=False, w(0) = v) or w' = K w + v (forced=True, w(0) = 0)."""

    w = np.zeros(op.dim) if forced else np.array(v, dtype=float)
    project = _project_phi1 if forced else _project_exp
    elapsed = 0.0
    tau = t
    substeps = 0
    max_dim = 0
    worst_err = 0.0

    while t - elapsed > 1e-14 * t:
        source = op(w) + v if forced else w
        beta = float(np.linalg.norm(source))
        if beta == 0.0:
            break

        arnoldi = _Arnoldi(op, source, params.m_max)
        while True:
            arnoldi.extend()
            m = arnoldi.size
            if arnoldi.breakdown:
                tau = t - elapsed
            coeffs, err = project(arnoldi.hess, m, tau)
            step = beta * (coeffs @ arnoldi.basis[:m])
            candidate = w + step if forced else step
            err = 0.0 if arnoldi.breakdown else beta * err
            target = SAFETY * params.tol * (tau / t) * max(
                float(np.linalg.norm(candidate)), _NORM_FLOOR * beta
            )
            if err <= target:
                break
            if m == params.m_max:
                while err > target:
                    tau *= 0.5
                    if tau < _MIN_TAU_FRACTION * t:
                        raise KrylovConvergenceError(
                            "Krylov substep collapsed without meeting the tolerance",
                            substeps=substeps,
                            error_estimate=err,
                        )
                    coeffs, err = project(arnoldi.hess, m, tau)
                    step = beta * (coeffs @ arnoldi.basis[:m])
                    candidate = w + step if forced else step
                    err = beta * err
                    target = SAFETY * params.tol * (tau / t) * max(
                        float(np.linalg.norm(candidate)), _NORM_FLOOR * beta
                    )
                break

        w = candidate
        elapsed += tau
        substeps += 1
        max_dim = max(max_dim, arnoldi.size)
        worst_err = max(worst_err, err)
        if not np.all(np.isfinite(w)):
            raise KrylovConvergenceError(
                "Krylov action produced non-finite values", substeps=substeps, error_estimate=err
            )
        if substeps >= params.max_substeps and t - elapsed > 1e-14 * t:
            raise KrylovConvergenceError(
                "no-convergence: Krylov substep budget exhausted",
                substeps=substeps,
                error_estimate=err,
                details={"elapsed": elapsed, "t": t, "tau": tau},
            )
        # each substep first tries the whole remaining interval
        tau = t - elapsed

    stats = KrylovStats(substeps=substeps, max_dimension=max_dim, error_estimate=worst_err)
    if substeps > 1:
        logger.debug(
            "Krylov substepping: %d substeps, dimension <= %d, estimate %.3e",
            substeps,
            max_dim,
            worst_err,
        )
    return w, stats


def _check_inputs(op: OperatorAction, t: float, v: DofVector) -> DofVector:
    vec = np.asarray(v, dtype=float)
    if vec.shape != (op.dim,):
        raise ValidationError(
            "dimension-mismatch: vector length differs from operator dimension",
            field="v",
            value=vec.shape,
            details={"expected": op.dim},
        )
    if not np.all(np.isfinite(vec)):
        raise ValidationError("Vector has non-finite entries", field="v")
    if not np.isfinite(t):
        raise ValidationError("Time must be finite", field="t", value=t)
    return vec


def krylov_expmv_with_stats(
    op: OperatorAction, t: float, v: DofVector, params: KrylovParams | None = None
) -> tuple[DofVector, KrylovStats]:
    params = params or KrylovParams()
    vec = _check_inputs(op, t, v)
    if t < 0:
        raise ValidationError("t must be nonnegative", field="t", value=t)
    if t == 0 or not np.any(vec):
        return vec.copy(), KrylovStats(substeps=0, max_dimension=0, error_estimate=0.0)
    return _advance(op, t, vec, params, forced=False)


def krylov_expmv(
    op: OperatorAction, t: float, v: DofVector, params: KrylovParams | None = None
) -> DofVector:
    """Approximate e^{tK} v to relative accuracy ``params.tol``."""

    return krylov_expmv_with_stats(op, t, v, params)[0]


def krylov_phi1v_with_stats(
    op: OperatorAction, t: float, v: DofVector, params: KrylovParams | None = None
) -> tuple[DofVector, KrylovStats]:
    params = params or KrylovParams()
    vec = _check_inputs(op, t, v)
    if t <= 0:
        raise ValidationError("t must be positive", field="t", value=t)
    if not np.any(vec):
        return np.zeros(op.dim), KrylovStats(substeps=0, max_dimension=0, error_estimate=0.0)
    w, stats = _advance(op, t, vec, params, forced=True)
    return w / t, stats


def krylov_phi1v(
    op: OperatorAction, t: float, v: DofVector, params: KrylovParams | None = None
) -> DofVector:
    """Approximate phi_1(tK) v.

    Exponential schemes need dt * phi_1(dt K) r; multiplying by ``t`` is left to the caller.
    """

    return krylov_phi1v_with_stats(op, t, v, params)[0]
