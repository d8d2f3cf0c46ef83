"""Matrix exponential and phi_1 actions, dense and Krylov."""

from .config import (
    DEFAULT_KRYLOV_M_MAX,
    DEFAULT_KRYLOV_MAX_SUBSTEPS,
    DEFAULT_KRYLOV_TOL,
    KrylovParams,
)
from .dense import dense_expm, dense_phi1
from .krylov import (
    KrylovStats,
    OperatorAction,
    check_linearity,
    krylov_expmv,
    krylov_expmv_with_stats,
    krylov_phi1v,
    krylov_phi1v_with_stats,
)

__all__ = [
    "DEFAULT_KRYLOV_M_MAX",
    "DEFAULT_KRYLOV_MAX_SUBSTEPS",
    "DEFAULT_KRYLOV_TOL",
    "KrylovParams",
    "KrylovStats",
    "OperatorAction",
    "check_linearity",
    "dense_expm",
    "dense_phi1",
    "krylov_expmv",
    "krylov_expmv_with_stats",
    "krylov_phi1v",
    "krylov_phi1v_with_stats",
]
