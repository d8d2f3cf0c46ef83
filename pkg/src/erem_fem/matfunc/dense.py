"""Dense matrix exponential and phi_1 by Pade scaling and squaring."""

from __future__ import annotations

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from ..exceptions import MatrixFunctionError, ValidationError


def _as_square(matrix: ArrayLike) -> NDArray:
    a = np.asarray(matrix)
    if a.dtype.kind not in "fc":
        a = a.astype(float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("Matrix must be square", field="matrix", value=a.shape)
    if not np.all(np.isfinite(a)):
        raise ValidationError("Matrix has non-finite entries", field="matrix")
    return a


def dense_expm(matrix: ArrayLike) -> NDArray:
    """e^A via scipy's order-13 Pade approximant with scaling and squaring."""

    a = _as_square(matrix)
    try:
        result = scipy.linalg.expm(a)
    except (OverflowError, FloatingPointError) as exc:
        raise MatrixFunctionError(
            "Matrix exponential overflowed", details={"norm_1": float(np.abs(a).sum(0).max())}
        ) from exc
    if not np.all(np.isfinite(result)):
        raise MatrixFunctionError(
            "Matrix exponential overflowed", details={"norm_1": float(np.abs(a).sum(0).max())}
        )
    return result


def dense_phi1(matrix: ArrayLike) -> NDArray:
    """phi_1(A) = A^{-1}(e^A - I), read off the augmented exponential exp([[A, I], [0, 0]])."""

    a = _as_square(matrix)
    n = a.shape[0]
    block = np.zeros((2 * n, 2 * n), dtype=a.dtype)
    block[:n, :n] = a
    block[:n, n:] = np.eye(n)
    return dense_expm(block)[:n, n:]
