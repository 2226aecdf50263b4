"""
Linear Algebra Helpers - Tolerances, numerical rank and basis conventions shared by the core
"""

from typing import Optional

import numpy as np
from scipy import linalg

from src.lda.errors import SketchRankError

# Unit roundoff of IEEE binary64.
UNIT_ROUNDOFF = np.finfo(np.float64).eps / 2


def default_rank_tol(shape) -> float:
    """Relative singular value threshold max(m, n)·u."""
    return max(shape) * UNIT_ROUNDOFF


def numerical_rank(
    matrix: np.ndarray,
    rel_tol: Optional[float] = None,
    scale: Optional[float] = None,
) -> int:
    """Count singular values above ``rel_tol * scale``.

    ``scale`` defaults to the largest singular value of ``matrix``; pass an
    external bound when the matrix may be pure rounding noise.
    """
    matrix = np.atleast_2d(matrix)
    if matrix.size == 0:
        return 0
    sv = linalg.svdvals(matrix)
    if rel_tol is None:
        rel_tol = default_rank_tol(matrix.shape)
    if scale is None:
        scale = sv[0]
    if scale == 0.0:
        return 0
    return int(np.count_nonzero(sv > rel_tol * scale))


def column_signs(matrix: np.ndarray) -> np.ndarray:
    """+1 or -1 per column: the sign of its first entry that is not negligible."""
    signs = np.ones(matrix.shape[1])
    for j in range(matrix.shape[1]):
        col = matrix[:, j]
        peak = np.abs(col).max()
        if peak == 0.0:
            continue
        first = np.flatnonzero(np.abs(col) > UNIT_ROUNDOFF * peak)[0]
        if col[first] < 0:
            signs[j] = -1.0
    return signs


def fix_column_signs(matrix: np.ndarray) -> np.ndarray:
    """Flip columns so the first entry that is not negligible is positive."""
    matrix = np.asarray(matrix, dtype=np.float64)
    return matrix * column_signs(matrix)


def qr_positive(matrix: np.ndarray):
    """Economic QR with a nonnegative diagonal on R."""
    q, r = linalg.qr(matrix, mode="economic")
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs, r * signs[:, None]


def orthonormal_basis(matrix: np.ndarray, what: str = "matrix") -> np.ndarray:
    """Orthonormal basis of a full-column-rank matrix.

    Raises SketchRankError if the columns are numerically dependent.
    """
    matrix = as_columns(matrix)
    k = matrix.shape[1]
    if numerical_rank(matrix) < k:
        raise SketchRankError(f"{what} not full column rank")
    q, _ = qr_positive(matrix)
    return q


def as_columns(matrix) -> np.ndarray:
    """View a vector as a single column; leave matrices alone."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim == 1:
        return matrix.reshape(-1, 1)
    return matrix


def largest_principal_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Largest principal angle between span(a) and span(b), in radians."""
    return float(linalg.subspace_angles(as_columns(a), as_columns(b)).max())
