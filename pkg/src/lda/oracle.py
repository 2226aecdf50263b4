"""
Oracle Verification - Exact null LDA and the criteria the fast orientation must meet

The exact route works in r-dimensional range(S_T) coordinates: the null space
N of U1^T S_W U1 intersected with range(S_T) carries all discriminant
information, and the principal components of S_B inside it give W_oracle.
"""

from typing import List, Optional

import numpy as np
from pydantic import BaseModel
from scipy import linalg

from src.lda.errors import DimensionMismatchError, RankAssumptionError
from src.lda.fast_null import TotalScatterEigen, apply_g
from src.lda.linalg import UNIT_ROUNDOFF, largest_principal_angle, numerical_rank, orthonormal_basis
from src.lda.scatter import ScatterFactors, factor_norm, scatter_apply
from src.utils.logger import get_logger

logger = get_logger(__name__)

WITHIN_TOL = 1e-8
BETWEEN_TOL = 1e-6
FIXED_POINT_TOL = 1e-8
SPAN_TOL = 1e-8


class VerificationReport(BaseModel):
    """Scaled null LDA residuals for an orientation matrix, with pass flags."""

    within_residual: float
    between_norms: List[float]
    rank_W: Optional[int] = None
    fixed_point_residual: Optional[float] = None
    span_angle_vs_oracle: Optional[float] = None
    within_pass: bool
    between_pass: bool
    rank_pass: Optional[bool] = None
    fixed_point_pass: Optional[bool] = None
    span_pass: Optional[bool] = None

    @property
    def all_passed(self) -> bool:
        flags = [self.within_pass, self.between_pass, self.rank_pass,
                 self.fixed_point_pass, self.span_pass]
        return all(flag is True for flag in flags)


def exact_null_lda(factors: ScatterFactors, eigen: TotalScatterEigen) -> np.ndarray:
    """Orthonormal d x (c-1) null LDA basis computed without any random sketch."""
    k = factors.c - 1
    P_w = eigen.U1.T @ factors.H_w

    # null space of U1^T S_W U1 = P_w P_w^T, read off the left singular vectors of P_w
    left, sv, _ = linalg.svd(P_w, full_matrices=True)
    lam = np.zeros(eigen.r)
    lam[: sv.shape[0]] = sv ** 2
    lam_max = lam.max()
    zero = lam <= (factors.n - 1) * UNIT_ROUNDOFF * lam_max
    N = left[:, zero]
    if N.shape[1] != k:
        raise RankAssumptionError(
            f"rank assumption violated: null space of the projected within-class "
            f"scatter has dimension {N.shape[1]}, expected {k}"
        )

    B_n = N.T @ (eigen.U1.T @ factors.H_b)
    mu, V = linalg.eigh(B_n @ B_n.T)
    order = np.argsort(mu)[::-1]
    mu, V = mu[order], V[:, order]
    positive = mu > (factors.n - 1) * UNIT_ROUNDOFF * max(mu[0], 0.0)
    if np.count_nonzero(positive) != k:
        raise RankAssumptionError(
            f"rank assumption violated: between-class scatter has rank "
            f"{np.count_nonzero(positive)} inside the null space, expected {k}"
        )
    return eigen.U1 @ (N @ V[:, positive])


def _scaled(value: float, scale: float) -> float:
    return value / scale if scale > 0 else 0.0


def criteria_check(factors: ScatterFactors, W: np.ndarray) -> VerificationReport:
    """Scaled ||S_W W||_F and per-column ||S_B w|| for the two null LDA criteria.

    within  = ||S_W W||_F / (||H_w||_2^2 ||W||_F)        passes when <= 1e-8
    between = ||S_B w|| / (||H_b||_2^2 ||w||) per column  passes when all > 1e-6
    """
    W = np.asarray(W, dtype=np.float64)
    if W.ndim == 1:
        W = W.reshape(-1, 1)
    if W.shape != (factors.d, factors.c - 1):
        raise DimensionMismatchError(
            f"W must be {factors.d} x {factors.c - 1}, got {W.shape[0]} x {W.shape[1]}"
        )
    hw2 = factor_norm(factors, "W") ** 2
    hb2 = factor_norm(factors, "B") ** 2

    within = _scaled(float(np.linalg.norm(scatter_apply(factors, "W", W))),
                     hw2 * float(np.linalg.norm(W)))
    between_abs = np.linalg.norm(scatter_apply(factors, "B", W), axis=0)
    col_norms = np.linalg.norm(W, axis=0)
    between = [_scaled(float(b), hb2 * float(w)) for b, w in zip(between_abs, col_norms)]

    return VerificationReport(
        within_residual=within,
        between_norms=between,
        within_pass=within <= WITHIN_TOL,
        between_pass=all(b > BETWEEN_TOL for b in between),
    )


def fixed_point_check(
    factors: ScatterFactors,
    eigen: TotalScatterEigen,
    W: np.ndarray,
    floor: float = np.finfo(np.float64).tiny,
) -> float:
    """||G W - W||_F / max(||W||_F, floor) with G = S_T^+ S_B applied through factors."""
    W = np.asarray(W, dtype=np.float64)
    residual = np.linalg.norm(apply_g(factors, eigen, W) - W)
    return float(residual / max(float(np.linalg.norm(W)), floor))


def span_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Largest principal angle between span(A) and span(B); both must have full column rank."""
    Q_A = orthonormal_basis(A, "A")
    Q_B = orthonormal_basis(B, "B")
    return largest_principal_angle(Q_A, Q_B)


def verify_orientation(
    factors: ScatterFactors,
    eigen: TotalScatterEigen,
    W: np.ndarray,
) -> VerificationReport:
    """Full report: both criteria, rank, fixed point and agreement with the exact oracle."""
    report = criteria_check(factors, W)
    W = np.asarray(W, dtype=np.float64).reshape(factors.d, -1)

    rank_W = numerical_rank(W)
    fixed_point = fixed_point_check(factors, eigen, W)

    span_angle = None
    if rank_W == factors.c - 1:
        try:
            span_angle = span_distance(W, exact_null_lda(factors, eigen))
        except RankAssumptionError as e:
            logger.warning("oracle unavailable for this dataset", error=str(e))

    return report.model_copy(update={
        "rank_W": rank_W,
        "fixed_point_residual": fixed_point,
        "span_angle_vs_oracle": span_angle,
        "rank_pass": rank_W == factors.c - 1,
        "fixed_point_pass": fixed_point <= FIXED_POINT_TOL,
        "span_pass": span_angle is not None and span_angle <= SPAN_TOL,
    })
