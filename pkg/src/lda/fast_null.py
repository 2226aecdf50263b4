"""
Fast Null LDA - Orientation matrix W = S_T^+ S_B Y and its full-rank certificate

The total scatter S_T = U1 diag(sigma1^2) U1^T is obtained from the n x n Gram
matrix H_t^T H_t. With Q = Sigma1^-1 U1^T H_b, read off as V1^T A from the right
singular vectors V1 of H_t and the class weights H_b = H_t A, and QQ^T = R Lambda R^T,
U1 Sigma1^-1 R = [U_hat1, U_hat2] splits range(S_T) into the unit and null
eigenspaces of G = S_T^+ S_B. For a sketch Y,

    W = G Y = U_hat1 Z_hat1,    Z_hat1 = (U1 Q_hat R_hat1)^T Y = M^T Y,

so rank(W) = c-1 exactly when Z_hat1 is nonsingular.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel
from scipy import linalg

from src.lda.errors import (
    DegenerateDatasetError,
    DimensionMismatchError,
    ScatterStructureError,
)
from src.lda.linalg import (
    UNIT_ROUNDOFF,
    column_signs,
    default_rank_tol,
    fix_column_signs,
    largest_principal_angle,
    orthonormal_basis,
    qr_positive,
)
from src.lda.scatter import ScatterFactors
from src.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_SAFETY_FACTOR = 10.0
DEFAULT_NEAR_SINGULAR_THRESHOLD = 1e-8
DEFAULT_UNIT_EIGENVALUE_TOL = 1e-8


class Verdict(str, Enum):
    """Outcome of the full-rank certificate."""

    NONSINGULAR = "nonsingular"
    NEAR_SINGULAR = "near_singular"
    SINGULAR = "singular"


@dataclass(frozen=True, eq=False)
class TotalScatterEigen:
    """Range basis U1 and singular values sigma1 of H_t, plus Q = Sigma1^-1 U1^T H_b.

    U2 stays implicit.
    """

    U1: np.ndarray
    sigma1: np.ndarray
    Q: np.ndarray

    @property
    def r(self) -> int:
        return self.sigma1.shape[0]

    @property
    def d(self) -> int:
        return self.U1.shape[0]


@dataclass(frozen=True, eq=False)
class ProjectorBasis:
    """U_hat1, U_hat2, the certificate basis M = U1 Q_hat R_hat1 and the spectrum of QQ^T."""

    U_hat1: np.ndarray
    U_hat2: np.ndarray
    M: np.ndarray
    lambda_diag: np.ndarray
    c_minus_1: int
    unit_residual: float
    null_residual: float

    @property
    def d(self) -> int:
        return self.M.shape[0]


class CertificateSummary(BaseModel):
    """Serializable part of a certificate report."""

    sigma_min: float
    sigma_max: float
    verdict: Verdict
    threshold: float
    singular_floor: float


@dataclass(frozen=True, eq=False)
class CertificateReport:
    """The (c-1) x (c-1) certificate Z_hat1, its extreme singular values and a verdict.

    ``Z_hat1`` is None for reports restored from a model file.
    """

    Z_hat1: Optional[np.ndarray]
    sigma_min: float
    sigma_max: float
    verdict: Verdict
    threshold: float
    singular_floor: float

    def summary(self) -> CertificateSummary:
        return CertificateSummary(
            sigma_min=self.sigma_min,
            sigma_max=self.sigma_max,
            verdict=self.verdict,
            threshold=self.threshold,
            singular_floor=self.singular_floor,
        )

    @classmethod
    def from_summary(cls, summary: CertificateSummary) -> "CertificateReport":
        return cls(
            Z_hat1=None,
            sigma_min=summary.sigma_min,
            sigma_max=summary.sigma_max,
            verdict=summary.verdict,
            threshold=summary.threshold,
            singular_floor=summary.singular_floor,
        )


class GeometricReport(BaseModel):
    """Largest principal angle between span(Y) and span(M)."""

    largest_angle: float
    smallest_cosine: float
    tolerance: float
    verdict: Verdict


def eigen_total(factors: ScatterFactors, tol: Optional[float] = None) -> TotalScatterEigen:
    """Range basis of S_T from the Gram matrix H_t^T H_t.

    The Gram eigenvectors V only serve to span range(H_t): the basis Q_t of
    H_t V is refined by the SVD of the small n x n matrix Q_t^T H_t, which
    keeps U1 orthonormal and sigma1 as accurate as a direct SVD of H_t.
    Singular values above ``tol * sigma_max`` are kept, the rule rank_report
    applies to H_t; ``tol`` defaults to max(d, n) * u.
    """
    H_t = factors.H_t
    evals, evecs = linalg.eigh(H_t.T @ H_t)
    if evals.size == 0 or evals[-1] <= 0.0:
        raise DegenerateDatasetError("degenerate dataset: total scatter is zero")

    Q_t, _ = qr_positive(H_t @ evecs[:, ::-1])
    left, s, right_t = linalg.svd(Q_t.T @ H_t, full_matrices=False)

    if tol is None:
        tol = default_rank_tol(H_t.shape)
    keep = s > tol * s[0]
    U1 = Q_t @ left[:, keep]
    signs = column_signs(U1)
    U1 = U1 * signs
    V1 = right_t[keep].T * signs
    sigma1 = s[keep]
    # Sigma1^-1 U1^T H_b without dividing by sigma1
    Q = V1.T @ factors.between_weights

    r = sigma1.shape[0]
    if r != factors.n - 1:
        logger.warning("total scatter rank differs from n-1", rank=r, expected=factors.n - 1)
    logger.debug("total scatter eigendecomposition", rank=r, sigma_max=float(sigma1[0]),
                 sigma_min=float(sigma1[-1]),
                 orthogonality=float(np.linalg.norm(U1.T @ U1 - np.eye(r))))

    for array in (U1, sigma1, Q):
        array.setflags(write=False)
    return TotalScatterEigen(U1=U1, sigma1=sigma1, Q=Q)


def apply_pinv(eigen: TotalScatterEigen, V: np.ndarray) -> np.ndarray:
    """S_T^+ V = U1 Sigma1^-2 U1^T V."""
    V = np.asarray(V, dtype=np.float64)
    if V.shape[0] != eigen.d:
        raise DimensionMismatchError(f"operand has {V.shape[0]} rows, expected {eigen.d}")
    coords = eigen.U1.T @ V
    scale = eigen.sigma1 ** 2
    coords = coords / (scale[:, None] if coords.ndim == 2 else scale)
    return eigen.U1 @ coords


def apply_g(factors: ScatterFactors, eigen: TotalScatterEigen, V: np.ndarray) -> np.ndarray:
    """G V = U1 Sigma1^-1 Q H_b^T V, which equals S_T^+ S_B V with one division by sigma1."""
    V = np.asarray(V, dtype=np.float64)
    if V.shape[0] != factors.d:
        raise DimensionMismatchError(f"operand has {V.shape[0]} rows, expected {factors.d}")
    coords = eigen.Q @ (factors.H_b.T @ V)
    coords = coords / (eigen.sigma1[:, None] if coords.ndim == 2 else eigen.sigma1)
    return eigen.U1 @ coords


def project_complement(eigen: TotalScatterEigen, V: np.ndarray) -> np.ndarray:
    """(I - U1 U1^T) V: the component of V in the null space of S_T."""
    V = np.asarray(V, dtype=np.float64)
    return V - eigen.U1 @ (eigen.U1.T @ V)


def _relative(residual: np.ndarray, reference: np.ndarray) -> float:
    ref = np.linalg.norm(reference)
    return float(np.linalg.norm(residual) / ref) if ref > 0 else float(np.linalg.norm(residual))


def build_projector_basis(
    eigen: TotalScatterEigen,
    factors: ScatterFactors,
    unit_tol: float = DEFAULT_UNIT_EIGENVALUE_TOL,
) -> ProjectorBasis:
    """Construct U_hat1 and M = U1 Q_hat R_hat1.

    Raises ScatterStructureError when the spectrum of QQ^T is not c-1 ones
    followed by zeros, which means the rank assumptions on the data fail.
    """
    k = factors.c - 1
    r = eigen.r
    if k > r:
        raise ScatterStructureError(
            f"scatter structure violated: c-1 = {k} exceeds rank(S_T) = {r}"
        )

    Q = eigen.Q
    lam, R = linalg.eigh(Q @ Q.T)
    order = np.argsort(lam)[::-1]
    lam, R = lam[order], fix_column_signs(R[:, order])

    unit_ok = np.all(np.abs(lam[:k] - 1.0) <= unit_tol)
    null_ok = np.all(np.abs(lam[k:]) <= unit_tol)
    if not (unit_ok and null_ok):
        logger.error("QQ^T spectrum is not diag(I, 0)", eigenvalues=lam.tolist(), c_minus_1=k)
        raise ScatterStructureError(
            "scatter structure violated: eigenvalues of QQ^T are not "
            f"{k} ones and {r - k} zeros within {unit_tol:g}"
        )

    sigma_inv_R = R / eigen.sigma1[:, None]
    U_hat = eigen.U1 @ sigma_inv_R
    U_hat1, U_hat2 = U_hat[:, :k], U_hat[:, k:]

    # R_hat1 = R_hat^-T E1, the transposed first c-1 rows of R_hat^-1
    Q_hat, R_hat = qr_positive(sigma_inv_R)
    E1 = np.eye(r, k)
    R_hat1 = linalg.solve_triangular(R_hat, E1, trans="T", lower=False)
    M = eigen.U1 @ (Q_hat @ R_hat1)

    unit_residual = _relative(apply_g(factors, eigen, U_hat1) - U_hat1, U_hat1)
    null_residual = _relative(apply_g(factors, eigen, U_hat2), U_hat2) if U_hat2.size else 0.0
    logger.debug("projector basis built", c_minus_1=k, rank=r,
                 unit_residual=unit_residual, null_residual=null_residual)

    for array in (U_hat1, U_hat2, M, lam):
        array.setflags(write=False)
    return ProjectorBasis(
        U_hat1=U_hat1,
        U_hat2=U_hat2,
        M=M,
        lambda_diag=lam,
        c_minus_1=k,
        unit_residual=unit_residual,
        null_residual=null_residual,
    )


def _check_sketch(Y: np.ndarray, d: int, k: int) -> np.ndarray:
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y.reshape(-1, 1)
    if Y.shape != (d, k):
        raise DimensionMismatchError(f"sketch must be {d} x {k}, got {Y.shape[0]} x {Y.shape[1]}")
    return Y


def fast_null_lda(factors: ScatterFactors, eigen: TotalScatterEigen, Y: np.ndarray) -> np.ndarray:
    """Unnormalized orientation matrix W = S_T^+ S_B Y in O(d n c) work."""
    Y = _check_sketch(Y, factors.d, factors.c - 1)
    return apply_g(factors, eigen, Y)


def certificate(
    basis: ProjectorBasis,
    Y: np.ndarray,
    near_singular_threshold: float = DEFAULT_NEAR_SINGULAR_THRESHOLD,
    safety_factor: float = DEFAULT_SAFETY_FACTOR,
) -> CertificateReport:
    """Full-rank certificate Z_hat1 = M^T Y.

    singular:       sigma_min <= safety * max(d, c-1) * u * ||M||_2 ||Y||_2
    near_singular:  sigma_min / sigma_max < near_singular_threshold
    nonsingular:    otherwise
    """
    Y = _check_sketch(Y, basis.d, basis.c_minus_1)
    Z_hat1 = basis.M.T @ Y
    sv = linalg.svdvals(Z_hat1)
    sigma_max, sigma_min = float(sv[0]), float(sv[-1])

    scale = float(np.linalg.norm(basis.M, 2) * np.linalg.norm(Y, 2))
    floor = safety_factor * max(basis.d, basis.c_minus_1) * UNIT_ROUNDOFF * scale

    if sigma_min <= floor:
        verdict = Verdict.SINGULAR
    elif sigma_min < near_singular_threshold * sigma_max:
        verdict = Verdict.NEAR_SINGULAR
    else:
        verdict = Verdict.NONSINGULAR

    Z_hat1.setflags(write=False)
    return CertificateReport(
        Z_hat1=Z_hat1,
        sigma_min=sigma_min,
        sigma_max=sigma_max,
        verdict=verdict,
        threshold=near_singular_threshold,
        singular_floor=floor,
    )


def geometric_check(
    basis: ProjectorBasis,
    Y: np.ndarray,
    safety_factor: float = DEFAULT_SAFETY_FACTOR,
) -> GeometricReport:
    """Decide singularity from the angle between K = span(Y) and L = span(M).

    Z_hat1 is singular exactly when some nonzero vector of K is orthogonal to
    L, i.e. when the largest principal angle is pi/2.
    """
    Y = _check_sketch(Y, basis.d, basis.c_minus_1)
    Q_Y = orthonormal_basis(Y, "Y")
    Q_M = orthonormal_basis(basis.M, "M")

    cosines = linalg.svdvals(Q_Y.T @ Q_M)
    smallest_cosine = float(cosines[-1])
    tolerance = safety_factor * max(basis.d, basis.c_minus_1) * UNIT_ROUNDOFF
    verdict = Verdict.SINGULAR if smallest_cosine <= tolerance else Verdict.NONSINGULAR

    return GeometricReport(
        largest_angle=largest_principal_angle(Q_Y, Q_M),
        smallest_cosine=smallest_cosine,
        tolerance=tolerance,
        verdict=verdict,
    )


def eigenspace_residuals(
    factors: ScatterFactors,
    eigen: TotalScatterEigen,
    basis: ProjectorBasis,
    rng_seed: int = 0,
) -> dict:
    """Relative residuals of G U_hat1 = U_hat1, G U_hat2 = 0 and G U2 = 0.

    The U2 trial block is a random matrix projected onto the null space of S_T.
    """
    rng = np.random.default_rng(rng_seed)
    raw = rng.standard_normal((factors.d, basis.c_minus_1))
    trial = project_complement(eigen, raw)
    if np.linalg.norm(trial) <= DEFAULT_SAFETY_FACTOR * factors.d * UNIT_ROUNDOFF * np.linalg.norm(raw):
        # range(S_T) is the whole space
        complement = 0.0
    else:
        complement = _relative(apply_g(factors, eigen, trial), trial)
    return {
        "unit": basis.unit_residual,
        "null": basis.null_residual,
        "complement": complement,
    }
