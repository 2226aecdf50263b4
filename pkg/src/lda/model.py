"""
Null LDA Model - Fitting with certified random sketches and the fitted model
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.lda.errors import (
    DegenerateModelError,
    DimensionMismatchError,
    NoFullRankSketchError,
    SketchRejectedError,
)
from src.lda.fast_null import (
    DEFAULT_NEAR_SINGULAR_THRESHOLD,
    DEFAULT_SAFETY_FACTOR,
    DEFAULT_UNIT_EIGENVALUE_TOL,
    CertificateReport,
    ProjectorBasis,
    TotalScatterEigen,
    Verdict,
    build_projector_basis,
    certificate,
    eigen_total,
    fast_null_lda,
)
from src.lda.linalg import UNIT_ROUNDOFF, numerical_rank
from src.lda.scatter import LabeledDataset, ScatterFactors, build_factors, factor_norm
from src.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_MAX_RETRIES = 5


@dataclass(frozen=True, eq=False)
class FitContext:
    """Everything derived from a dataset before a sketch is drawn."""

    factors: ScatterFactors
    eigen: TotalScatterEigen
    basis: ProjectorBasis


def prepare(
    dataset: LabeledDataset,
    unit_tol: float = DEFAULT_UNIT_EIGENVALUE_TOL,
    rank_tol: Optional[float] = None,
) -> FitContext:
    """Scatter factors, S_T eigendecomposition and projector basis for ``dataset``."""
    factors = build_factors(dataset)
    eigen = eigen_total(factors, tol=rank_tol)
    basis = build_projector_basis(eigen, factors, unit_tol=unit_tol)
    return FitContext(factors=factors, eigen=eigen, basis=basis)


@dataclass(frozen=True, eq=False)
class NullLdaModel:
    """A fitted orientation matrix with the reduced class centroids it induces."""

    W: np.ndarray
    labels: Tuple[str, ...]
    reduced_centroids: np.ndarray
    seed: Optional[int]
    retries: int
    certificate: CertificateReport

    def __post_init__(self):
        W = np.array(self.W, dtype=np.float64, copy=True)
        centroids = np.array(self.reduced_centroids, dtype=np.float64, copy=True)
        if W.ndim != 2 or W.shape[1] != len(self.labels) - 1:
            raise DimensionMismatchError(
                f"W must have c-1 = {len(self.labels) - 1} columns, got shape {W.shape}"
            )
        if centroids.shape != (W.shape[1], len(self.labels)):
            raise DimensionMismatchError(
                f"reduced centroids must be {W.shape[1]} x {len(self.labels)}, got {centroids.shape}"
            )
        W.setflags(write=False)
        centroids.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "reduced_centroids", centroids)
        object.__setattr__(self, "labels", tuple(str(label) for label in self.labels))

    @property
    def d(self) -> int:
        return self.W.shape[0]

    @property
    def c(self) -> int:
        return len(self.labels)

    def validate(self) -> None:
        """Reject models whose W has a zero or non-finite column."""
        if not np.all(np.isfinite(self.W)) or not np.all(np.isfinite(self.reduced_centroids)):
            raise DegenerateModelError("degenerate model: non-finite entries")
        norms = np.linalg.norm(self.W, axis=0)
        if np.any(norms == 0.0):
            raise DegenerateModelError(
                f"degenerate model: zero orientation column(s) {np.flatnonzero(norms == 0.0).tolist()}"
            )

    def _check_samples(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.shape[0] != self.d:
            raise DimensionMismatchError(f"samples have {X.shape[0]} features, model expects {self.d}")
        return X

    def transform(self, X: np.ndarray) -> np.ndarray:
        """Project d x m samples to the (c-1) x m reduced space."""
        return self.W.T @ self._check_samples(X)

    def predict_index(self, X: np.ndarray) -> np.ndarray:
        """Index of the nearest reduced centroid per sample; ties go to the lowest index."""
        Z = self.transform(X)
        dist = ((Z[:, :, None] - self.reduced_centroids[:, None, :]) ** 2).sum(axis=0)
        return np.argmin(dist, axis=1)

    def predict(self, X: np.ndarray) -> Sequence[str]:
        return [self.labels[j] for j in self.predict_index(X)]


def _normalize_columns(W: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(W, axis=0)
    return W / norms


def _build_model(
    context: FitContext,
    dataset: LabeledDataset,
    Y: np.ndarray,
    report: CertificateReport,
    seed: Optional[int],
    retries: int,
) -> NullLdaModel:
    W = _normalize_columns(fast_null_lda(context.factors, context.eigen, Y))
    return NullLdaModel(
        W=W,
        labels=dataset.class_labels,
        reduced_centroids=W.T @ context.factors.class_centroids,
        seed=seed,
        retries=retries,
        certificate=report,
    )


def fit_with_retry(
    dataset: LabeledDataset,
    rng_seed: int = 0,
    max_retries: int = DEFAULT_MAX_RETRIES,
    threshold: float = DEFAULT_NEAR_SINGULAR_THRESHOLD,
    safety_factor: float = DEFAULT_SAFETY_FACTOR,
    unit_tol: float = DEFAULT_UNIT_EIGENVALUE_TOL,
    context: Optional[FitContext] = None,
) -> NullLdaModel:
    """Fit W = S_T^+ S_B Y with Gaussian sketches, redrawing on a failed certificate.

    Deterministic for a given seed. Raises NoFullRankSketchError once
    ``max_retries`` redraws are exhausted.
    """
    if context is None:
        context = prepare(dataset, unit_tol=unit_tol)
    rng = np.random.default_rng(rng_seed)
    shape = (dataset.d, dataset.c - 1)

    for attempt in range(max_retries + 1):
        Y = rng.standard_normal(shape)
        report = certificate(context.basis, Y, near_singular_threshold=threshold,
                             safety_factor=safety_factor)
        if report.verdict is Verdict.NONSINGULAR:
            logger.info("sketch accepted", seed=rng_seed, retries=attempt,
                        sigma_min=report.sigma_min, sigma_max=report.sigma_max)
            return _build_model(context, dataset, Y, report, rng_seed, attempt)
        logger.warning("sketch rejected, redrawing", seed=rng_seed, attempt=attempt,
                       verdict=report.verdict.value, sigma_min=report.sigma_min)

    raise NoFullRankSketchError(
        f"no full-rank sketch found after {max_retries + 1} draws (seed {rng_seed})"
    )


def fit_with_sketch(
    dataset: LabeledDataset,
    Y: np.ndarray,
    threshold: float = DEFAULT_NEAR_SINGULAR_THRESHOLD,
    safety_factor: float = DEFAULT_SAFETY_FACTOR,
    unit_tol: float = DEFAULT_UNIT_EIGENVALUE_TOL,
    context: Optional[FitContext] = None,
) -> NullLdaModel:
    """Fit with a caller-supplied sketch; raise SketchRejectedError unless it certifies."""
    if context is None:
        context = prepare(dataset, unit_tol=unit_tol)
    report = certificate(context.basis, Y, near_singular_threshold=threshold,
                         safety_factor=safety_factor)
    if report.verdict is not Verdict.NONSINGULAR:
        logger.warning("injected sketch rejected", verdict=report.verdict.value,
                       sigma_min=report.sigma_min, sigma_max=report.sigma_max)
        raise SketchRejectedError(f"sketch rejected: certificate is {report.verdict.value}",
                                  certificate=report)
    logger.info("injected sketch accepted", sigma_min=report.sigma_min, sigma_max=report.sigma_max)
    return _build_model(context, dataset, Y, report, None, 0)


def orientation_rank(
    factors: ScatterFactors,
    eigen: TotalScatterEigen,
    W: np.ndarray,
    Y: np.ndarray,
    safety_factor: float = DEFAULT_SAFETY_FACTOR,
) -> int:
    """Numerical rank of an unnormalized W = G Y.

    Singular values are measured against ||S_T^+ H_b||_2 ||H_b||_2 ||Y||_2, a bound
    on ||W||_2 that stays meaningful when W is rounding noise.
    """
    pinv_b = np.linalg.norm(eigen.Q / eigen.sigma1[:, None], 2)
    scale = float(pinv_b) * factor_norm(factors, "B") * float(np.linalg.norm(Y, 2))
    rel_tol = safety_factor * max(factors.d, factors.n) * UNIT_ROUNDOFF
    return numerical_rank(W, rel_tol=rel_tol, scale=scale)
