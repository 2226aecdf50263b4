"""
Scatter Core - Labeled datasets, centroids and factored scatter operators

Every scatter matrix is kept as a tall factor H with S = H H^T:

    S_W = H_w H_w^T    columns x_i - mu_class(i)
    S_B = H_b H_b^T    columns sqrt(n_j) (mu_j - mu)
    S_T = H_t H_t^T    columns x_i - mu

H_b is also kept as H_t A, where the n x c weights A average each class
and sum to zero down every column.

No d x d matrix is ever formed here.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel
from scipy import linalg

from src.lda.errors import DatasetError, DimensionMismatchError
from src.lda.linalg import default_rank_tol, numerical_rank
from src.utils.logger import get_logger

logger = get_logger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """A d x n sample matrix with one class identifier per column."""

    data: np.ndarray
    labels: Tuple[str, ...]
    class_index: Dict[str, int] = field(init=False)
    class_of: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim != 2:
            raise DatasetError(f"data must be a d x n matrix, got {data.ndim} dimension(s)")
        d, n = data.shape
        if d < 1:
            raise DatasetError("feature dimension d must be at least 1")
        if n < 2:
            raise DatasetError(f"need at least 2 samples, got {n}")
        if not np.all(np.isfinite(data)):
            raise DatasetError("all feature values must be finite")

        labels = tuple(str(label) for label in self.labels)
        if len(labels) != n:
            raise DatasetError(f"{len(labels)} labels for {n} samples")

        class_index: Dict[str, int] = {}
        for label in labels:
            class_index.setdefault(label, len(class_index))
        if len(class_index) < 2:
            raise DatasetError(f"need at least 2 classes, got {len(class_index)}")

        class_of = np.fromiter((class_index[label] for label in labels), dtype=np.intp, count=n)

        object.__setattr__(self, "data", _frozen(data))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_index", class_index)
        object.__setattr__(self, "class_of", _frozen(class_of))

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    @property
    def c(self) -> int:
        return len(self.class_index)

    @property
    def class_labels(self) -> Tuple[str, ...]:
        """Class identifiers ordered by their contiguous index."""
        return tuple(self.class_index)

    @property
    def class_counts(self) -> Tuple[int, ...]:
        return tuple(int(k) for k in np.bincount(self.class_of, minlength=self.c))


class ScatterKind(str, Enum):
    """Which scatter operator to apply."""

    WITHIN = "W"
    BETWEEN = "B"
    TOTAL = "T"


@dataclass(frozen=True, eq=False)
class ScatterFactors:
    """Tall factors of S_W, S_B and S_T together with the centroids they came from."""

    H_w: np.ndarray
    H_b: np.ndarray
    H_t: np.ndarray
    between_weights: np.ndarray
    class_centroids: np.ndarray
    global_centroid: np.ndarray
    class_counts: Tuple[int, ...]

    @property
    def d(self) -> int:
        return self.H_t.shape[0]

    @property
    def n(self) -> int:
        return self.H_t.shape[1]

    @property
    def c(self) -> int:
        return self.H_b.shape[1]

    def factor(self, which) -> np.ndarray:
        """The factor H with S = H H^T for ``which`` in {W, B, T}."""
        kind = ScatterKind(which)
        if kind is ScatterKind.WITHIN:
            return self.H_w
        if kind is ScatterKind.BETWEEN:
            return self.H_b
        return self.H_t


class RankReport(BaseModel):
    """Numerical ranks of the three scatter matrices against the textbook values."""

    within_rank: int
    between_rank: int
    total_rank: int
    expected_within: int
    expected_between: int
    expected_total: int
    within_ok: bool
    between_ok: bool
    total_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.within_ok and self.between_ok and self.total_ok


def compute_centroids(dataset: LabeledDataset) -> Tuple[np.ndarray, np.ndarray]:
    """Class centroids (d x c, column j is class j) and the global centroid."""
    centroids = np.empty((dataset.d, dataset.c), dtype=np.float64)
    for j in range(dataset.c):
        centroids[:, j] = dataset.data[:, dataset.class_of == j].mean(axis=1)
    return centroids, dataset.data.mean(axis=1)


def build_factors(dataset: LabeledDataset) -> ScatterFactors:
    """Factor the within, between and total scatter matrices of ``dataset``."""
    centroids, mu = compute_centroids(dataset)
    counts = dataset.class_counts
    root_counts = np.sqrt(np.asarray(counts, dtype=np.float64))

    H_w = dataset.data - centroids[:, dataset.class_of]
    H_b = (centroids - mu[:, None]) * root_counts
    H_t = dataset.data - mu[:, None]

    # H_t A = H_b because H_t 1 = 0
    A = np.zeros((dataset.n, dataset.c), dtype=np.float64)
    A[np.arange(dataset.n), dataset.class_of] = 1.0 / root_counts[dataset.class_of]
    A -= A.mean(axis=0)

    logger.debug("scatter factors built", d=dataset.d, n=dataset.n, c=dataset.c)
    return ScatterFactors(
        H_w=_frozen(H_w),
        H_b=_frozen(H_b),
        H_t=_frozen(H_t),
        between_weights=_frozen(A),
        class_centroids=_frozen(centroids),
        global_centroid=_frozen(mu),
        class_counts=counts,
    )


def scatter_apply(factors: ScatterFactors, which, V: np.ndarray) -> np.ndarray:
    """Return S V as H (H^T V) for the scatter matrix named by ``which``."""
    H = factors.factor(which)
    V = np.asarray(V, dtype=np.float64)
    if V.shape[0] != H.shape[0]:
        raise DimensionMismatchError(
            f"operand has {V.shape[0]} rows, scatter operator acts on {H.shape[0]}"
        )
    return H @ (H.T @ V)


def rank_report(factors: ScatterFactors, tol: Optional[float] = None) -> RankReport:
    """Compare numerical ranks of S_W, S_B, S_T with n-c, c-1 and n-1.

    Ranks come from the singular values of each factor, since rank(H) = rank(H H^T).
    Disagreement (duplicated or collinear samples) is reported and logged, not raised.
    """
    n, c = factors.n, factors.c

    def rank_of(H: np.ndarray) -> int:
        return numerical_rank(H, tol if tol is not None else default_rank_tol(H.shape))

    within, between, total = rank_of(factors.H_w), rank_of(factors.H_b), rank_of(factors.H_t)
    report = RankReport(
        within_rank=within,
        between_rank=between,
        total_rank=total,
        expected_within=n - c,
        expected_between=c - 1,
        expected_total=n - 1,
        within_ok=within == n - c,
        between_ok=between == c - 1,
        total_ok=total == n - 1,
    )

    if not report.all_ok:
        logger.warning(
            "scatter ranks differ from n-c, c-1, n-1; samples are not in general position",
            ranks=[report.within_rank, report.between_rank, report.total_rank],
            expected=[n - c, c - 1, n - 1],
        )
    return report


def factor_norm(factors: ScatterFactors, which) -> float:
    """Spectral norm of the factor H, so that ||S||_2 = factor_norm**2."""
    H = factors.factor(which)
    if H.size == 0:
        return 0.0
    return float(linalg.svdvals(H)[0])
