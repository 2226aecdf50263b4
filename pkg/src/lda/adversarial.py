"""
Adversarial Sketches - Inputs for which W = S_T^+ S_B Y collapses to zero
"""

from typing import Tuple

import numpy as np

from src.lda.errors import InvalidParameterError, SketchRankError
from src.lda.fast_null import ProjectorBasis, TotalScatterEigen, project_complement
from src.lda.linalg import numerical_rank, orthonormal_basis
from src.lda.scatter import LabeledDataset
from src.utils.logger import get_logger

logger = get_logger(__name__)

COUNTEREXAMPLE_LABELS = ("class1", "class2")


def counterexample(d: int, alpha: float) -> Tuple[LabeledDataset, np.ndarray]:
    """Two classes of two samples with centroids e_hat and 2 e_hat, and Y = alpha e_2.

    e_hat = (1, 0, 1, ..., 1). Samples are e_hat +/- v and 2 e_hat +/- w with
    v = (e_1 - e_3)/sqrt(2) and w = (e_1 + e_3 - 2 e_4)/sqrt(6), unit vectors
    orthogonal to each other, to e_hat and to e_2. Then S_B = e_hat e_hat^T,
    S_B Y = 0 and W = 0 although Y has full column rank.
    """
    if int(d) != d or d < 4:
        raise InvalidParameterError(f"counterexample needs d >= 4, got {d}")
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    d = int(d)

    e_hat = np.ones(d)
    e_hat[1] = 0.0
    v = np.zeros(d)
    v[[0, 2]] = [1.0, -1.0]
    v /= np.sqrt(2.0)
    w = np.zeros(d)
    w[[0, 2, 3]] = [1.0, 1.0, -2.0]
    w /= np.sqrt(6.0)

    samples = np.column_stack([e_hat + v, e_hat - v, 2 * e_hat + w, 2 * e_hat - w])
    labels = (COUNTEREXAMPLE_LABELS[0],) * 2 + (COUNTEREXAMPLE_LABELS[1],) * 2

    Y = np.zeros((d, 1))
    Y[1, 0] = alpha
    return LabeledDataset(samples, labels), Y


def adversarial_sketch(
    basis: ProjectorBasis,
    eigen: TotalScatterEigen,
    rng_seed: int = 0,
) -> np.ndarray:
    """A random full-column-rank Y inside span{U_hat2, U2}, the complement of span(M).

    Y mixes a part in range(S_T) orthogonal to M with a part in the null space
    of S_T, so the certificate is singular and W = 0.
    """
    d, k = basis.d, basis.c_minus_1
    if d - k < k:
        raise InvalidParameterError(
            f"dimension too small: d - (c-1) = {d - k} < c-1 = {k}"
        )
    rng = np.random.default_rng(rng_seed)

    # range(S_T) part: U1 times the complement of U1^T M in r coordinates
    coords = eigen.U1.T @ basis.M
    full_q, _ = np.linalg.qr(coords, mode="complete")
    inside = eigen.U1 @ full_q[:, k:]
    Y = inside @ rng.standard_normal((inside.shape[1], k))

    # null space of S_T part
    Y = Y + project_complement(eigen, rng.standard_normal((d, k)))

    Q_M = orthonormal_basis(basis.M, "M")
    for _ in range(2):
        Y = Y - Q_M @ (Q_M.T @ Y)

    if numerical_rank(Y) < k:
        raise SketchRankError("adversarial sketch came out rank deficient")
    logger.debug("adversarial sketch drawn", seed=rng_seed, d=d, c_minus_1=k)
    return Y
