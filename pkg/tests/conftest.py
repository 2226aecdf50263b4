"""
Shared fixtures: seeded generic datasets and explicit dense scatter matrices
"""

from typing import Optional

import numpy as np
import pytest

from src.lda.model import FitContext, prepare
from src.lda.scatter import LabeledDataset, ScatterFactors


def make_dataset(
    seed: int,
    c: Optional[int] = None,
    d: Optional[int] = None,
    separation: float = 3.0,
) -> LabeledDataset:
    """Gaussian classes around random centers, d >= 2n so the rank assumptions hold.

    Classes are contiguous blocks of at least two samples each.
    """
    rng = np.random.default_rng(seed)
    if c is None:
        c = int(rng.integers(2, 5))
    counts = 2 + rng.integers(0, 3, size=c)
    n = int(counts.sum())
    if d is None:
        d = 2 * n + int(rng.integers(0, 20))

    class_of = np.repeat(np.arange(c), counts)
    centers = separation * rng.standard_normal((d, c))
    data = centers[:, class_of] + rng.standard_normal((d, n))
    labels = tuple(f"class{j}" for j in class_of)
    return LabeledDataset(data, labels)


def dense_scatter(factors: ScatterFactors, which: str) -> np.ndarray:
    """Explicit d x d scatter matrix, for cross-checking small cases only."""
    H = factors.factor(which)
    return H @ H.T


def explicit_scatter(dataset: LabeledDataset):
    """S_W, S_B, S_T summed sample by sample from their textbook definitions."""
    X = dataset.data
    mu = X.mean(axis=1)
    S_w = np.zeros((dataset.d, dataset.d))
    S_b = np.zeros((dataset.d, dataset.d))
    for j in range(dataset.c):
        members = X[:, dataset.class_of == j]
        mu_j = members.mean(axis=1)
        centered = members - mu_j[:, None]
        S_w += centered @ centered.T
        S_b += members.shape[1] * np.outer(mu_j - mu, mu_j - mu)
    centered = X - mu[:, None]
    return S_w, S_b, centered @ centered.T


def random_sketch(dataset: LabeledDataset, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((dataset.d, dataset.c - 1))


@pytest.fixture
def dataset() -> LabeledDataset:
    return make_dataset(11)


@pytest.fixture
def three_class_dataset() -> LabeledDataset:
    return make_dataset(5, c=3)


@pytest.fixture
def context(dataset) -> FitContext:
    return prepare(dataset)


@pytest.fixture
def three_class_context(three_class_dataset) -> FitContext:
    return prepare(three_class_dataset)
