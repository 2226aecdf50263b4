"""
Null LDA Pipeline - Settings-driven orchestration of fitting, certification and verification
"""

from typing import Optional, Tuple

import numpy as np

from src.lda.adversarial import adversarial_sketch
from src.lda.errors import DimensionMismatchError
from src.lda.fast_null import (
    CertificateReport,
    GeometricReport,
    Verdict,
    certificate,
    eigen_total,
    geometric_check,
)
from src.lda.model import FitContext, NullLdaModel, fit_with_retry, fit_with_sketch, prepare
from src.lda.oracle import VerificationReport, verify_orientation
from src.lda.scatter import LabeledDataset, RankReport, build_factors, rank_report
from src.utils.config import NullLdaSettings
from src.utils.logger import get_logger

logger = get_logger(__name__)


class NullLdaPipeline:
    """Runs the null LDA operations with thresholds taken from NullLdaSettings."""

    def __init__(self, settings: Optional[NullLdaSettings] = None):
        """Initialize the pipeline."""
        self.settings = settings or NullLdaSettings()
        self.fit_settings = self.settings.fit

    def prepare(self, dataset: LabeledDataset) -> FitContext:
        return prepare(
            dataset,
            unit_tol=self.settings.structure.unit_eigenvalue_tol,
            rank_tol=self.settings.rank.relative_tol,
        )

    def fit(
        self,
        dataset: LabeledDataset,
        seed: Optional[int] = None,
        sketch: Optional[np.ndarray] = None,
    ) -> NullLdaModel:
        """Fit with a seeded Gaussian sketch, or with ``sketch`` when one is injected."""
        context = self.prepare(dataset)
        if sketch is not None:
            return fit_with_sketch(
                dataset,
                sketch,
                threshold=self.fit_settings.near_singular_threshold,
                safety_factor=self.fit_settings.safety_factor,
                context=context,
            )
        return fit_with_retry(
            dataset,
            rng_seed=self.fit_settings.seed if seed is None else seed,
            max_retries=self.fit_settings.max_retries,
            threshold=self.fit_settings.near_singular_threshold,
            safety_factor=self.fit_settings.safety_factor,
            context=context,
        )

    def certify(
        self,
        dataset: LabeledDataset,
        sketch: np.ndarray,
    ) -> Tuple[CertificateReport, GeometricReport]:
        """A-priori full-rank check of ``sketch`` before any W is formed."""
        context = self.prepare(dataset)
        report = certificate(
            context.basis,
            sketch,
            near_singular_threshold=self.fit_settings.near_singular_threshold,
            safety_factor=self.fit_settings.safety_factor,
        )
        geometry = geometric_check(context.basis, sketch, safety_factor=self.fit_settings.safety_factor)
        if (report.verdict is Verdict.SINGULAR) != (geometry.verdict is Verdict.SINGULAR):
            logger.warning("algebraic and geometric verdicts disagree",
                           certificate=report.verdict.value, geometric=geometry.verdict.value)
        return report, geometry

    def inspect(self, dataset: LabeledDataset) -> Tuple[RankReport, int]:
        """Rank report of the scatter factors plus the rank r kept by eigen_total (same rule)."""
        factors = build_factors(dataset)
        report = rank_report(factors, tol=self.settings.rank.relative_tol)
        eigen = eigen_total(factors, tol=self.settings.rank.relative_tol)
        return report, eigen.r

    def adversarial(self, dataset: LabeledDataset, seed: Optional[int] = None) -> np.ndarray:
        context = self.prepare(dataset)
        return adversarial_sketch(context.basis, context.eigen,
                                  rng_seed=self.fit_settings.seed if seed is None else seed)

    def verify(self, model: NullLdaModel, dataset: LabeledDataset) -> VerificationReport:
        """Check ``model`` against the scatter structure of ``dataset``."""
        if model.d != dataset.d or model.c != dataset.c:
            raise DimensionMismatchError(
                f"model is d={model.d}, c={model.c}; data is d={dataset.d}, c={dataset.c}"
            )
        factors = build_factors(dataset)
        eigen = eigen_total(factors, tol=self.settings.rank.relative_tol)
        report = verify_orientation(factors, eigen, model.W)
        logger.info("verification finished", all_passed=report.all_passed)
        return report
