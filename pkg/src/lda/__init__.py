# Null LDA core: scatter factors, fast orientation matrix, certificate and oracle
from src.lda.errors import NullLdaError
from src.lda.fast_null import Verdict
from src.lda.model import NullLdaModel, fit_with_retry, fit_with_sketch
from src.lda.pipeline import NullLdaPipeline
from src.lda.scatter import LabeledDataset

__all__ = [
    "LabeledDataset",
    "NullLdaError",
    "NullLdaModel",
    "NullLdaPipeline",
    "Verdict",
    "fit_with_retry",
    "fit_with_sketch",
]
