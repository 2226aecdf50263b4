"""
Model Store - JSON persistence of fitted null LDA models
"""

from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from src.lda.errors import ModelFormatError
from src.lda.fast_null import CertificateReport, CertificateSummary
from src.lda.model import NullLdaModel
from src.utils.logger import get_logger

logger = get_logger(__name__)

MODEL_FORMAT_VERSION = 1


class ModelFile(BaseModel):
    """On-disk model: matrices are stored column-major as flat float lists.

    Floats are written in shortest round-trip form, so loading reproduces
    every binary64 value bit for bit.
    """

    format_version: int = Field(..., description="Model file layout version")
    d: int = Field(..., ge=1)
    c: int = Field(..., ge=2)
    labels: List[str] = Field(..., description="Class identifiers by class index")
    W: List[float] = Field(..., description="d x (c-1) orientation matrix, column-major")
    reduced_centroids: List[float] = Field(..., description="(c-1) x c centroids, column-major")
    seed: Optional[int] = None
    retries: int = Field(0, ge=0)
    certificate: CertificateSummary


def to_model_file(model: NullLdaModel) -> ModelFile:
    return ModelFile(
        format_version=MODEL_FORMAT_VERSION,
        d=model.d,
        c=model.c,
        labels=list(model.labels),
        W=model.W.flatten(order="F").tolist(),
        reduced_centroids=model.reduced_centroids.flatten(order="F").tolist(),
        seed=model.seed,
        retries=model.retries,
        certificate=model.certificate.summary(),
    )


def from_model_file(model_file: ModelFile) -> NullLdaModel:
    if model_file.format_version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"model format version {model_file.format_version} is not supported "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    k = model_file.c - 1
    if len(model_file.labels) != model_file.c:
        raise ModelFormatError(f"{len(model_file.labels)} labels for c = {model_file.c}")
    if len(model_file.W) != model_file.d * k:
        raise ModelFormatError(f"W holds {len(model_file.W)} values, expected {model_file.d * k}")
    if len(model_file.reduced_centroids) != k * model_file.c:
        raise ModelFormatError(
            f"reduced centroids hold {len(model_file.reduced_centroids)} values, "
            f"expected {k * model_file.c}"
        )
    return NullLdaModel(
        W=np.array(model_file.W, dtype=np.float64).reshape((model_file.d, k), order="F"),
        labels=tuple(model_file.labels),
        reduced_centroids=np.array(model_file.reduced_centroids, dtype=np.float64)
        .reshape((k, model_file.c), order="F"),
        seed=model_file.seed,
        retries=model_file.retries,
        certificate=CertificateReport.from_summary(model_file.certificate),
    )


def dumps_model(model: NullLdaModel) -> str:
    return to_model_file(model).model_dump_json(indent=2) + "\n"


def save_model(model: NullLdaModel, path: Path) -> None:
    """Write ``model`` as a single JSON document."""
    path = Path(path)
    path.write_text(dumps_model(model), encoding="utf-8")
    logger.info("model saved", path=str(path), d=model.d, c=model.c)


def load_model(path: Path, validate: bool = True) -> NullLdaModel:
    """Read a model file; by default reject degenerate orientation matrices."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ModelFormatError(f"cannot read model file {path}: {e}") from e
    try:
        model_file = ModelFile.model_validate_json(text)
    except ValidationError as e:
        raise ModelFormatError(f"invalid model file {path}: {e}") from e

    model = from_model_file(model_file)
    if validate:
        model.validate()
    logger.debug("model loaded", path=str(path), d=model.d, c=model.c)
    return model
