"""
Data I/O - CSV ingestion and emission for datasets, sketches and projections

Convention: one sample per row, feature columns followed by a final label
column. ``transpose=True`` reads feature-per-row files whose last row holds
the labels. A first row with a non-numeric feature cell is a header.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from src.lda.errors import DatasetError, DimensionMismatchError
from src.lda.scatter import LabeledDataset
from src.utils.logger import get_logger

logger = get_logger(__name__)

FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True, eq=False)
class SampleTable:
    """Parsed CSV content: a d x m feature matrix and optional labels."""

    data: np.ndarray
    labels: Optional[List[str]]

    def to_dataset(self) -> LabeledDataset:
        if self.labels is None:
            raise DatasetError("dataset has no label column")
        return LabeledDataset(self.data, tuple(self.labels))


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _cell(value) -> str:
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return ""
    return str(value).strip()


def _read_grid(path: Path):
    """Raw string cells plus the 1-based line number of every non-blank row."""
    try:
        frame = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding="utf-8",
        )
    except FileNotFoundError as e:
        raise DatasetError(f"file not found: {path}") from e
    except pd.errors.EmptyDataError as e:
        raise DatasetError(f"{path}: file is empty") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DatasetError(f"{path}: unreadable CSV: {e}") from e

    grid = np.vectorize(_cell, otypes=[object])(frame.to_numpy(dtype=object))
    line_numbers = np.arange(1, grid.shape[0] + 1)
    blank = np.array([all(cell == "" for cell in row) for row in grid], dtype=bool)
    grid, line_numbers = grid[~blank], line_numbers[~blank]
    if grid.shape[0] == 0:
        raise DatasetError(f"{path}: no data rows")
    return grid, line_numbers


def _has_header(first_row: Sequence[str], skip_last: bool) -> bool:
    cells = list(first_row[:-1]) if skip_last and len(first_row) > 1 else list(first_row)
    return any(not _is_number(cell) for cell in cells)


def _parse_numeric(cells: np.ndarray, lines: np.ndarray, path: Path) -> np.ndarray:
    """Convert a row-aligned block of cells to float64, naming the offending line on failure."""
    values = np.empty(cells.shape, dtype=np.float64)
    for (i, j), cell in np.ndenumerate(cells):
        try:
            value = float(cell)
        except ValueError:
            raise DatasetError(
                f"{path}: line {lines[i]}: non-numeric feature value {cell!r}"
            ) from None
        if not np.isfinite(value):
            raise DatasetError(f"{path}: line {lines[i]}: non-finite feature value {cell!r}")
        values[i, j] = value
    return values


def read_samples(
    path: Path,
    transpose: bool = False,
    n_features: Optional[int] = None,
    require_labels: bool = True,
) -> SampleTable:
    """Read a sample CSV into a d x m matrix.

    With ``n_features`` given, samples of d fields are unlabeled and samples
    of d+1 fields end with a label; any other width is a dimension mismatch.
    Without it, the last field is always the label.
    """
    path = Path(path)
    grid, lines = _read_grid(path)

    # row layout: the label column is the last cell; column layout: whole first row
    if _has_header(grid[0], skip_last=not transpose):
        grid, lines = grid[1:], lines[1:]
        if grid.shape[0] == 0:
            raise DatasetError(f"{path}: header but no data rows")

    fields = grid.shape[0] if transpose else grid.shape[1]
    if n_features is None or fields == n_features + 1:
        labeled = True
    elif fields == n_features:
        labeled = False
    else:
        raise DimensionMismatchError(
            f"{path}: samples carry {fields} fields, model expects {n_features} features (+ label)"
        )
    if require_labels and not labeled:
        raise DatasetError(f"{path}: missing label column")
    if labeled and fields < 2:
        raise DatasetError(f"{path}: need at least one feature besides the label")

    if transpose:
        feature_cells = grid[:-1] if labeled else grid
        labels = [str(cell) for cell in grid[-1]] if labeled else None
        data = _parse_numeric(feature_cells, lines, path)
    else:
        feature_cells = grid[:, :-1] if labeled else grid
        labels = [str(cell) for cell in grid[:, -1]] if labeled else None
        data = _parse_numeric(feature_cells, lines, path).T

    if labels is not None and any(label == "" for label in labels):
        raise DatasetError(f"{path}: empty class label")

    logger.debug("samples read", path=str(path), d=data.shape[0], m=data.shape[1],
                 labeled=labels is not None)
    return SampleTable(data=data, labels=labels)


def read_dataset(path: Path, transpose: bool = False) -> LabeledDataset:
    """Read a labeled training CSV."""
    return read_samples(path, transpose=transpose).to_dataset()


def read_matrix(path: Path) -> np.ndarray:
    """Read a purely numeric CSV (e.g. a d x (c-1) sketch) with optional header."""
    path = Path(path)
    grid, lines = _read_grid(path)
    if _has_header(grid[0], skip_last=False):
        grid, lines = grid[1:], lines[1:]
        if grid.shape[0] == 0:
            raise DatasetError(f"{path}: header but no data rows")
    return _parse_numeric(grid, lines, path)


def write_matrix(matrix: np.ndarray, path_or_buf, header: Optional[Sequence[str]] = None) -> None:
    """Write a numeric matrix row by row with 17 significant digits."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1)
    frame = pd.DataFrame(matrix)
    frame.to_csv(path_or_buf, header=list(header) if header is not None else False, index=False,
                 float_format=FLOAT_FORMAT, lineterminator="\n")


def write_dataset(dataset: LabeledDataset, path: Path) -> None:
    """Write a labeled dataset, one sample per row, with a header line."""
    columns = [f"f{i}" for i in range(dataset.d)]
    frame = pd.DataFrame(dataset.data.T, columns=columns)
    frame["label"] = list(dataset.labels)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n",
                 encoding="utf-8")


def write_labels(labels: Sequence[str], path_or_buf) -> None:
    """Write predicted labels, one per line, under a ``label`` header."""
    pd.DataFrame({"label": list(labels)}).to_csv(path_or_buf, index=False, lineterminator="\n")
