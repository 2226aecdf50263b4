"""
Errors - Exception hierarchy for the null LDA core and its command-line surface
"""


class NullLdaError(Exception):
    """Base class for every failure raised by the nulllda package.

    Each subclass carries the process exit code the CLI maps it to.
    """

    exit_code = 2

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class DatasetError(NullLdaError, ValueError):
    """Malformed dataset: bad shape, labels, non-finite or non-numeric values."""


class DimensionMismatchError(NullLdaError, ValueError):
    """Operand shapes disagree."""


class InvalidParameterError(NullLdaError, ValueError):
    """A scalar parameter is outside its admissible range."""


class DegenerateDatasetError(NullLdaError):
    """The total scatter matrix is zero (all samples identical)."""


class ScatterStructureError(NullLdaError):
    """The eigenvalues of QQ^T are not c-1 ones followed by zeros."""


class RankAssumptionError(NullLdaError):
    """The null space of the projected within-class scatter has the wrong dimension."""


class SketchRankError(NullLdaError, ValueError):
    """A sketch or subspace basis is not of full column rank."""


class ModelFormatError(NullLdaError):
    """A model file cannot be read or carries an unsupported format version."""


class NoFullRankSketchError(NullLdaError):
    """Every drawn sketch produced a singular or near-singular certificate."""

    exit_code = 3


class SketchRejectedError(NullLdaError):
    """An injected sketch was certified singular or near singular."""

    exit_code = 4

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class DegenerateModelError(NullLdaError):
    """A model whose orientation matrix has a zero or non-finite column."""

    exit_code = 5
