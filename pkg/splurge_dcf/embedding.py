"""Pre-trained word vectors and word-matrix construction.

Vector files use the plain-text layout shared by the common pre-trained
embedding releases: one word per line followed by ``dim`` space-separated
floats. Vectors are static; out-of-vocabulary tokens map to the zero vector.

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Collection, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType

import numpy as np
import numpy.typing as npt

from .common_utils import ensure_minimum_rows
from .exceptions import SplurgeDcfDataError, SplurgeDcfValueError

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

DEFAULT_EMBEDDING_DIM = 100


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """Immutable word-to-vector table.

    Attributes:
        dim: Vector dimensionality ``d``.
        entries: Read-only mapping from word to a read-only ``d``-vector.
    """

    dim: int
    entries: Mapping[str, FloatArray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise SplurgeDcfValueError(
                message=f"Embedding dimension must be >= 1, got {self.dim}",
                details={"param": "dim", "value": str(self.dim)},
            )
        frozen: dict[str, FloatArray] = {}
        for word, vector in self.entries.items():
            array = np.array(vector, dtype=np.float64)
            if array.shape != (self.dim,):
                raise SplurgeDcfValueError(
                    message=f"Vector for '{word}' has shape {array.shape}, expected ({self.dim},)",
                    error_code="dimension-mismatch",
                    details={"word": word, "dim": str(self.dim)},
                )
            array.setflags(write=False)
            frozen[word] = array
        object.__setattr__(self, "entries", MappingProxyType(frozen))

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: object) -> bool:
        return word in self.entries

    def lookup(self, word: str) -> FloatArray:
        """Vector for ``word``, or the zero vector when it is out of vocabulary."""
        vector = self.entries.get(word)
        if vector is None:
            return np.zeros(self.dim, dtype=np.float64)
        return vector

    def coverage(self, tokens: Sequence[str]) -> float:
        """Fraction of ``tokens`` present in the table (1.0 for no tokens)."""
        if not tokens:
            return 1.0
        return sum(token in self.entries for token in tokens) / len(tokens)


def load_embeddings(
    path: str | os.PathLike[str],
    dim: int = DEFAULT_EMBEDDING_DIM,
    *,
    vocabulary: Collection[str] | None = None,
) -> EmbeddingTable:
    """Load a text vector file.

    Later lines for the same word overwrite earlier ones.

    Args:
        path (str | PathLike): Vector file, UTF-8.
        dim (int): Expected vector dimensionality.
        vocabulary (Collection[str] | None): When given, only these words are
            kept; the remaining lines are still validated.

    Returns:
        EmbeddingTable: The loaded table (empty for an empty file).

    Raises:
        SplurgeDcfDataError: If the file is missing or unreadable, a line has the
            wrong number of components, or a component is not a finite number.
    """
    vector_path = Path(path)
    keep = None if vocabulary is None else frozenset(vocabulary)
    entries: dict[str, FloatArray] = {}
    try:
        with vector_path.open(encoding="utf-8") as handle:
            for number, line in enumerate(handle, start=1):
                parts = line.rstrip("\r\n").rstrip(" ").split(" ")
                if parts == [""]:
                    continue
                if len(parts) != dim + 1:
                    raise SplurgeDcfDataError(
                        message=f"Line {number}: expected a word and {dim} values, got {len(parts) - 1} values",
                        error_code="dimension-mismatch",
                        details={"path": str(vector_path), "line": str(number)},
                    )
                try:
                    vector = np.array([float(value) for value in parts[1:]], dtype=np.float64)
                except ValueError as e:
                    raise SplurgeDcfDataError(
                        message=f"Line {number}: unparsable vector component: {e}",
                        error_code="invalid-number",
                        details={"path": str(vector_path), "line": str(number)},
                    ) from e
                if not np.all(np.isfinite(vector)):
                    raise SplurgeDcfDataError(
                        message=f"Line {number}: vector components must be finite",
                        error_code="invalid-number",
                        details={"path": str(vector_path), "line": str(number)},
                    )
                if keep is None or parts[0] in keep:
                    entries[parts[0]] = vector
    except FileNotFoundError as e:
        raise SplurgeDcfDataError(
            message=f"Embeddings file not found: {vector_path}",
            error_code="file-not-found",
            details={"path": str(vector_path)},
        ) from e
    except (OSError, UnicodeDecodeError) as e:
        raise SplurgeDcfDataError(
            message=f"Cannot read embeddings file {vector_path}: {e}",
            details={"path": str(vector_path)},
        ) from e

    logger.info("Loaded %d %d-d word vectors from %s", len(entries), dim, vector_path)
    return EmbeddingTable(dim=dim, entries=entries)


def build_word_matrix(tokens: Sequence[str], table: EmbeddingTable, min_len: int) -> FloatArray:
    """Stack token vectors into an ``n x d`` word matrix.

    Out-of-vocabulary tokens become zero rows, and zero rows are appended until
    the matrix has at least ``min_len`` rows.

    Args:
        tokens (Sequence[str]): Normalised tokens.
        table (EmbeddingTable): Word vectors.
        min_len (int): Minimum row count, normally the kernel size.

    Returns:
        NDArray: Matrix of shape ``(max(len(tokens), min_len), table.dim)``.
    """
    if tokens:
        matrix = np.vstack([table.lookup(token) for token in tokens])
    else:
        matrix = np.zeros((0, table.dim), dtype=np.float64)
    return ensure_minimum_rows(matrix, min_len)
