"""SMOTE oversampling of the minority class.

Synthetic minority rows are convex combinations of a random minority row and
one of its ``k`` nearest minority neighbours. Originals are never modified and
synthetic rows are appended after them, so row ``i < len(X)`` of the balanced
set is always input row ``i``.

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .exceptions import SplurgeDcfValueError

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

DEFAULT_K_NEIGHBORS = 5


@dataclass(frozen=True, eq=False)
class BalancedSet:
    """Originals followed by synthetic minority rows.

    Attributes:
        X: Feature rows, originals first.
        y: Labels aligned with ``X``.
        synthetic_count: Number of appended synthetic rows.
        parents: ``(synthetic_count, 2)`` indices into the input of the base
            row ``x`` and the neighbour ``z`` of each synthetic row.
        deltas: Interpolation weight of each synthetic row; row equals
            ``x + delta * (z - x)``.
    """

    X: FloatArray
    y: IntArray
    synthetic_count: int
    parents: npt.NDArray[np.intp]
    deltas: FloatArray

    @property
    def original_count(self) -> int:
        return int(self.X.shape[0]) - self.synthetic_count


def nearest_neighbors(points: FloatArray, k: int) -> npt.NDArray[np.intp]:
    """Indices of the ``k`` nearest other points of every point (Euclidean).

    Ties in distance are broken by the lower point index.

    Returns:
        NDArray: Array of shape ``(len(points), k)``.
    """
    squared = np.sum(points * points, axis=1)
    distances = squared[:, None] + squared[None, :] - 2.0 * points @ points.T
    np.maximum(distances, 0.0, out=distances)
    np.fill_diagonal(distances, np.inf)
    return np.argsort(distances, axis=1, kind="stable")[:, :k]


def smote_balance(
    X: FloatArray | Sequence[Sequence[float]],
    y: Sequence[int] | IntArray,
    k_neighbors: int = DEFAULT_K_NEIGHBORS,
    seed: int = 0,
) -> BalancedSet:
    """Oversample the minority class until both classes have equal counts.

    Args:
        X (array-like): Feature rows, shape ``(n, F)``.
        y (array-like): Labels in ``{0, 1}``.
        k_neighbors (int): Neighbourhood size, clamped to ``minority - 1``.
        seed (int): Seed for base-row, neighbour and weight draws.

    Returns:
        BalancedSet: Balanced rows; ``synthetic_count`` is 0 when the input is
        already balanced.

    Raises:
        SplurgeDcfValueError: If only one class is present, the minority class
            has a single row, or ``k_neighbors < 1``.
    """
    features = np.asarray(X, dtype=np.float64)
    labels = np.asarray(y, dtype=np.int64)
    if features.ndim != 2 or labels.shape != (features.shape[0],):
        raise SplurgeDcfValueError(
            message=f"Expected X of shape (n, F) and y of shape (n,), got {features.shape} and {labels.shape}",
            details={"param": "X"},
        )
    if k_neighbors < 1:
        raise SplurgeDcfValueError(
            message=f"k_neighbors must be >= 1, got {k_neighbors}",
            details={"param": "k_neighbors", "value": str(k_neighbors)},
        )

    counts = np.bincount(labels, minlength=2)
    if counts.shape[0] != 2 or counts.min() == 0:
        raise SplurgeDcfValueError(
            message="SMOTE needs both classes present",
            error_code="single-class",
            details={"param": "y", "value": str(counts.tolist())},
        )
    minority_label = int(np.argmin(counts))
    minority_rows = np.nonzero(labels == minority_label)[0]
    if minority_rows.shape[0] < 2:
        raise SplurgeDcfValueError(
            message="SMOTE needs at least two minority rows",
            details={"param": "y", "value": str(counts.tolist())},
        )

    needed = int(counts.max() - counts.min())
    if needed == 0:
        return BalancedSet(
            X=features.copy(),
            y=labels.copy(),
            synthetic_count=0,
            parents=np.zeros((0, 2), dtype=np.intp),
            deltas=np.zeros(0, dtype=np.float64),
        )

    minority = features[minority_rows]
    k = min(k_neighbors, minority.shape[0] - 1)
    neighbours = nearest_neighbors(minority, k)

    rng = np.random.default_rng(seed)
    base = rng.integers(0, minority.shape[0], size=needed)
    choice = rng.integers(0, k, size=needed)
    deltas = rng.random(needed)
    partner = neighbours[base, choice]

    synthetic = minority[base] + deltas[:, None] * (minority[partner] - minority[base])
    parents = np.column_stack([minority_rows[base], minority_rows[partner]]).astype(np.intp)

    logger.debug("SMOTE added %d synthetic rows of class %d (k=%d)", needed, minority_label, k)
    return BalancedSet(
        X=np.vstack([features, synthetic]),
        y=np.concatenate([labels, np.full(needed, minority_label, dtype=np.int64)]),
        synthetic_count=needed,
        parents=parents,
        deltas=deltas,
    )
