"""Protocol definitions for splurge-dcf package.

This module defines the structural contract shared by the objects that turn
feature rows into class probabilities, so forests, cascade levels and whole
models can be evaluated through the same code path.

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from typing import Protocol, runtime_checkable

import numpy as np
import numpy.typing as npt


@runtime_checkable
class ProbabilisticClassifier(Protocol):
    """Protocol for binary classifiers that emit class probabilities.

    Implementations return one ``(p_ham, p_spam)`` row per input row.
    """

    def predict_proba(self, X: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        """Class probabilities for every row of ``X``.

        Args:
            X (NDArray): Feature rows of shape ``(n, F)``.

        Returns:
            NDArray: Array of shape ``(n, 2)`` whose rows sum to one.
        """
        ...  # pragma: no cover
