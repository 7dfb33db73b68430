"""Random-filter convolution, ReLU and global pooling over word matrices.

Each cascade level owns a :class:`FilterBank` of ``L`` fixed random filters.
Level 1 slides ``d x k`` filters over a message's word matrix; later levels
treat the previous feature vector as a sequence of one-dimensional words and
slide ``1 x k`` filters over it. Every feature map is rectified and reduced to
one scalar by global pooling, so the output width is always ``L`` regardless
of message length.

Filters are never trained. Their weights are drawn once from a seed and stored
in the model file, so inference reproduces training exactly.

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt
from numpy.lib.stride_tricks import sliding_window_view

from .common_utils import to_enum
from .exceptions import SplurgeDcfValueError

FloatArray = npt.NDArray[np.float64]

STRIDE = 1


class Pooling(Enum):
    """Global pooling applied to each rectified feature map.

    Attributes:
        MAX: Maximum value of the map (default).
        MIN: Minimum value of the map.
        AVERAGE: Arithmetic mean of the map.
    """

    MAX = "max"
    MIN = "min"
    AVERAGE = "average"


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Fixed random convolution filters for one cascade level.

    Attributes:
        weights: Array of shape ``(L, input_dim, k)``; ``weights[j]`` is filter ``F_j``.
        seed: Seed the weights were drawn from.
    """

    weights: FloatArray
    seed: int

    def __post_init__(self) -> None:
        if self.weights.ndim != 3 or min(self.weights.shape) < 1:
            raise SplurgeDcfValueError(
                message="Filter weights must have shape (L, input_dim, k) with all dimensions >= 1",
                details={"param": "weights", "value": str(self.weights.shape)},
            )
        if not np.all(np.isfinite(self.weights)):
            raise SplurgeDcfValueError(
                message="Filter weights must be finite",
                details={"param": "weights"},
            )
        self.weights.setflags(write=False)

    @property
    def n_filters(self) -> int:
        """Number of filters ``L``."""
        return int(self.weights.shape[0])

    @property
    def input_dim(self) -> int:
        """Width of each input row (``d`` at level 1, ``1`` afterwards)."""
        return int(self.weights.shape[1])

    @property
    def kernel_size(self) -> int:
        """Number of consecutive rows each filter spans (``k``)."""
        return int(self.weights.shape[2])

    @property
    def stride(self) -> int:
        return STRIDE

    def filter(self, index: int) -> FloatArray:
        """Return filter ``index`` as an ``(input_dim, k)`` matrix."""
        return self.weights[index]


def init_filter_bank(seed: int, n_filters: int, input_dim: int, kernel_size: int) -> FilterBank:
    """Draw a filter bank with symmetric uniform fan-scaled weights.

    Weights are i.i.d. uniform on ``[-a, a]`` with
    ``a = sqrt(6 / (input_dim * k + L))``.

    Args:
        seed (int): Seed for the weight generator.
        n_filters (int): Number of filters ``L``.
        input_dim (int): Row width of the input matrices.
        kernel_size (int): Kernel size ``k``.

    Returns:
        FilterBank: The new bank; the same arguments always give identical weights.

    Raises:
        SplurgeDcfValueError: If any dimension is not positive.
    """
    for name, value in (("n_filters", n_filters), ("input_dim", input_dim), ("kernel_size", kernel_size)):
        if value < 1:
            raise SplurgeDcfValueError(
                message=f"{name} must be >= 1, got {value}",
                details={"param": name, "value": str(value)},
            )

    fan_in = input_dim * kernel_size
    limit = math.sqrt(6.0 / (fan_in + n_filters))
    rng = np.random.default_rng(seed)
    weights = rng.uniform(-limit, limit, size=(n_filters, input_dim, kernel_size))
    return FilterBank(weights=weights, seed=seed)


def _check_compatible(matrix: FloatArray, input_dim: int, kernel_size: int) -> None:
    if matrix.ndim != 2:
        raise SplurgeDcfValueError(
            message=f"Word matrix must be 2-D, got {matrix.ndim}-D",
            details={"param": "matrix", "value": str(matrix.shape)},
        )
    if matrix.shape[1] != input_dim:
        raise SplurgeDcfValueError(
            message=f"Word matrix width {matrix.shape[1]} does not match filter input_dim {input_dim}",
            error_code="dimension-mismatch",
            details={"matrix_dim": str(matrix.shape[1]), "input_dim": str(input_dim)},
        )
    if matrix.shape[0] < kernel_size:
        raise SplurgeDcfValueError(
            message=f"Word matrix has {matrix.shape[0]} rows, fewer than kernel size {kernel_size}",
            error_code="too-short",
            details={"rows": str(matrix.shape[0]), "kernel_size": str(kernel_size)},
        )


def _windows(matrix: FloatArray, kernel_size: int) -> FloatArray:
    # (n - k + 1, d, k): window i holds rows i..i+k-1 laid out column-wise like F.
    return sliding_window_view(matrix, kernel_size, axis=0)


def convolve(matrix: FloatArray, filter_weights: FloatArray) -> FloatArray:
    """Slide one filter over a word matrix with stride 1 and no bias.

    ``O_i = sum_r sum_c M[i + r, c] * F[c, r]`` for every window position.

    Args:
        matrix (NDArray): Word matrix of shape ``(n, d)``.
        filter_weights (NDArray): Filter of shape ``(d, k)``.

    Returns:
        NDArray: Feature map of length ``n - k + 1``.

    Raises:
        SplurgeDcfValueError: If the shapes are incompatible.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    filter_weights = np.asarray(filter_weights, dtype=np.float64)
    if filter_weights.ndim != 2:
        raise SplurgeDcfValueError(
            message="Filter must be a 2-D (input_dim, k) matrix",
            details={"param": "filter_weights", "value": str(filter_weights.shape)},
        )
    input_dim, kernel_size = filter_weights.shape
    _check_compatible(matrix, input_dim, kernel_size)
    return np.einsum("wdk,dk->w", _windows(matrix, kernel_size), filter_weights)


def relu(feature_map: FloatArray) -> FloatArray:
    """Rectify a feature map element-wise: ``max(0, O_i)``."""
    return np.maximum(np.asarray(feature_map, dtype=np.float64), 0.0)


def global_pool(feature_map: FloatArray, pooling: Pooling | str = Pooling.MAX) -> float:
    """Reduce a feature map to one scalar with a pool as wide as the map.

    Args:
        feature_map (NDArray): Non-empty feature map.
        pooling (Pooling | str): Reduction to apply.

    Returns:
        float: The pooled value.

    Raises:
        SplurgeDcfValueError: If the map is empty.
    """
    values = np.asarray(feature_map, dtype=np.float64)
    if values.size == 0:
        raise SplurgeDcfValueError(
            message="Cannot pool an empty feature map",
            details={"param": "feature_map"},
        )
    mode = to_enum(Pooling, pooling, param="pooling")
    if mode is Pooling.MIN:
        return float(values.min())
    if mode is Pooling.AVERAGE:
        return float(values.mean())
    return float(values.max())


def global_max_pool(feature_map: FloatArray) -> float:
    """Return the maximum element of a non-empty feature map."""
    return global_pool(feature_map, Pooling.MAX)


def _pool_axis(maps: FloatArray, mode: Pooling) -> FloatArray:
    if mode is Pooling.MIN:
        return maps.min(axis=-1)
    if mode is Pooling.AVERAGE:
        return maps.mean(axis=-1)
    return maps.max(axis=-1)


def extract_features(
    matrix: FloatArray,
    bank: FilterBank,
    *,
    pooling: Pooling | str = Pooling.MAX,
) -> FloatArray:
    """Convolve, rectify and pool a word matrix with every filter of a bank.

    Args:
        matrix (NDArray): Word matrix of shape ``(n, d)`` with ``n >= k``.
        bank (FilterBank): Filters with ``input_dim == d``.
        pooling (Pooling | str): Global pooling mode.

    Returns:
        NDArray: Non-negative feature vector of length ``L``.

    Raises:
        SplurgeDcfValueError: If the matrix is incompatible with the bank.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    _check_compatible(matrix, bank.input_dim, bank.kernel_size)
    mode = to_enum(Pooling, pooling, param="pooling")
    maps = np.einsum("wdk,ldk->lw", _windows(matrix, bank.kernel_size), bank.weights)
    return _pool_axis(relu(maps), mode)


def extract_feature_matrix(
    matrices: Sequence[FloatArray],
    bank: FilterBank,
    *,
    pooling: Pooling | str = Pooling.MAX,
) -> FloatArray:
    """Run :func:`extract_features` over many word matrices.

    Returns:
        NDArray: Array of shape ``(len(matrices), L)``.
    """
    rows = [extract_features(matrix, bank, pooling=pooling) for matrix in matrices]
    if not rows:
        return np.zeros((0, bank.n_filters), dtype=np.float64)
    return np.vstack(rows)


def update_features(
    previous: FloatArray,
    bank: FilterBank,
    *,
    pooling: Pooling | str = Pooling.MAX,
) -> FloatArray:
    """Transform a feature vector for the next cascade level.

    The length-``L`` vector is read as ``L`` one-dimensional words; each of the
    bank's filters convolves it with stride 1, the maps are rectified and each
    is pooled to one scalar.

    Args:
        previous (NDArray): Feature vector from the previous level.
        bank (FilterBank): Bank built with ``input_dim == 1``.
        pooling (Pooling | str): Global pooling mode.

    Returns:
        NDArray: Feature vector of length ``bank.n_filters``.

    Raises:
        SplurgeDcfValueError: If the bank is not one-dimensional or the vector
            is shorter than the kernel.
    """
    if bank.input_dim != 1:
        raise SplurgeDcfValueError(
            message=f"Feature update needs a bank with input_dim 1, got {bank.input_dim}",
            error_code="dimension-mismatch",
            details={"input_dim": str(bank.input_dim)},
        )
    vector = np.asarray(previous, dtype=np.float64).reshape(-1, 1)
    return extract_features(vector, bank, pooling=pooling)


def update_feature_matrix(
    previous: FloatArray,
    bank: FilterBank,
    *,
    pooling: Pooling | str = Pooling.MAX,
) -> FloatArray:
    """Apply :func:`update_features` to every row of a feature matrix.

    Args:
        previous (NDArray): Array of shape ``(N, L_prev)``.
        bank (FilterBank): One-dimensional bank.
        pooling (Pooling | str): Global pooling mode.

    Returns:
        NDArray: Array of shape ``(N, bank.n_filters)``.
    """
    previous = np.asarray(previous, dtype=np.float64)
    if previous.ndim != 2:
        raise SplurgeDcfValueError(
            message="Feature matrix must be 2-D",
            details={"param": "previous", "value": str(previous.shape)},
        )
    if bank.input_dim != 1:
        raise SplurgeDcfValueError(
            message=f"Feature update needs a bank with input_dim 1, got {bank.input_dim}",
            error_code="dimension-mismatch",
            details={"input_dim": str(bank.input_dim)},
        )
    if previous.shape[1] < bank.kernel_size:
        raise SplurgeDcfValueError(
            message=f"Feature vectors of width {previous.shape[1]} are shorter than kernel size {bank.kernel_size}",
            error_code="too-short",
            details={"width": str(previous.shape[1]), "kernel_size": str(bank.kernel_size)},
        )
    mode = to_enum(Pooling, pooling, param="pooling")
    windows = sliding_window_view(previous, bank.kernel_size, axis=1)
    maps = np.einsum("nwk,lk->nlw", windows, bank.weights[:, 0, :])
    return _pool_axis(relu(maps), mode)
