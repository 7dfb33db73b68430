"""The self-growing convolutional forest cascade.

Every level owns a fixed random filter bank and four forests. Level 1
convolves the word matrices of the messages; each later level convolves the
previous level's feature vectors with ``1 x k`` filters and appends the eight
class probabilities emitted by the previous level's forests (``P_ham`` of
forests 1-4, then ``P_spam`` of forests 1-4). Levels are added while the
validation accuracy improves by more than ``epsilon`` over the best retained
level; the first level that fails the gate is discarded.

A message is labelled ham when the mean ``P_ham`` of the last level's four
forests strictly exceeds the mean ``P_spam``; otherwise it is spam.

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
import numpy.typing as npt

from .balance import smote_balance
from .common_utils import derive_seed
from .config import LEVEL_FOREST_COUNT, CascadeConfig
from .convnet import (
    FilterBank,
    extract_feature_matrix,
    init_filter_bank,
    update_feature_matrix,
)
from .corpus import DatasetSplit, TokenizedMessage
from .embedding import EmbeddingTable, build_word_matrix
from .exceptions import SplurgeDcfValueError
from .forest import Forest, cross_fit_proba, fit_forest
from .metrics import log_loss

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

PROBABILITY_COUNT = 2 * LEVEL_FOREST_COUNT
BANK_SLOT = 0
SMOTE_SEED_PATH = (0, 0)


class StopReason(Enum):
    """Why the cascade stopped growing."""

    NO_IMPROVEMENT = "no-improvement"
    MAX_LEVELS = "max-levels"


@dataclass(frozen=True, eq=False)
class CascadeLevel:
    """One cascade level: a filter bank and four forests.

    Attributes:
        level_index: 1-based position in the cascade.
        bank: Level 1 holds ``d x k`` filters, later levels ``1 x k`` filters.
        forests: Base forests in configuration order.
    """

    level_index: int
    bank: FilterBank
    forests: tuple[Forest, ...]

    def forest_probabilities(self, X: FloatArray) -> FloatArray:
        """The eight per-forest probabilities of every row, shape ``(n, 8)``.

        Columns are ``P_ham`` of each forest followed by ``P_spam`` of each forest.
        """
        outputs = [forest.predict_proba(X) for forest in self.forests]
        return np.hstack([np.column_stack([p[:, 0] for p in outputs]), np.column_stack([p[:, 1] for p in outputs])])

    def predict_proba(self, X: FloatArray) -> FloatArray:
        """Averaged ``(h, s)`` over the four forests, shape ``(n, 2)``."""
        return average_probabilities(self.forest_probabilities(X))


@dataclass(frozen=True)
class TrainReport:
    """Validation record of cascade growth.

    Attributes:
        accuracies: Validation accuracy of every retained level.
        log_losses: Validation log-loss of every retained level.
        stop_reason: Why growth stopped.
        rejected_accuracy: Accuracy of the discarded level, if one was built.
        rejected_log_loss: Log-loss of the discarded level, if one was built.
    """

    accuracies: tuple[float, ...]
    log_losses: tuple[float, ...]
    stop_reason: StopReason
    rejected_accuracy: float | None = None
    rejected_log_loss: float | None = None

    @property
    def level_count(self) -> int:
        return len(self.accuracies)

    def to_dict(self) -> dict[str, Any]:
        return {
            "level_count": self.level_count,
            "accuracies": list(self.accuracies),
            "log_losses": list(self.log_losses),
            "stop_reason": self.stop_reason.value,
            "rejected_accuracy": self.rejected_accuracy,
            "rejected_log_loss": self.rejected_log_loss,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> TrainReport:
        try:
            return cls(
                accuracies=tuple(float(v) for v in data["accuracies"]),
                log_losses=tuple(float(v) for v in data["log_losses"]),
                stop_reason=StopReason(data["stop_reason"]),
                rejected_accuracy=None if data.get("rejected_accuracy") is None else float(data["rejected_accuracy"]),
                rejected_log_loss=None if data.get("rejected_log_loss") is None else float(data["rejected_log_loss"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise SplurgeDcfValueError(
                message=f"Invalid training report: {e}",
                details={"param": "report"},
            ) from e

    def format_table(self) -> str:
        lines = ["Training", f"{'level':<7}{'val accuracy':>14}{'val log-loss':>14}"]
        for index, (accuracy, loss) in enumerate(zip(self.accuracies, self.log_losses, strict=True), start=1):
            lines.append(f"{index:<7}{accuracy * 100:>13.2f}%{loss:>14.4f}")
        if self.rejected_accuracy is not None and self.rejected_log_loss is not None:
            lines.append(
                f"{'(rej)':<7}{self.rejected_accuracy * 100:>13.2f}%{self.rejected_log_loss:>14.4f}"
            )
        lines.append(f"levels: {self.level_count} (stopped: {self.stop_reason.value})")
        return "\n".join(lines)


@dataclass(frozen=True, eq=False)
class CascadeModel:
    """A trained cascade.

    Attributes:
        levels: Retained levels in order.
        config: Hyperparameters the cascade was trained with.
        stop_reason: Why growth stopped.
        metadata: Extra JSON-compatible settings (preprocessing, split) kept
            with the model so evaluation can rebuild the same pipeline.
    """

    levels: tuple[CascadeLevel, ...]
    config: CascadeConfig
    stop_reason: StopReason
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.levels:
            raise SplurgeDcfValueError(
                message="A cascade model needs at least one level",
                details={"param": "levels", "value": "0"},
            )
        for position, level in enumerate(self.levels, start=1):
            input_dim = self.config.embedding_dim if position == 1 else 1
            expected_bank = (self.config.n_filters, input_dim, self.config.kernel_size)
            if level.level_index != position or level.bank.weights.shape != expected_bank:
                raise SplurgeDcfValueError(
                    message=f"Level {position} bank has shape {level.bank.weights.shape}, expected {expected_bank}",
                    error_code="dimension-mismatch",
                    details={"level": str(position)},
                )
            width = self.config.n_filters if position == 1 else self.config.n_filters + PROBABILITY_COUNT
            if len(level.forests) != LEVEL_FOREST_COUNT or any(f.feature_count != width for f in level.forests):
                raise SplurgeDcfValueError(
                    message=f"Level {position} needs {LEVEL_FOREST_COUNT} forests of input width {width}",
                    error_code="dimension-mismatch",
                    details={"level": str(position)},
                )

    @property
    def n_filters(self) -> int:
        return self.config.n_filters

    @property
    def kernel_size(self) -> int:
        return self.config.kernel_size

    @property
    def embedding_dim(self) -> int:
        return self.config.embedding_dim

    def forest_probabilities(self, matrices: Sequence[FloatArray]) -> FloatArray:
        """Eight probabilities of the last level for every word matrix."""
        pooling = self.config.pooling
        features = extract_feature_matrix(matrices, self.levels[0].bank, pooling=pooling)
        probabilities: FloatArray | None = None
        for level in self.levels:
            if level.level_index > 1:
                features = update_feature_matrix(features, level.bank, pooling=pooling)
            probabilities = level.forest_probabilities(level_input_matrix(features, probabilities))
        assert probabilities is not None
        return probabilities

    def predict_proba(self, matrices: Sequence[FloatArray]) -> FloatArray:
        """Averaged ``(h, s)`` of the last level for every word matrix."""
        if not matrices:
            return np.zeros((0, 2), dtype=np.float64)
        return average_probabilities(self.forest_probabilities(matrices))

    def describe(self) -> dict[str, Any]:
        """Summary of the model structure for reports."""
        return {
            "levels": len(self.levels),
            "stop_reason": self.stop_reason.value,
            "n_filters": self.n_filters,
            "kernel_size": self.kernel_size,
            "embedding_dim": self.embedding_dim,
            "pooling": self.config.pooling.value,
            "forest_kinds": [kind.value for kind in self.config.forest_kinds],
            "n_trees": self.config.n_trees,
            "seed": self.config.seed,
            "nodes_per_level": [sum(tree.node_count for f in level.forests for tree in f.trees) for level in self.levels],
        }


def average_probabilities(probabilities: FloatArray) -> FloatArray:
    """Collapse eight per-forest probabilities into ``(h, s)`` means."""
    return np.column_stack(
        [
            probabilities[:, :LEVEL_FOREST_COUNT].mean(axis=1),
            probabilities[:, LEVEL_FOREST_COUNT:].mean(axis=1),
        ]
    )


def decide(averaged: FloatArray) -> IntArray:
    """Ham (0) where the mean ``P_ham`` strictly exceeds the mean ``P_spam``, else spam (1)."""
    return np.where(averaged[:, 0] > averaged[:, 1], 0, 1).astype(np.int64)


def level_input(features: FloatArray | Sequence[float], prev_probs: FloatArray | Sequence[float] | None) -> FloatArray:
    """Classifier input of one message at some level.

    Args:
        features: Feature vector of length ``L``.
        prev_probs: The previous level's eight probabilities, or None at level 1.

    Returns:
        NDArray: ``features`` at level 1, otherwise ``features`` followed by
        the eight probabilities (width ``L + 8``).

    Raises:
        SplurgeDcfValueError: If ``prev_probs`` does not hold exactly eight values.
    """
    vector = np.asarray(features, dtype=np.float64)
    if prev_probs is None:
        return vector
    probabilities = np.asarray(prev_probs, dtype=np.float64)
    if probabilities.shape != (PROBABILITY_COUNT,):
        raise SplurgeDcfValueError(
            message=f"Expected {PROBABILITY_COUNT} previous-level probabilities, got {probabilities.size}",
            details={"param": "prev_probs", "value": str(probabilities.size)},
        )
    return np.concatenate([vector, probabilities])


def level_input_matrix(features: FloatArray, prev_probs: FloatArray | None) -> FloatArray:
    """Row-wise :func:`level_input` over a feature matrix."""
    if prev_probs is None:
        return features
    if prev_probs.shape != (features.shape[0], PROBABILITY_COUNT):
        raise SplurgeDcfValueError(
            message=f"Expected ({features.shape[0]}, {PROBABILITY_COUNT}) previous-level probabilities, got {prev_probs.shape}",
            details={"param": "prev_probs", "value": str(prev_probs.shape)},
        )
    return np.hstack([features, prev_probs])


def word_matrices(messages: Sequence[TokenizedMessage] | Sequence[Sequence[str]], table: EmbeddingTable, kernel_size: int) -> list[FloatArray]:
    """Word matrices of messages (or bare token lists), padded to ``kernel_size`` rows."""
    matrices: list[FloatArray] = []
    for message in messages:
        tokens = message.tokens if isinstance(message, TokenizedMessage) else message
        matrices.append(build_word_matrix(tokens, table, kernel_size))
    return matrices


def _fit_level_forests(
    X: FloatArray,
    y: IntArray,
    level_index: int,
    config: CascadeConfig,
) -> tuple[tuple[Forest, ...], FloatArray]:
    forests: list[Forest] = []
    ham_columns: list[FloatArray] = []
    spam_columns: list[FloatArray] = []
    for slot, kind in enumerate(config.forest_kinds, start=1):
        forest_seed = derive_seed(config.seed, level_index, slot)
        if config.cross_fit:
            train_probabilities, forest = cross_fit_proba(
                X,
                y,
                kind,
                config.folds,
                forest_seed,
                n_trees=config.n_trees,
                split_rule=config.extra_trees_split,
                n_jobs=config.n_jobs,
            )
        else:
            forest = fit_forest(
                X,
                y,
                kind,
                config.n_trees,
                forest_seed,
                split_rule=config.extra_trees_split,
                n_jobs=config.n_jobs,
            )
            train_probabilities = forest.predict_proba(X)
        forests.append(forest)
        ham_columns.append(train_probabilities[:, 0])
        spam_columns.append(train_probabilities[:, 1])
    return tuple(forests), np.column_stack(ham_columns + spam_columns)


def _labels(messages: Sequence[TokenizedMessage]) -> IntArray:
    return np.array([message.label for message in messages], dtype=np.int64)


def train_cascade(
    split: DatasetSplit,
    config: CascadeConfig,
    table: EmbeddingTable,
    *,
    metadata: Mapping[str, Any] | None = None,
) -> tuple[CascadeModel, TrainReport]:
    """Grow a cascade on the training set, gated by validation accuracy.

    Level 1 features are balanced once with SMOTE; the balanced rows are carried
    through every later level. Training rows passed to the next level use
    out-of-fold probabilities when ``config.cross_fit`` is set; validation rows
    always use the forests fitted on all training rows.

    Args:
        split (DatasetSplit): Corpus partition; train and validation are used.
        config (CascadeConfig): Hyperparameters.
        table (EmbeddingTable): Word vectors of dimension ``config.embedding_dim``.
        metadata (Mapping | None): Extra settings stored with the model.

    Returns:
        tuple[CascadeModel, TrainReport]: The model and its growth record.

    Raises:
        SplurgeDcfValueError: If the training set is empty or single-class, the
            validation set is empty, or the table dimension does not match.
    """
    if table.dim != config.embedding_dim:
        raise SplurgeDcfValueError(
            message=f"Embedding dimension {table.dim} does not match configured {config.embedding_dim}",
            error_code="dimension-mismatch",
            details={"table_dim": str(table.dim), "embedding_dim": str(config.embedding_dim)},
        )
    y_train = _labels(split.train)
    y_validation = _labels(split.validation)
    if y_train.size == 0 or np.unique(y_train).size < 2:
        raise SplurgeDcfValueError(
            message="Training set must contain both ham and spam messages",
            error_code="single-class",
            details={"param": "train", "value": str(np.bincount(y_train, minlength=2).tolist())},
        )
    if y_validation.size == 0:
        raise SplurgeDcfValueError(
            message="Validation set is empty",
            details={"param": "validation", "value": "0"},
        )

    first_bank = init_filter_bank(
        derive_seed(config.seed, 1, BANK_SLOT), config.n_filters, config.embedding_dim, config.kernel_size
    )
    train_features = extract_feature_matrix(
        word_matrices(split.train, table, config.kernel_size), first_bank, pooling=config.pooling
    )
    validation_features = extract_feature_matrix(
        word_matrices(split.validation, table, config.kernel_size), first_bank, pooling=config.pooling
    )
    balanced = smote_balance(train_features, y_train, config.smote_k, derive_seed(config.seed, *SMOTE_SEED_PATH))
    logger.info(
        "Level 1 features: %d training rows (%d synthetic), %d validation rows",
        balanced.X.shape[0],
        balanced.synthetic_count,
        validation_features.shape[0],
    )
    train_features = balanced.X
    y_balanced = balanced.y

    levels: list[CascadeLevel] = []
    accuracies: list[float] = []
    losses: list[float] = []
    train_probabilities: FloatArray | None = None
    validation_probabilities: FloatArray | None = None
    rejected_accuracy: float | None = None
    rejected_loss: float | None = None
    stop_reason = StopReason.MAX_LEVELS

    for level_index in range(1, config.max_levels + 1):
        if level_index == 1:
            bank = first_bank
        else:
            bank = init_filter_bank(derive_seed(config.seed, level_index, BANK_SLOT), config.n_filters, 1, config.kernel_size)
            train_features = update_feature_matrix(train_features, bank, pooling=config.pooling)
            validation_features = update_feature_matrix(validation_features, bank, pooling=config.pooling)

        forests, next_train_probabilities = _fit_level_forests(
            level_input_matrix(train_features, train_probabilities), y_balanced, level_index, config
        )
        level = CascadeLevel(level_index=level_index, bank=bank, forests=forests)
        next_validation_probabilities = level.forest_probabilities(
            level_input_matrix(validation_features, validation_probabilities)
        )
        averaged = average_probabilities(next_validation_probabilities)
        accuracy = float(np.mean(decide(averaged) == y_validation))
        loss = log_loss(y_validation, averaged[:, 1])

        if accuracies and accuracy - max(accuracies) <= config.epsilon:
            logger.info(
                "Level %d rejected: validation accuracy %.4f, log-loss %.4f (best %.4f, epsilon %g)",
                level_index,
                accuracy,
                loss,
                max(accuracies),
                config.epsilon,
            )
            rejected_accuracy, rejected_loss = accuracy, loss
            stop_reason = StopReason.NO_IMPROVEMENT
            break

        logger.info("Level %d accepted: validation accuracy %.4f, log-loss %.4f", level_index, accuracy, loss)
        levels.append(level)
        accuracies.append(accuracy)
        losses.append(loss)
        train_probabilities = next_train_probabilities
        validation_probabilities = next_validation_probabilities

    model = CascadeModel(
        levels=tuple(levels),
        config=config,
        stop_reason=stop_reason,
        metadata=dict(metadata or {}),
    )
    report = TrainReport(
        accuracies=tuple(accuracies),
        log_losses=tuple(losses),
        stop_reason=stop_reason,
        rejected_accuracy=rejected_accuracy,
        rejected_log_loss=rejected_loss,
    )
    return model, report


def predict_messages(
    model: CascadeModel,
    messages: Sequence[TokenizedMessage] | Sequence[Sequence[str]],
    table: EmbeddingTable,
) -> tuple[IntArray, FloatArray]:
    """Labels and mean spam probabilities for many messages.

    Returns:
        tuple[NDArray, NDArray]: Labels in ``{0, 1}`` and ``s`` values.
    """
    if table.dim != model.embedding_dim:
        raise SplurgeDcfValueError(
            message=f"Embedding dimension {table.dim} does not match model dimension {model.embedding_dim}",
            error_code="dimension-mismatch",
            details={"table_dim": str(table.dim), "embedding_dim": str(model.embedding_dim)},
        )
    averaged = model.predict_proba(word_matrices(messages, table, model.kernel_size))
    return decide(averaged), averaged[:, 1].copy()


def predict_message(model: CascadeModel, tokens: Sequence[str], table: EmbeddingTable) -> tuple[int, float]:
    """Label and mean spam probability of one tokenised message.

    Ties between the mean ham and mean spam probabilities resolve to spam.

    Args:
        model (CascadeModel): Trained cascade.
        tokens (Sequence[str]): Normalised tokens.
        table (EmbeddingTable): Word vectors the model was trained with.

    Returns:
        tuple[int, float]: ``(label, p_spam)``.
    """
    labels, p_spam = predict_messages(model, [list(tokens)], table)
    return int(labels[0]), float(p_spam[0])
