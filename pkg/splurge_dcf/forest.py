"""Binary decision trees and the two tree ensembles used by the cascade.

Trees are grown to purity with Gini impurity and stored as flat node arrays,
which keeps prediction vectorised and makes serialisation a matter of writing
five arrays. Two ensemble kinds are provided:

* ``random_forest``: every tree sees a bootstrap resample and, at each node,
  picks the best midpoint split over ``ceil(sqrt(F))`` randomly drawn features.
* ``extra_trees``: every tree sees the full sample and splits on a random
  feature at a random threshold (or, with ``best-of-random``, the best of
  ``ceil(sqrt(F))`` such random cuts).

Forests vote softly: the class distribution is the mean of the leaf
distributions reached in each tree.

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt
from joblib import Parallel, delayed
from sklearn.model_selection import KFold, StratifiedKFold

from .common_utils import derive_seed, to_enum
from .exceptions import SplurgeDcfValueError

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

N_CLASSES = 2
LEAF = -1
DEFAULT_N_TREES = 100


class ForestKind(Enum):
    """Ensemble building strategy.

    Attributes:
        RANDOM_FOREST: Bootstrap resamples with best-of-subset Gini splits.
        EXTRA_TREES: Full sample with randomised splits.
    """

    RANDOM_FOREST = "random_forest"
    EXTRA_TREES = "extra_trees"


class ExtraTreesSplit(Enum):
    """Split rule used by extremely randomised trees.

    Attributes:
        RANDOM_FEATURE: One random feature among those not constant at the
            node, one random threshold per node.
        BEST_OF_RANDOM: ``ceil(sqrt(F))`` random features with one random
            threshold each; the cut with the lowest weighted Gini wins.
    """

    RANDOM_FEATURE = "random-feature"
    BEST_OF_RANDOM = "best-of-random"


@dataclass(frozen=True)
class ClassProbabilities:
    """Soft-vote output for one sample.

    Attributes:
        p_ham: Probability of class 0.
        p_spam: Probability of class 1.
    """

    p_ham: float
    p_spam: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.p_ham, self.p_spam)


@dataclass(frozen=True)
class Split:
    """A candidate split: samples with ``x[feature] <= threshold`` go left."""

    feature: int
    threshold: float
    impurity: float


@dataclass(frozen=True)
class TreeNode:
    """Read-only view of one node in a :class:`DecisionTree`.

    Internal nodes have ``feature_index >= 0`` and both children; leaves have
    ``feature_index == -1``. Every node keeps the class counts of the training
    samples that reached it.
    """

    feature_index: int
    threshold: float
    left: int
    right: int
    class_counts: tuple[int, int]

    @property
    def is_leaf(self) -> bool:
        return self.feature_index == LEAF

    @property
    def class_distribution(self) -> tuple[float, float]:
        total = self.class_counts[0] + self.class_counts[1]
        return (self.class_counts[0] / total, self.class_counts[1] / total)


@dataclass(frozen=True, eq=False)
class DecisionTree:
    """A fitted binary classification tree in flat array form.

    Attributes:
        feature: Split feature per node, ``-1`` for leaves.
        threshold: Split threshold per node (0.0 for leaves).
        left: Left child index per node, ``-1`` for leaves.
        right: Right child index per node, ``-1`` for leaves.
        counts: Class counts per node, shape ``(n_nodes, 2)``.
    """

    feature: npt.NDArray[np.int32]
    threshold: FloatArray
    left: npt.NDArray[np.int32]
    right: npt.NDArray[np.int32]
    counts: IntArray

    @property
    def node_count(self) -> int:
        return int(self.feature.shape[0])

    @property
    def depth(self) -> int:
        """Length of the longest root-to-leaf path (0 for a single leaf)."""
        depths = np.zeros(self.node_count, dtype=np.int64)
        for node in range(self.node_count):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def node(self, index: int) -> TreeNode:
        return TreeNode(
            feature_index=int(self.feature[index]),
            threshold=float(self.threshold[index]),
            left=int(self.left[index]),
            right=int(self.right[index]),
            class_counts=(int(self.counts[index, 0]), int(self.counts[index, 1])),
        )

    def apply(self, X: FloatArray) -> npt.NDArray[np.intp]:
        """Return the leaf index reached by every row of ``X``."""
        nodes = np.zeros(X.shape[0], dtype=np.intp)
        active = np.nonzero(self.feature[nodes] != LEAF)[0]
        while active.size:
            current = nodes[active]
            go_left = X[active, self.feature[current]] <= self.threshold[current]
            nodes[active] = np.where(go_left, self.left[current], self.right[current])
            active = active[self.feature[nodes[active]] != LEAF]
        return nodes

    def leaf_distributions(self) -> FloatArray:
        """Class distribution of every node, shape ``(n_nodes, 2)``."""
        return self.counts / self.counts.sum(axis=1, keepdims=True)

    def predict_proba(self, X: FloatArray) -> FloatArray:
        return self.leaf_distributions()[self.apply(X)]


def gini_impurity(class_counts: Sequence[int]) -> float:
    """Gini impurity ``1 - sum_c (count_c / total)^2`` of a count vector.

    The value is computed with exact integer arithmetic and a single correctly
    rounded division.

    Args:
        class_counts (Sequence[int]): Non-negative class counts.

    Returns:
        float: Impurity in ``[0, 1)``.

    Raises:
        SplurgeDcfValueError: If any count is negative or all counts are zero.
    """
    counts = [int(c) for c in class_counts]
    if any(c < 0 for c in counts):
        raise SplurgeDcfValueError(
            message="Class counts must be non-negative",
            details={"param": "class_counts", "value": str(counts)},
        )
    total = sum(counts)
    if total == 0:
        raise SplurgeDcfValueError(
            message="Gini impurity is undefined for an empty node",
            details={"param": "class_counts", "value": str(counts)},
        )
    return (total * total - sum(c * c for c in counts)) / (total * total)


def _weighted_gini(n_left: FloatArray, spam_left: FloatArray, n_total: int, spam_total: int) -> FloatArray:
    n_right = n_total - n_left
    spam_right = spam_total - spam_left
    ham_left = n_left - spam_left
    ham_right = n_right - spam_right
    gini_left = 1.0 - (ham_left**2 + spam_left**2) / n_left**2
    gini_right = 1.0 - (ham_right**2 + spam_right**2) / n_right**2
    return (n_left * gini_left + n_right * gini_right) / n_total


def find_best_split(X: FloatArray, y: IntArray, features: Sequence[int]) -> Split | None:
    """Find the lowest weighted-Gini midpoint split over the given features.

    Candidate thresholds are midpoints between consecutive sorted unique values
    of each feature. Ties go to the lowest feature index, then the lowest
    threshold.

    Args:
        X (NDArray): Samples at the node, shape ``(n, F)``.
        y (NDArray): Labels in ``{0, 1}``.
        features (Sequence[int]): Candidate feature indices.

    Returns:
        Split | None: The best split, or None when no feature separates the samples.
    """
    n_total = int(y.shape[0])
    spam_total = int(y.sum())
    best: Split | None = None
    for feature in sorted(int(f) for f in features):
        column = X[:, feature]
        order = np.argsort(column, kind="stable")
        values = column[order]
        boundaries = np.nonzero(values[:-1] < values[1:])[0]
        if boundaries.size == 0:
            continue
        spam_cumulative = np.cumsum(y[order])
        n_left = (boundaries + 1).astype(np.float64)
        spam_left = spam_cumulative[boundaries].astype(np.float64)
        impurity = _weighted_gini(n_left, spam_left, n_total, spam_total)
        position = int(np.argmin(impurity))
        if best is None or impurity[position] < best.impurity:
            lower = values[boundaries[position]]
            upper = values[boundaries[position] + 1]
            threshold = (lower + upper) / 2.0
            if not lower <= threshold < upper:
                threshold = lower
            best = Split(feature=feature, threshold=float(threshold), impurity=float(impurity[position]))
    return best


def _random_cut(X: FloatArray, y: IntArray, feature: int, rng: np.random.Generator) -> Split | None:
    column = X[:, feature]
    low, high = column.min(), column.max()
    if not low < high:
        return None
    threshold = float(rng.uniform(low, high))
    goes_left = column <= threshold
    n_left = int(goes_left.sum())
    if n_left in (0, column.shape[0]):
        return None
    impurity = _weighted_gini(
        np.array([float(n_left)]),
        np.array([float(y[goes_left].sum())]),
        int(y.shape[0]),
        int(y.sum()),
    )
    return Split(feature=feature, threshold=threshold, impurity=float(impurity[0]))


def _n_candidate_features(n_features: int) -> int:
    return max(1, math.ceil(math.sqrt(n_features)))


def _choose_split(
    X: FloatArray,
    y: IntArray,
    kind: ForestKind,
    split_rule: ExtraTreesSplit,
    rng: np.random.Generator,
) -> Split | None:
    n_features = X.shape[1]
    if kind is ForestKind.RANDOM_FOREST:
        candidates = rng.choice(n_features, size=_n_candidate_features(n_features), replace=False)
        return find_best_split(X, y, candidates)

    if split_rule is ExtraTreesSplit.RANDOM_FEATURE:
        # Drawn among features that vary at this node; none varying makes a leaf.
        varying = np.flatnonzero(X.max(axis=0) > X.min(axis=0))
        if varying.size == 0:
            return None
        return _random_cut(X, y, int(varying[rng.integers(varying.size)]), rng)

    best: Split | None = None
    candidates = rng.choice(n_features, size=_n_candidate_features(n_features), replace=False)
    for feature in np.sort(candidates):
        cut = _random_cut(X, y, int(feature), rng)
        if cut is not None and (best is None or cut.impurity < best.impurity):
            best = cut
    return best


def _as_training_arrays(X: FloatArray | Sequence[Sequence[float]], y: Sequence[int] | IntArray) -> tuple[FloatArray, IntArray]:
    features = np.asarray(X, dtype=np.float64)
    labels = np.asarray(y, dtype=np.int64)
    if features.ndim != 2 or features.shape[0] == 0 or features.shape[1] == 0:
        raise SplurgeDcfValueError(
            message="Training data must be a non-empty 2-D array",
            details={"param": "X", "value": str(features.shape)},
        )
    if labels.shape != (features.shape[0],):
        raise SplurgeDcfValueError(
            message=f"Got {labels.shape[0] if labels.ndim else 0} labels for {features.shape[0]} rows",
            details={"param": "y", "value": str(labels.shape)},
        )
    if not np.all((labels == 0) | (labels == 1)):
        raise SplurgeDcfValueError(
            message="Labels must be 0 (ham) or 1 (spam)",
            details={"param": "y"},
        )
    if not np.all(np.isfinite(features)):
        raise SplurgeDcfValueError(
            message="Training features must be finite",
            details={"param": "X"},
        )
    return features, labels


def fit_tree(
    X: FloatArray | Sequence[Sequence[float]],
    y: Sequence[int] | IntArray,
    mode: ForestKind | str,
    rng: np.random.Generator,
    *,
    split_rule: ExtraTreesSplit | str = ExtraTreesSplit.RANDOM_FEATURE,
) -> DecisionTree:
    """Grow one unpruned classification tree.

    Nodes are split until they are pure, hold fewer than two samples, or no
    candidate split separates their samples.

    Args:
        X (array-like): Training rows, shape ``(n, F)``.
        y (array-like): Labels in ``{0, 1}``.
        mode (ForestKind | str): Split strategy.
        rng (Generator): Source of all randomness for this tree.
        split_rule (ExtraTreesSplit | str): Extra-trees split rule.

    Returns:
        DecisionTree: The fitted tree.

    Raises:
        SplurgeDcfValueError: If the input is empty or inconsistent.
    """
    features, labels = _as_training_arrays(X, y)
    kind = to_enum(ForestKind, mode, param="mode")
    rule = to_enum(ExtraTreesSplit, split_rule, param="split_rule")

    feature: list[int] = [LEAF]
    threshold: list[float] = [0.0]
    left: list[int] = [LEAF]
    right: list[int] = [LEAF]
    counts: list[tuple[int, int]] = [(0, 0)]

    stack: list[tuple[int, npt.NDArray[np.intp]]] = [(0, np.arange(labels.shape[0]))]
    while stack:
        node, rows = stack.pop()
        node_labels = labels[rows]
        spam = int(node_labels.sum())
        counts[node] = (int(rows.shape[0]) - spam, spam)
        if rows.shape[0] < 2 or spam in (0, rows.shape[0]):
            continue

        split = _choose_split(features[rows], node_labels, kind, rule, rng)
        if split is None:
            continue

        goes_left = features[rows, split.feature] <= split.threshold
        left_id, right_id = len(feature), len(feature) + 1
        for _ in range(2):
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            counts.append((0, 0))
        feature[node] = split.feature
        threshold[node] = split.threshold
        left[node] = left_id
        right[node] = right_id
        stack.append((right_id, rows[~goes_left]))
        stack.append((left_id, rows[goes_left]))

    return DecisionTree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        counts=np.asarray(counts, dtype=np.int64).reshape(-1, N_CLASSES),
    )


@dataclass(frozen=True, eq=False)
class Forest:
    """An ensemble of decision trees with soft voting.

    Attributes:
        kind: How the trees were built.
        trees: Fitted trees.
        seed: Forest seed; tree ``i`` used ``derive_seed(seed, i)``.
        feature_count: Input width every tree expects.
        split_rule: Extra-trees split rule the forest was built with.
    """

    kind: ForestKind
    trees: tuple[DecisionTree, ...]
    seed: int
    feature_count: int
    split_rule: ExtraTreesSplit = ExtraTreesSplit.RANDOM_FEATURE

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def _check_width(self, X: FloatArray) -> FloatArray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != self.feature_count:
            raise SplurgeDcfValueError(
                message=f"Expected {self.feature_count} features, got {X.shape[-1]}",
                error_code="width-mismatch",
                details={"expected": str(self.feature_count), "received": str(X.shape[-1])},
            )
        return X

    def predict_proba(self, X: FloatArray) -> FloatArray:
        """Mean leaf distribution over all trees, shape ``(n, 2)``."""
        X = self._check_width(X)
        total = np.zeros((X.shape[0], N_CLASSES), dtype=np.float64)
        for tree in self.trees:
            total += tree.predict_proba(X)
        return total / len(self.trees)

    def predict_majority(self, X: FloatArray) -> IntArray:
        """Hard majority vote of the trees; ties go to spam."""
        X = self._check_width(X)
        spam_votes = np.zeros(X.shape[0], dtype=np.int64)
        for tree in self.trees:
            distribution = tree.predict_proba(X)
            spam_votes += (distribution[:, 1] >= distribution[:, 0]).astype(np.int64)
        return (2 * spam_votes >= len(self.trees)).astype(np.int64)


def predict_proba(forest: Forest, x: FloatArray | Sequence[float]) -> ClassProbabilities:
    """Soft-vote class probabilities for a single feature vector.

    Args:
        forest (Forest): Fitted forest.
        x (array-like): Feature vector of width ``forest.feature_count``.

    Returns:
        ClassProbabilities: ``(p_ham, p_spam)`` summing to one.

    Raises:
        SplurgeDcfValueError: If the width does not match the forest.
    """
    vector = np.asarray(x, dtype=np.float64)
    if vector.ndim != 1:
        raise SplurgeDcfValueError(
            message="Expected a single feature vector",
            details={"param": "x", "value": str(vector.shape)},
        )
    p_ham, p_spam = forest.predict_proba(vector)[0]
    return ClassProbabilities(p_ham=float(p_ham), p_spam=float(p_spam))


def _fit_member(
    X: FloatArray,
    y: IntArray,
    kind: ForestKind,
    split_rule: ExtraTreesSplit,
    tree_seed: int,
) -> DecisionTree:
    rng = np.random.default_rng(tree_seed)
    if kind is ForestKind.RANDOM_FOREST:
        sample = rng.integers(0, X.shape[0], size=X.shape[0])
        return fit_tree(X[sample], y[sample], kind, rng, split_rule=split_rule)
    return fit_tree(X, y, kind, rng, split_rule=split_rule)


def fit_forest(
    X: FloatArray | Sequence[Sequence[float]],
    y: Sequence[int] | IntArray,
    kind: ForestKind | str,
    n_trees: int = DEFAULT_N_TREES,
    seed: int = 0,
    *,
    split_rule: ExtraTreesSplit | str = ExtraTreesSplit.RANDOM_FEATURE,
    n_jobs: int = 1,
) -> Forest:
    """Fit a random forest or an extremely randomised trees ensemble.

    Tree ``i`` draws all of its randomness from ``derive_seed(seed, i)``, so
    serial and parallel fits produce identical forests.

    Args:
        X (array-like): Training rows, shape ``(n, F)``.
        y (array-like): Labels in ``{0, 1}``.
        kind (ForestKind | str): Ensemble strategy.
        n_trees (int): Number of trees.
        seed (int): Forest seed.
        split_rule (ExtraTreesSplit | str): Extra-trees split rule.
        n_jobs (int): joblib worker count for tree fitting.

    Returns:
        Forest: The fitted ensemble.

    Raises:
        SplurgeDcfValueError: If the input is empty or ``n_trees < 1``.
    """
    features, labels = _as_training_arrays(X, y)
    forest_kind = to_enum(ForestKind, kind, param="kind")
    rule = to_enum(ExtraTreesSplit, split_rule, param="split_rule")
    if n_trees < 1:
        raise SplurgeDcfValueError(
            message=f"n_trees must be >= 1, got {n_trees}",
            details={"param": "n_trees", "value": str(n_trees)},
        )

    logger.debug("Fitting %s with %d trees on %d rows x %d features", forest_kind.value, n_trees, *features.shape)
    seeds = [derive_seed(seed, index) for index in range(n_trees)]
    if n_jobs == 1:
        trees = [_fit_member(features, labels, forest_kind, rule, tree_seed) for tree_seed in seeds]
    else:
        trees = Parallel(n_jobs=n_jobs)(
            delayed(_fit_member)(features, labels, forest_kind, rule, tree_seed) for tree_seed in seeds
        )
    return Forest(
        kind=forest_kind,
        trees=tuple(trees),
        seed=seed,
        feature_count=int(features.shape[1]),
        split_rule=rule,
    )


def assign_folds(y: IntArray, folds: int, seed: int) -> list[npt.NDArray[np.intp]]:
    """Deterministically partition row indices into ``folds`` held-out sets.

    Stratified when every class has at least ``folds`` members, plain shuffled
    k-fold otherwise.

    Returns:
        list[NDArray]: Held-out row indices for each fold.
    """
    labels = np.asarray(y, dtype=np.int64)
    class_sizes = np.bincount(labels, minlength=N_CLASSES)
    placeholder = np.zeros((labels.shape[0], 1))
    splitter: StratifiedKFold | KFold
    if class_sizes.min() >= folds:
        splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    else:
        splitter = KFold(n_splits=folds, shuffle=True, random_state=seed)
    return [held_out for _, held_out in splitter.split(placeholder, labels)]


def cross_fit_proba(
    X: FloatArray | Sequence[Sequence[float]],
    y: Sequence[int] | IntArray,
    kind: ForestKind | str,
    folds: int = 3,
    seed: int = 0,
    *,
    n_trees: int = DEFAULT_N_TREES,
    split_rule: ExtraTreesSplit | str = ExtraTreesSplit.RANDOM_FEATURE,
    n_jobs: int = 1,
) -> tuple[FloatArray, Forest]:
    """Out-of-fold class probabilities plus a forest fitted on every row.

    Each row is scored by a forest that never saw it. The returned forest is
    the one :func:`fit_forest` builds with the same ``seed`` on all rows.

    Args:
        X (array-like): Training rows.
        y (array-like): Labels in ``{0, 1}``.
        kind (ForestKind | str): Ensemble strategy.
        folds (int): Number of folds, at least 2 and at most ``len(X)``.
        seed (int): Forest seed; fold forests use ``derive_seed(seed, fold + 1)``.
        n_trees (int): Trees per forest.
        split_rule (ExtraTreesSplit | str): Extra-trees split rule.
        n_jobs (int): joblib worker count.

    Returns:
        tuple[NDArray, Forest]: ``(n, 2)`` out-of-fold probabilities and the full forest.

    Raises:
        SplurgeDcfValueError: If ``folds < 2`` or ``folds > len(X)``.
    """
    features, labels = _as_training_arrays(X, y)
    if folds < 2 or folds > features.shape[0]:
        raise SplurgeDcfValueError(
            message=f"folds must be between 2 and the row count {features.shape[0]}, got {folds}",
            details={"param": "folds", "value": str(folds)},
        )

    out_of_fold = np.zeros((features.shape[0], N_CLASSES), dtype=np.float64)
    for fold, held_out in enumerate(assign_folds(labels, folds, seed)):
        train_rows = np.setdiff1d(np.arange(features.shape[0]), held_out, assume_unique=True)
        fold_forest = fit_forest(
            features[train_rows],
            labels[train_rows],
            kind,
            n_trees,
            derive_seed(seed, fold + 1, 0),
            split_rule=split_rule,
            n_jobs=n_jobs,
        )
        out_of_fold[held_out] = fold_forest.predict_proba(features[held_out])

    full = fit_forest(features, labels, kind, n_trees, seed, split_rule=split_rule, n_jobs=n_jobs)
    return out_of_fold, full
