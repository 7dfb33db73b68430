"""Splurge DCF Library.

A convolutional forest cascade for SMS spam detection: random-filter
convolution over word embeddings feeding self-growing levels of random
forests and extremely randomized trees.

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from __future__ import annotations

__version__ = "2025.1.0"

# Balancing
from .balance import BalancedSet, smote_balance

# Baseline
from .baseline import ManualFeatures, extract_manual_features, train_baseline

# Cascade
from .cascade import (
    CascadeLevel,
    CascadeModel,
    StopReason,
    TrainReport,
    level_input,
    predict_message,
    predict_messages,
    train_cascade,
)

# Utility functions
from .common_utils import atomic_write_bytes, atomic_write_text, derive_seed, ensure_minimum_rows

# Configuration
from .config import BaselineConfig, CascadeConfig, PreprocessConfig, RunConfig, build_run_config

# Feature extraction
from .convnet import (
    FilterBank,
    Pooling,
    convolve,
    extract_features,
    global_max_pool,
    init_filter_bank,
    relu,
    update_features,
)

# Corpus
from .corpus import DatasetSplit, RawMessage, TokenizedMessage, load_dataset, preprocess, split_dataset
from .embedding import EmbeddingTable, build_word_matrix, load_embeddings

# Exceptions
from .exceptions import (
    SplurgeDcfDataError,
    SplurgeDcfError,
    SplurgeDcfLookupError,
    SplurgeDcfModelError,
    SplurgeDcfTypeError,
    SplurgeDcfValueError,
)

# Forests
from .forest import (
    ClassProbabilities,
    DecisionTree,
    ExtraTreesSplit,
    Forest,
    ForestKind,
    TreeNode,
    cross_fit_proba,
    fit_forest,
    fit_tree,
    gini_impurity,
    predict_proba,
)

# Metrics
from .metrics import ConfusionMatrix, EvalReport, compute_metrics, evaluate, evaluate_classifier, log_loss, roc_auc

# Persistence
from .model_file import load_model, save_model

# Protocols
from .protocols import ProbabilisticClassifier

__all__ = [
    # Version
    "__version__",
    # Corpus and embeddings
    "RawMessage",
    "TokenizedMessage",
    "DatasetSplit",
    "load_dataset",
    "preprocess",
    "split_dataset",
    "EmbeddingTable",
    "load_embeddings",
    "build_word_matrix",
    # Feature extraction
    "FilterBank",
    "Pooling",
    "init_filter_bank",
    "convolve",
    "relu",
    "global_max_pool",
    "extract_features",
    "update_features",
    # Forests
    "ForestKind",
    "ExtraTreesSplit",
    "TreeNode",
    "DecisionTree",
    "Forest",
    "ClassProbabilities",
    "gini_impurity",
    "fit_tree",
    "fit_forest",
    "predict_proba",
    "cross_fit_proba",
    # Balancing
    "BalancedSet",
    "smote_balance",
    # Cascade
    "CascadeLevel",
    "CascadeModel",
    "StopReason",
    "TrainReport",
    "train_cascade",
    "level_input",
    "predict_message",
    "predict_messages",
    "save_model",
    "load_model",
    # Metrics
    "ConfusionMatrix",
    "EvalReport",
    "compute_metrics",
    "roc_auc",
    "log_loss",
    "evaluate",
    "evaluate_classifier",
    # Baseline
    "ManualFeatures",
    "extract_manual_features",
    "train_baseline",
    # Configuration
    "PreprocessConfig",
    "CascadeConfig",
    "BaselineConfig",
    "RunConfig",
    "build_run_config",
    # Protocols
    "ProbabilisticClassifier",
    # Utilities
    "derive_seed",
    "ensure_minimum_rows",
    "atomic_write_bytes",
    "atomic_write_text",
    # Exceptions
    "SplurgeDcfError",
    "SplurgeDcfTypeError",
    "SplurgeDcfValueError",
    "SplurgeDcfLookupError",
    "SplurgeDcfDataError",
    "SplurgeDcfModelError",
]
