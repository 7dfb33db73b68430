"""Run configuration and its layered sources.

A :class:`RunConfig` is assembled from four sources, lowest precedence first:
dataclass defaults, a flat ``key = value`` config file, ``SPLURGE_DCF_*``
environment variables, and explicit command-line flags. Library modules never
see a ``RunConfig`` directly; they receive the narrower
:class:`PreprocessConfig`, :class:`CascadeConfig` and :class:`BaselineConfig`
derived from it.

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .common_utils import is_empty_or_none, to_enum
from .convnet import Pooling
from .exceptions import SplurgeDcfDataError, SplurgeDcfLookupError, SplurgeDcfValueError
from .forest import ExtraTreesSplit, ForestKind

ENV_PREFIX = "SPLURGE_DCF_"
LEVEL_FOREST_COUNT = 4
DEFAULT_FOREST_KINDS: tuple[ForestKind, ...] = (
    ForestKind.RANDOM_FOREST,
    ForestKind.RANDOM_FOREST,
    ForestKind.EXTRA_TREES,
    ForestKind.EXTRA_TREES,
)

_SECTION = "splurge-dcf"
_TRUE = frozenset({"1", "true", "yes", "on"})
_FALSE = frozenset({"0", "false", "no", "off"})


@dataclass(frozen=True)
class PreprocessConfig:
    """Switches for the text normalisation stages.

    Attributes:
        lowercase: Lowercase the text before tokenising.
        remove_stopwords: Drop tokens found in the stop-word list.
        stem: Apply the Porter stemmer.
        stopwords_path: Custom stop-word file; None uses the shipped English list.
    """

    lowercase: bool = True
    remove_stopwords: bool = True
    stem: bool = True
    stopwords_path: Path | None = None


@dataclass(frozen=True)
class CascadeConfig:
    """Hyperparameters of the convolutional forest cascade."""

    n_filters: int = 64
    kernel_size: int = 2
    embedding_dim: int = 100
    n_trees: int = 100
    epsilon: float = 0.001
    max_levels: int = 10
    folds: int = 3
    cross_fit: bool = True
    smote_k: int = 5
    pooling: Pooling = Pooling.MAX
    forest_kinds: tuple[ForestKind, ...] = DEFAULT_FOREST_KINDS
    extra_trees_split: ExtraTreesSplit = ExtraTreesSplit.RANDOM_FEATURE
    seed: int = 42
    n_jobs: int = 1

    def __post_init__(self) -> None:
        for name in ("n_filters", "kernel_size", "embedding_dim", "n_trees", "max_levels", "smote_k"):
            value = getattr(self, name)
            if value < 1:
                raise SplurgeDcfValueError(
                    message=f"{name} must be >= 1, got {value}",
                    details={"param": name, "value": str(value)},
                )
        if self.folds < 2:
            raise SplurgeDcfValueError(
                message=f"folds must be >= 2, got {self.folds}",
                details={"param": "folds", "value": str(self.folds)},
            )
        if self.epsilon < 0:
            raise SplurgeDcfValueError(
                message=f"epsilon must be non-negative, got {self.epsilon}",
                details={"param": "epsilon", "value": str(self.epsilon)},
            )
        if self.seed < 0:
            raise SplurgeDcfValueError(
                message=f"seed must be non-negative, got {self.seed}",
                details={"param": "seed", "value": str(self.seed)},
            )
        if len(self.forest_kinds) != LEVEL_FOREST_COUNT:
            raise SplurgeDcfValueError(
                message=f"Each level needs exactly {LEVEL_FOREST_COUNT} forests, got {len(self.forest_kinds)}",
                details={"param": "forest_kinds", "value": ",".join(k.value for k in self.forest_kinds)},
            )
        if self.kernel_size > self.n_filters:
            raise SplurgeDcfValueError(
                message=f"kernel_size {self.kernel_size} exceeds n_filters {self.n_filters}; later levels could not convolve",
                details={"param": "kernel_size", "value": str(self.kernel_size)},
            )

    def to_dict(self) -> dict[str, Any]:
        """JSON-compatible representation stored in model file headers."""
        return {
            "n_filters": self.n_filters,
            "kernel_size": self.kernel_size,
            "embedding_dim": self.embedding_dim,
            "n_trees": self.n_trees,
            "epsilon": self.epsilon,
            "max_levels": self.max_levels,
            "folds": self.folds,
            "cross_fit": self.cross_fit,
            "smote_k": self.smote_k,
            "pooling": self.pooling.value,
            "forest_kinds": [kind.value for kind in self.forest_kinds],
            "extra_trees_split": self.extra_trees_split.value,
            "seed": self.seed,
            "n_jobs": self.n_jobs,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> CascadeConfig:
        values = dict(data)
        values["pooling"] = to_enum(Pooling, values.get("pooling", Pooling.MAX.value), param="pooling")
        values["forest_kinds"] = tuple(
            to_enum(ForestKind, kind, param="forest_kinds")
            for kind in values.get("forest_kinds", [k.value for k in DEFAULT_FOREST_KINDS])
        )
        values["extra_trees_split"] = to_enum(
            ExtraTreesSplit,
            values.get("extra_trees_split", ExtraTreesSplit.RANDOM_FEATURE.value),
            param="extra_trees_split",
        )
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise SplurgeDcfLookupError(
                message=f"Unknown cascade configuration keys: {', '.join(unknown)}",
                details={"param": "config", "value": ",".join(unknown)},
            )
        return cls(**values)


@dataclass(frozen=True)
class BaselineConfig:
    """Settings of the manual-feature random forest baseline."""

    n_trees: int = 100
    smote_k: int = 5
    seed: int = 42
    n_jobs: int = 1
    wordlist_path: Path | None = None
    blacklist_path: Path | None = None


@dataclass(frozen=True)
class RunConfig:
    """Every tunable of a command-line run.

    Defaults mirror the reference configuration: 64 filters of kernel size 2,
    100 trees per forest, an 80/10/10 split and seed 42.
    """

    dataset: Path | None = None
    embeddings: Path | None = None
    model: Path | None = None
    report: Path | None = None
    wordlist: Path | None = None
    blacklist: Path | None = None
    stopwords: Path | None = None
    seed: int = 42
    n_filters: int = 64
    kernel_size: int = 2
    embedding_dim: int = 100
    n_trees: int = 100
    epsilon: float = 0.001
    max_levels: int = 10
    folds: int = 3
    cross_fit: bool = True
    smote_k: int = 5
    train_ratio: float = 0.8
    validation_ratio: float = 0.1
    test_ratio: float = 0.1
    pooling: Pooling = Pooling.MAX
    forest_kinds: tuple[ForestKind, ...] = field(default=DEFAULT_FOREST_KINDS)
    extra_trees_split: ExtraTreesSplit = ExtraTreesSplit.RANDOM_FEATURE
    lowercase: bool = True
    remove_stopwords: bool = True
    stem: bool = True
    baseline: bool = False
    n_jobs: int = 1

    @property
    def ratios(self) -> tuple[float, float, float]:
        return (self.train_ratio, self.validation_ratio, self.test_ratio)

    def preprocess_config(self) -> PreprocessConfig:
        return PreprocessConfig(
            lowercase=self.lowercase,
            remove_stopwords=self.remove_stopwords,
            stem=self.stem,
            stopwords_path=self.stopwords,
        )

    def cascade_config(self) -> CascadeConfig:
        return CascadeConfig(
            n_filters=self.n_filters,
            kernel_size=self.kernel_size,
            embedding_dim=self.embedding_dim,
            n_trees=self.n_trees,
            epsilon=self.epsilon,
            max_levels=self.max_levels,
            folds=self.folds,
            cross_fit=self.cross_fit,
            smote_k=self.smote_k,
            pooling=self.pooling,
            forest_kinds=self.forest_kinds,
            extra_trees_split=self.extra_trees_split,
            seed=self.seed,
            n_jobs=self.n_jobs,
        )

    def baseline_config(self) -> BaselineConfig:
        return BaselineConfig(
            n_trees=self.n_trees,
            smote_k=self.smote_k,
            seed=self.seed,
            n_jobs=self.n_jobs,
            wordlist_path=self.wordlist,
            blacklist_path=self.blacklist,
        )

    def to_header(self) -> dict[str, Any]:
        """Model-relevant settings stored in the model file header.

        Data and output paths are left out. The stop-word list path is kept
        (None for the shipped list) because it changes preprocessing.
        """
        return {
            "cascade": self.cascade_config().to_dict(),
            "preprocess": {
                "lowercase": self.lowercase,
                "remove_stopwords": self.remove_stopwords,
                "stem": self.stem,
                "stopwords": None if self.stopwords is None else str(self.stopwords),
            },
            "split": {
                "seed": self.seed,
                "train_ratio": self.train_ratio,
                "validation_ratio": self.validation_ratio,
                "test_ratio": self.test_ratio,
            },
        }


FIELD_NAMES: frozenset[str] = frozenset(f.name for f in dataclasses.fields(RunConfig))
_FIELD_TYPES: dict[str, Any] = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce_bool(key: str, raw: str) -> bool:
    text = raw.strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise SplurgeDcfValueError(
        message=f"Invalid boolean for '{key}': {raw!r}",
        details={"param": key, "value": raw},
    )


def coerce_value(key: str, raw: Any) -> Any:
    """Convert a raw configuration value to the type of the ``RunConfig`` field.

    Non-string values are assumed to be already typed and pass through, except
    that forest kinds given as a list are converted to a tuple of members.

    Args:
        key (str): Field name.
        raw (Any): Raw value, usually a string from a file or the environment.

    Returns:
        Any: The coerced value.

    Raises:
        SplurgeDcfLookupError: If ``key`` is not a configuration field or an
            enumeration value is unknown.
        SplurgeDcfValueError: If the value cannot be parsed.
    """
    if key not in FIELD_NAMES:
        raise SplurgeDcfLookupError(
            message=f"Unknown configuration key '{key}'",
            details={"param": "key", "value": key},
        )
    annotation = str(_FIELD_TYPES[key])

    if key == "forest_kinds":
        items = raw.split(",") if isinstance(raw, str) else list(raw)
        return tuple(to_enum(ForestKind, item, param=key) for item in items if not is_empty_or_none(item))
    if key == "pooling":
        return to_enum(Pooling, raw, param=key)
    if key == "extra_trees_split":
        return to_enum(ExtraTreesSplit, raw, param=key)
    if not isinstance(raw, str):
        return raw
    if annotation.startswith("Path"):
        return None if is_empty_or_none(raw) else Path(raw.strip()).expanduser()
    if annotation == "bool":
        return _coerce_bool(key, raw)
    try:
        if annotation == "int":
            return int(raw.strip())
        if annotation == "float":
            return float(raw.strip())
    except ValueError as e:
        raise SplurgeDcfValueError(
            message=f"Invalid {annotation} for '{key}': {raw!r}",
            details={"param": key, "value": raw},
        ) from e
    return raw


def parse_config_file(path: str | os.PathLike[str]) -> dict[str, str]:
    """Read a flat ``key = value`` configuration file.

    Blank lines and lines starting with ``#`` or ``;`` are ignored. Keys are
    normalised to lower case with dashes turned into underscores.

    Args:
        path (str | PathLike): Configuration file.

    Returns:
        dict[str, str]: Raw values keyed by field name.

    Raises:
        SplurgeDcfDataError: If the file cannot be read.
        SplurgeDcfValueError: If a line has no ``=``.
    """
    config_path = Path(path)
    try:
        text = config_path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise SplurgeDcfDataError(
            message=f"Config file not found: {config_path}",
            error_code="file-not-found",
            details={"path": str(config_path)},
        ) from e
    except (OSError, UnicodeDecodeError) as e:
        raise SplurgeDcfDataError(
            message=f"Cannot read config file {config_path}: {e}",
            details={"path": str(config_path)},
        ) from e

    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith(("#", ";")) and "=" not in stripped:
            raise SplurgeDcfValueError(
                message=f"Line {number}: expected 'key = value', got {stripped!r}",
                error_code="malformed-line",
                details={"path": str(config_path), "line": str(number)},
            )

    parser = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read_string(f"[{_SECTION}]\n{text}", source=str(config_path))
    except configparser.Error as e:
        raise SplurgeDcfValueError(
            message=f"Invalid config file {config_path}: {e}",
            details={"path": str(config_path)},
        ) from e
    return {_normalise_key(key): value for key, value in parser.items(_SECTION)}


def _normalise_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def env_overrides(environ: Mapping[str, str] | None = None) -> dict[str, str]:
    """Collect ``SPLURGE_DCF_*`` environment variables.

    Variables whose suffix is not a configuration key (for example
    ``SPLURGE_DCF_UCI_DATASET`` used by the acceptance tests) are ignored.

    Args:
        environ (Mapping[str, str] | None): Environment; defaults to ``os.environ``.

    Returns:
        dict[str, str]: Raw values keyed by field name.
    """
    source = os.environ if environ is None else environ
    values: dict[str, str] = {}
    for name, value in source.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = _normalise_key(name[len(ENV_PREFIX) :])
        if key in FIELD_NAMES:
            values[key] = value
    return values


def build_run_config(
    file_values: Mapping[str, Any] | None = None,
    env_values: Mapping[str, Any] | None = None,
    flag_values: Mapping[str, Any] | None = None,
) -> RunConfig:
    """Layer configuration sources into a validated :class:`RunConfig`.

    Precedence is defaults < file < environment < flags. Flag values of None
    mean "not given" and do not override lower layers.

    Raises:
        SplurgeDcfLookupError: For unknown keys.
        SplurgeDcfValueError: For unparsable or invalid values.
    """
    merged: dict[str, Any] = {}
    for layer in (file_values, env_values, flag_values):
        for key, raw in (layer or {}).items():
            if raw is None:
                continue
            normalised = _normalise_key(key)
            merged[normalised] = coerce_value(normalised, raw)

    config = RunConfig(**merged)
    ratio_total = config.train_ratio + config.validation_ratio + config.test_ratio
    if abs(ratio_total - 1.0) > 1e-9 or min(config.ratios) < 0:
        raise SplurgeDcfValueError(
            message=f"Split ratios must be non-negative and sum to 1, got {config.ratios}",
            details={"param": "ratios", "value": str(config.ratios)},
        )
    config.cascade_config()
    return config
