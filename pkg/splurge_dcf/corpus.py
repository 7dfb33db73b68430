"""Labeled SMS corpus loading, text normalisation and dataset splitting.

The corpus file uses the UCI SMS Spam Collection layout: one message per line,
``ham`` or ``spam``, a tab, then the message text. Normalisation lowercases,
splits on anything that is not a letter, drops stop-words and applies the
original Porter stemmer. Splits are a seeded shuffle followed by contiguous
train/validation/test slices.

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from __future__ import annotations

import logging
import math
import os
import re
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from nltk.stem.porter import PorterStemmer

from .common_utils import read_word_list
from .config import PreprocessConfig
from .exceptions import SplurgeDcfDataError, SplurgeDcfValueError

logger = logging.getLogger(__name__)

HAM = 0
SPAM = 1
LABEL_NAMES: dict[int, str] = {HAM: "ham", SPAM: "spam"}
LABEL_VALUES: dict[str, int] = {name: value for value, name in LABEL_NAMES.items()}
DEFAULT_RATIOS: tuple[float, float, float] = (0.8, 0.1, 0.1)

# Letters only: digits, underscores and punctuation all end a token.
_TOKEN_PATTERN = re.compile(r"[^\W\d_]+")
_RATIO_TOLERANCE = 1e-9
_STEMMER = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


@dataclass(frozen=True)
class RawMessage:
    """One labeled message as read from the corpus file.

    Attributes:
        label: 0 for ham, 1 for spam.
        text: Message text without the label column; never blank.
    """

    label: int
    text: str

    def __post_init__(self) -> None:
        if self.label not in LABEL_NAMES:
            raise SplurgeDcfValueError(
                message=f"Label must be 0 (ham) or 1 (spam), got {self.label}",
                details={"param": "label", "value": str(self.label)},
            )
        if not self.text.strip():
            raise SplurgeDcfDataError(
                message="Message text is empty",
                error_code="empty-text",
                details={"param": "text", "value": repr(self.text)},
            )


@dataclass(frozen=True)
class TokenizedMessage:
    """A labeled message after normalisation.

    Attributes:
        label: 0 for ham, 1 for spam.
        tokens: Normalised tokens in message order.
        text: The original text, kept for the manual-feature baseline.
    """

    label: int
    tokens: tuple[str, ...]
    text: str = ""


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train, validation and test partitions of a corpus."""

    train: tuple[TokenizedMessage, ...]
    validation: tuple[TokenizedMessage, ...]
    test: tuple[TokenizedMessage, ...]
    seed: int

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (len(self.train), len(self.validation), len(self.test))

    def subset(self, name: str) -> tuple[TokenizedMessage, ...]:
        """Return ``train``, ``validation``, ``test`` or ``all`` (in that order)."""
        if name == "all":
            return self.train + self.validation + self.test
        if name not in ("train", "validation", "test"):
            raise SplurgeDcfValueError(
                message=f"Unknown subset '{name}'",
                details={"param": "subset", "value": name},
            )
        return getattr(self, name)  # type: ignore[no-any-return]


def load_dataset(path: str | os.PathLike[str]) -> list[RawMessage]:
    """Load a tab-separated ``label<TAB>text`` corpus.

    Blank lines are skipped. Only the first tab separates the label; the rest of
    the line is the message text.

    Args:
        path (str | PathLike): Corpus file, UTF-8.

    Returns:
        list[RawMessage]: Messages in file order.

    Raises:
        SplurgeDcfDataError: If the file is missing or unreadable, or a line has
            no tab, an unknown label or empty text (the error names the line
            number).
    """
    dataset_path = Path(path)
    try:
        text = dataset_path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise SplurgeDcfDataError(
            message=f"Dataset file not found: {dataset_path}",
            error_code="file-not-found",
            details={"path": str(dataset_path)},
        ) from e
    except (OSError, UnicodeDecodeError) as e:
        raise SplurgeDcfDataError(
            message=f"Cannot read dataset file {dataset_path}: {e}",
            details={"path": str(dataset_path)},
        ) from e

    messages: list[RawMessage] = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        label_text, tab, body = line.partition("\t")
        label = LABEL_VALUES.get(label_text.strip().lower())
        if not tab or label is None:
            raise SplurgeDcfDataError(
                message=f"Line {number}: expected 'ham<TAB>text' or 'spam<TAB>text'",
                error_code="malformed-line",
                details={"path": str(dataset_path), "line": str(number)},
            )
        try:
            messages.append(RawMessage(label=label, text=body))
        except SplurgeDcfDataError as e:
            raise SplurgeDcfDataError(
                message=f"Line {number}: message text is empty",
                error_code="malformed-line",
                details={"path": str(dataset_path), "line": str(number)},
            ) from e

    spam = sum(message.label for message in messages)
    logger.info("Loaded %d messages (%d ham, %d spam) from %s", len(messages), len(messages) - spam, spam, dataset_path)
    return messages


@lru_cache(maxsize=8)
def _stopwords(path: Path | None) -> frozenset[str]:
    return read_word_list(path, packaged="stopwords_en.txt")


@lru_cache(maxsize=65536)
def _stem(token: str, lowercase: bool) -> str:
    return str(_STEMMER.stem(token, to_lowercase=lowercase))


def preprocess(text: str, config: PreprocessConfig | None = None) -> list[str]:
    """Normalise message text into tokens.

    Stages, each switchable through ``config``: lowercase, split on non-letters,
    stop-word removal, Porter stemming.

    Args:
        text (str): Message text.
        config (PreprocessConfig | None): Stage switches; None enables all.

    Returns:
        list[str]: Tokens in message order (possibly empty).
    """
    settings = config or PreprocessConfig()
    if settings.lowercase:
        text = text.lower()
    tokens = _TOKEN_PATTERN.findall(text)
    if settings.remove_stopwords:
        stopwords = _stopwords(settings.stopwords_path)
        tokens = [token for token in tokens if token.lower() not in stopwords]
    if settings.stem:
        tokens = [_stem(token, settings.lowercase) for token in tokens]
    return [token for token in tokens if token]


def tokenize_messages(
    messages: Sequence[RawMessage],
    config: PreprocessConfig | None = None,
) -> list[TokenizedMessage]:
    """Apply :func:`preprocess` to every message, keeping labels and raw text."""
    return [
        TokenizedMessage(label=message.label, tokens=tuple(preprocess(message.text, config)), text=message.text)
        for message in messages
    ]


def split_sizes(total: int, ratios: Sequence[float]) -> tuple[int, int, int]:
    """Partition sizes: floor for train, then floor for validation, rest to test."""
    train = math.floor(total * ratios[0] + _RATIO_TOLERANCE)
    validation = math.floor(total * ratios[1] + _RATIO_TOLERANCE)
    return (train, validation, total - train - validation)


def split_dataset(
    messages: Sequence[TokenizedMessage],
    ratios: Sequence[float] = DEFAULT_RATIOS,
    seed: int = 42,
) -> DatasetSplit:
    """Shuffle deterministically and cut into train, validation and test.

    Args:
        messages (Sequence[TokenizedMessage]): Non-empty corpus.
        ratios (Sequence[float]): Train, validation and test fractions.
        seed (int): Shuffle seed.

    Returns:
        DatasetSplit: The partition; the same seed always gives the same split.

    Raises:
        SplurgeDcfValueError: If the corpus is empty or the ratios are not
            three non-negative numbers summing to 1.
    """
    if not messages:
        raise SplurgeDcfValueError(
            message="Cannot split an empty corpus",
            details={"param": "messages", "value": "0"},
        )
    if len(ratios) != 3 or min(ratios) < 0 or abs(sum(ratios) - 1.0) > _RATIO_TOLERANCE:
        raise SplurgeDcfValueError(
            message=f"Split ratios must be three non-negative numbers summing to 1, got {tuple(ratios)}",
            details={"param": "ratios", "value": str(tuple(ratios))},
        )

    order = np.random.default_rng(seed).permutation(len(messages))
    shuffled = tuple(messages[int(index)] for index in order)
    train, validation, _ = split_sizes(len(messages), ratios)
    split = DatasetSplit(
        train=shuffled[:train],
        validation=shuffled[train : train + validation],
        test=shuffled[train + validation :],
        seed=seed,
    )
    logger.info("Split %d messages into %d / %d / %d", len(messages), *split.sizes)
    return split
