"""Hand-crafted message features and the random forest baseline built on them.

Ten features are extracted from the raw message text: length and word counts,
a Flesch Reading Ease score, a misspelling count against a wordlist,
counts of e-mail addresses, phone numbers, IPv4 addresses and URLs, a currency
symbol flag and a URL blacklist flag. The patterns below are fixed so the
baseline is reproducible:

* e-mail: ``local@domain.tld``
* phone: 10 to 14 digits, optionally separated by single spaces, dots or
  dashes, optionally prefixed with ``+``
* IPv4: four dot-separated groups of 1-3 digits, each at most 255
* URL: ``http://``, ``https://`` or ``www.`` followed by non-space characters
* syllables: runs of ``[aeiouy]`` in a word, at least one per word
* sentences: runs of ``.``, ``!`` or ``?``, at least one per text
* misspelling: a lowercase letter run is known when it is a wordlist entry or
  its Porter stem is the stem of one, so inflections of listed words count. The shipped list is a short
  everyday English and SMS shorthand vocabulary, so the count is an
  approximation; pass ``--wordlist`` with a full dictionary for a stricter one.

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Sequence
from dataclasses import astuple, dataclass, fields
from functools import lru_cache
from pathlib import Path
from urllib.parse import urlsplit

import numpy as np
import numpy.typing as npt
from nltk.stem.porter import PorterStemmer

from .balance import smote_balance
from .common_utils import derive_seed, read_word_list
from .config import BaselineConfig
from .corpus import DatasetSplit, TokenizedMessage
from .exceptions import SplurgeDcfValueError
from .forest import Forest, ForestKind, fit_forest
from .metrics import EvalReport, evaluate_classifier

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

CURRENCY_SYMBOLS = frozenset("$£€")

EMAIL_PATTERN = re.compile(r"[\w.+-]+@[\w-]+(?:\.[\w-]+)*\.[a-zA-Z]{2,}")
PHONE_PATTERN = re.compile(r"(?<![\w+])\+?\d(?:[ .-]?\d){9,13}(?!\w)")
IP_PATTERN = re.compile(r"(?<![\d.])(?:(?:25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)\.){3}(?:25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)(?![\d.]\d)")
URL_PATTERN = re.compile(r"(?:https?://|www\.)[^\s<>\"']+", re.IGNORECASE)
_WORD_PATTERN = re.compile(r"[^\W\d_]+")
_VOWEL_GROUP = re.compile(r"[aeiouy]+")
_SENTENCE_END = re.compile(r"[.!?]+")

FLESCH_BASE = 206.835
FLESCH_SENTENCE_WEIGHT = 1.015
FLESCH_SYLLABLE_WEIGHT = 84.6
_STEMMER = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
SMOTE_SLOT = 1
FOREST_SLOT = 2


@dataclass(frozen=True)
class ManualFeatures:
    """The ten hand-crafted features of one message, in vector order."""

    characters_count: int
    words_count: int
    readability_score: float
    misspelled_count: int
    emails_count: int
    phones_count: int
    is_currency_found: int
    ip_address_count: int
    urls_count: int
    has_blacklist_url: int

    def to_vector(self) -> FloatArray:
        return np.array(astuple(self), dtype=np.float64)


FEATURE_NAMES: tuple[str, ...] = tuple(f.name for f in fields(ManualFeatures))


@lru_cache(maxsize=8)
def _wordlist(path: Path | None) -> frozenset[str]:
    return read_word_list(path, packaged="wordlist_en.txt")


@lru_cache(maxsize=8)
def _wordlist_stems(path: Path | None) -> frozenset[str]:
    return frozenset(_STEMMER.stem(word) for word in _wordlist(path))


def _is_known(word: str, wordlist: frozenset[str], stems: frozenset[str]) -> bool:
    return word in wordlist or _STEMMER.stem(word) in stems


@lru_cache(maxsize=8)
def _blacklist(path: Path | None) -> frozenset[str]:
    return read_word_list(path, packaged="blacklist_hosts.txt")


def count_syllables(word: str) -> int:
    """Vowel-group syllable estimate, never below one."""
    return max(1, len(_VOWEL_GROUP.findall(word.lower())))


def flesch_reading_ease(text: str) -> float:
    """Flesch Reading Ease of ``text``; 0.0 when it has no words.

    ``206.835 - 1.015 * words / sentences - 84.6 * syllables / words`` with
    whitespace-delimited words and the heuristics in the module docstring.
    """
    words = text.split()
    if not words:
        return 0.0
    sentences = max(1, len(_SENTENCE_END.findall(text)))
    syllables = sum(count_syllables(word) for word in words)
    return FLESCH_BASE - FLESCH_SENTENCE_WEIGHT * (len(words) / sentences) - FLESCH_SYLLABLE_WEIGHT * (syllables / len(words))


def url_host(url: str) -> str:
    """Lower-case host of a matched URL (scheme optional)."""
    target = url if "://" in url else f"http://{url}"
    return (urlsplit(target).hostname or "").lower()


def extract_manual_features(
    text: str,
    *,
    wordlist_path: Path | None = None,
    blacklist_path: Path | None = None,
) -> ManualFeatures:
    """Extract the ten manual features from raw message text.

    Args:
        text (str): Message text.
        wordlist_path (Path | None): Spelling wordlist; None uses the shipped list.
        blacklist_path (Path | None): URL host blacklist; None uses the shipped
            (empty) list.

    Returns:
        ManualFeatures: The feature record.
    """
    wordlist = _wordlist(wordlist_path)
    stems = _wordlist_stems(wordlist_path)
    blacklist = _blacklist(blacklist_path)
    urls = URL_PATTERN.findall(text)
    hosts = {url_host(url) for url in urls}
    hosts |= {host.removeprefix("www.") for host in hosts}
    misspelled = sum(
        1 for token in text.split() for word in _WORD_PATTERN.findall(token.lower())
        if not _is_known(word, wordlist, stems)
    )
    return ManualFeatures(
        characters_count=len(text),
        words_count=len(text.split()),
        readability_score=flesch_reading_ease(text),
        misspelled_count=misspelled,
        emails_count=len(EMAIL_PATTERN.findall(text)),
        phones_count=len(PHONE_PATTERN.findall(text)),
        is_currency_found=int(any(symbol in text for symbol in CURRENCY_SYMBOLS)),
        ip_address_count=len(IP_PATTERN.findall(text)),
        urls_count=len(urls),
        has_blacklist_url=int(bool(hosts & blacklist)),
    )


def manual_feature_matrix(
    texts: Sequence[str],
    *,
    wordlist_path: Path | None = None,
    blacklist_path: Path | None = None,
) -> FloatArray:
    """Stack manual feature vectors, shape ``(len(texts), 10)``."""
    if not texts:
        return np.zeros((0, len(FEATURE_NAMES)), dtype=np.float64)
    return np.vstack(
        [
            extract_manual_features(text, wordlist_path=wordlist_path, blacklist_path=blacklist_path).to_vector()
            for text in texts
        ]
    )


def _texts(messages: Sequence[TokenizedMessage]) -> list[str]:
    return [message.text for message in messages]


def train_baseline(split: DatasetSplit, config: BaselineConfig | None = None) -> tuple[Forest, EvalReport]:
    """Train the manual-feature random forest and evaluate it on the test set.

    Args:
        split (DatasetSplit): Corpus partition; the raw texts are used.
        config (BaselineConfig | None): Settings; None uses the defaults.

    Returns:
        tuple[Forest, EvalReport]: The forest and its test-set report.

    Raises:
        SplurgeDcfValueError: If the training set is single-class or the test
            set is empty.
    """
    settings = config or BaselineConfig()
    if not split.test:
        raise SplurgeDcfValueError(
            message="Baseline evaluation needs a non-empty test set",
            details={"param": "test", "value": "0"},
        )
    paths = {"wordlist_path": settings.wordlist_path, "blacklist_path": settings.blacklist_path}
    X_train = manual_feature_matrix(_texts(split.train), **paths)
    y_train = np.array([message.label for message in split.train], dtype=np.int64)
    balanced = smote_balance(X_train, y_train, settings.smote_k, derive_seed(settings.seed, 0, SMOTE_SLOT))
    forest = fit_forest(
        balanced.X,
        balanced.y,
        ForestKind.RANDOM_FOREST,
        settings.n_trees,
        derive_seed(settings.seed, 0, FOREST_SLOT),
        n_jobs=settings.n_jobs,
    )

    X_test = manual_feature_matrix(_texts(split.test), **paths)
    y_test = [message.label for message in split.test]
    report = evaluate_classifier(forest, X_test, y_test, label="baseline (manual features + random forest)")
    logger.info("Baseline test accuracy %.4f", report.accuracy)
    return forest, report
