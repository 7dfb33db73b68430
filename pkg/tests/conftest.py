"""Shared fixtures: a small synthetic SMS corpus with matching word vectors.

Spam messages draw mostly from a spam vocabulary and ham messages from a ham
vocabulary; the two vocabularies get word vectors around opposite base
directions, so a tiny cascade separates them reliably.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from splurge_dcf.cascade import CascadeModel, TrainReport, train_cascade
from splurge_dcf.config import CascadeConfig
from splurge_dcf.corpus import DatasetSplit, RawMessage, TokenizedMessage, preprocess, split_dataset, tokenize_messages
from splurge_dcf.embedding import EmbeddingTable, load_embeddings

SPAM_WORDS = ("win", "cash", "prize", "claim", "free", "urgent", "offer", "reward", "txt", "mobile")
HAM_WORDS = ("home", "dinner", "meet", "tomorrow", "love", "movie", "lunch", "sleep", "mum", "class")
EMBEDDING_DIM = 8
HAM_COUNT = 60
SPAM_COUNT = 24


def _synthetic_messages(seed: int = 7) -> list[RawMessage]:
    rng = np.random.default_rng(seed)
    messages: list[RawMessage] = []
    for label, own, other, count in ((0, HAM_WORDS, SPAM_WORDS, HAM_COUNT), (1, SPAM_WORDS, HAM_WORDS, SPAM_COUNT)):
        for _ in range(count):
            words = list(rng.choice(own, size=int(rng.integers(3, 7))))
            if rng.random() < 0.2:
                words.append(str(rng.choice(other)))
            messages.append(RawMessage(label=label, text=" ".join(words).capitalize() + "!"))
    order = rng.permutation(len(messages))
    return [messages[int(i)] for i in order]


def _embedding_lines(seed: int = 11) -> list[str]:
    rng = np.random.default_rng(seed)
    ham_base = np.array([1.0] * (EMBEDDING_DIM // 2) + [0.0] * (EMBEDDING_DIM // 2))
    spam_base = ham_base[::-1].copy()
    lines = []
    for base, words in ((ham_base, HAM_WORDS), (spam_base, SPAM_WORDS)):
        for word in words:
            (key,) = preprocess(word)
            vector = base + rng.normal(0.0, 0.1, size=EMBEDDING_DIM)
            lines.append(" ".join([key, *(f"{value:.6f}" for value in vector)]))
    return lines


@pytest.fixture(scope="session")
def raw_messages() -> list[RawMessage]:
    return _synthetic_messages()


@pytest.fixture(scope="session")
def tokenized_messages(raw_messages: list[RawMessage]) -> list[TokenizedMessage]:
    return tokenize_messages(raw_messages)


@pytest.fixture(scope="session")
def dataset_split(tokenized_messages: list[TokenizedMessage]) -> DatasetSplit:
    return split_dataset(tokenized_messages, (0.7, 0.15, 0.15), seed=5)


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory: pytest.TempPathFactory, raw_messages: list[RawMessage]) -> Path:
    directory = tmp_path_factory.mktemp("data")
    labels = {0: "ham", 1: "spam"}
    (directory / "sms.tsv").write_text(
        "".join(f"{labels[m.label]}\t{m.text}\n" for m in raw_messages),
        encoding="utf-8",
    )
    (directory / "vectors.txt").write_text("\n".join(_embedding_lines()) + "\n", encoding="utf-8")
    return directory


@pytest.fixture(scope="session")
def dataset_file(data_dir: Path) -> Path:
    return data_dir / "sms.tsv"


@pytest.fixture(scope="session")
def embeddings_file(data_dir: Path) -> Path:
    return data_dir / "vectors.txt"


@pytest.fixture(scope="session")
def embedding_table(embeddings_file: Path) -> EmbeddingTable:
    return load_embeddings(embeddings_file, EMBEDDING_DIM)


@pytest.fixture(scope="session")
def small_config() -> CascadeConfig:
    return CascadeConfig(
        n_filters=6,
        kernel_size=2,
        embedding_dim=EMBEDDING_DIM,
        n_trees=5,
        epsilon=0.001,
        max_levels=3,
        folds=3,
        smote_k=3,
        seed=3,
    )


@pytest.fixture(scope="session")
def trained(
    dataset_split: DatasetSplit, small_config: CascadeConfig, embedding_table: EmbeddingTable
) -> tuple[CascadeModel, TrainReport]:
    return train_cascade(dataset_split, small_config, embedding_table)


@pytest.fixture(scope="session")
def trained_model(trained: tuple[CascadeModel, TrainReport]) -> CascadeModel:
    return trained[0]
