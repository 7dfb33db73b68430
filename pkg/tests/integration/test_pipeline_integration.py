"""
Integration tests for splurge_dcf package.

Tests data flow from corpus and vector files through training, persistence
and prediction.
"""

import dataclasses
from pathlib import Path

import numpy as np

from splurge_dcf.baseline import train_baseline
from splurge_dcf.cascade import predict_messages, train_cascade, word_matrices
from splurge_dcf.config import BaselineConfig, build_run_config
from splurge_dcf.convnet import extract_feature_matrix
from splurge_dcf.corpus import load_dataset, split_dataset, tokenize_messages
from splurge_dcf.embedding import load_embeddings
from splurge_dcf.model_file import encode_model, load_model, save_model


class TestFilePipeline:
    """Test the file-to-prediction pipeline."""

    def test_files_to_saved_model(self, dataset_file: Path, embeddings_file: Path, small_config, tmp_path: Path):
        """Test loading, training, saving and reloading from files."""
        messages = tokenize_messages(load_dataset(dataset_file))
        vocabulary = {token for message in messages for token in message.tokens}
        table = load_embeddings(embeddings_file, small_config.embedding_dim, vocabulary=vocabulary)
        split = split_dataset(messages, (0.7, 0.15, 0.15), seed=5)

        model, report = train_cascade(split, small_config, table, metadata={"source": "integration"})
        loaded = load_model(save_model(model, tmp_path / "dcf.model"))

        before = predict_messages(model, split.test, table)
        after = predict_messages(loaded, split.test, table)
        assert np.array_equal(before[0], after[0])
        assert np.array_equal(before[1], after[1])
        assert loaded.metadata["source"] == "integration"
        assert report.level_count == len(loaded.levels)

    def test_run_config_drives_training(self, dataset_split, embedding_table):
        """Test a layered run configuration feeds the cascade."""
        config = build_run_config(
            {"n_filters": "6", "embedding_dim": "8", "n_trees": "3"},
            {"max_levels": "2"},
            {"smote_k": 3, "seed": 11},
        )
        model, _ = train_cascade(dataset_split, config.cascade_config(), embedding_table, metadata=config.to_header())
        assert model.config.seed == 11
        assert model.metadata["split"]["seed"] == 11


class TestDeterminism:
    """Test reproducibility of training."""

    def test_same_seed_same_bytes(self, dataset_split, small_config, embedding_table, trained_model):
        """Test retraining with the same seed gives a byte-identical model."""
        model, _ = train_cascade(dataset_split, small_config, embedding_table)
        assert encode_model(model) == encode_model(trained_model)

    def test_different_seed_different_model(self, dataset_split, small_config, embedding_table, trained_model):
        """Test another seed changes the filters."""
        model, _ = train_cascade(dataset_split, dataclasses.replace(small_config, seed=4), embedding_table)
        assert not np.array_equal(model.levels[0].bank.weights, trained_model.levels[0].bank.weights)

    def test_parallel_fitting_same_predictions(self, dataset_split, small_config, embedding_table, trained_model):
        """Test joblib workers do not change the model's predictions."""
        model, _ = train_cascade(dataset_split, dataclasses.replace(small_config, n_jobs=2), embedding_table)
        messages = dataset_split.subset("all")
        assert np.array_equal(
            predict_messages(model, messages, embedding_table)[1],
            predict_messages(trained_model, messages, embedding_table)[1],
        )


class TestSingleLevel:
    """Test a one-level cascade against its parts."""

    def test_equals_average_of_four_forests(self, dataset_split, small_config, embedding_table):
        """Test the spam score is the mean of the four forests' spam probabilities."""
        model, _ = train_cascade(dataset_split, dataclasses.replace(small_config, max_levels=1), embedding_table)
        (level,) = model.levels
        matrices = word_matrices(dataset_split.test, embedding_table, small_config.kernel_size)
        features = extract_feature_matrix(matrices, level.bank)
        expected_spam = np.mean([forest.predict_proba(features)[:, 1] for forest in level.forests], axis=0)
        expected_ham = np.mean([forest.predict_proba(features)[:, 0] for forest in level.forests], axis=0)

        labels, p_spam = predict_messages(model, dataset_split.test, embedding_table)
        assert np.allclose(p_spam, expected_spam, atol=1e-12)
        assert np.array_equal(labels, np.where(expected_ham > expected_spam, 0, 1))


class TestBaselineAlongsideCascade:
    """Test the baseline on the cascade's split."""

    def test_same_split_same_test_size(self, dataset_split, trained_model, embedding_table):
        """Test both evaluations cover the same test messages."""
        _, report = train_baseline(dataset_split, BaselineConfig(n_trees=3, smote_k=3))
        labels, _ = predict_messages(trained_model, dataset_split.test, embedding_table)
        assert report.confusion.total == labels.shape[0] == len(dataset_split.test)


class TestProbeMessages:
    """Test persistence on a larger batch of generated messages."""

    def test_hundred_probes_identical_after_reload(self, trained_model, embedding_table, tmp_path: Path):
        """Test save and load keep predictions identical on 100 probe messages."""
        rng = np.random.default_rng(21)
        vocabulary = ["win", "cash", "prize", "free", "home", "dinner", "mum", "lunch", "unknown"]
        probes = [list(rng.choice(vocabulary, size=int(rng.integers(0, 8)))) for _ in range(100)]
        loaded = load_model(save_model(trained_model, tmp_path / "probe.model"))
        before = predict_messages(trained_model, probes, embedding_table)
        after = predict_messages(loaded, probes, embedding_table)
        assert np.array_equal(before[0], after[0])
        assert np.array_equal(before[1], after[1])
