"""
Unit tests for splurge_dcf.cascade module.

Tests level input assembly, the decision rule, cascade growth and the
trained model's prediction path on the shared synthetic corpus.
"""

import dataclasses

import numpy as np
import pytest

from splurge_dcf.cascade import (
    CascadeLevel,
    CascadeModel,
    StopReason,
    TrainReport,
    average_probabilities,
    decide,
    level_input,
    level_input_matrix,
    predict_message,
    predict_messages,
    train_cascade,
    word_matrices,
)
from splurge_dcf.corpus import DatasetSplit, TokenizedMessage, preprocess
from splurge_dcf.embedding import EmbeddingTable
from splurge_dcf.exceptions import SplurgeDcfValueError


class TestLevelInput:
    """Test level_input and level_input_matrix."""

    def test_first_level(self):
        """Test level 1 input is the feature vector alone."""
        assert np.array_equal(level_input([1.0, 2.0], None), [1.0, 2.0])

    def test_later_level(self):
        """Test later inputs append the eight probabilities."""
        probabilities = np.linspace(0.1, 0.8, 8)
        combined = level_input(np.ones(3), probabilities)
        assert combined.shape == (11,)
        assert np.array_equal(combined[3:], probabilities)

    def test_wrong_probability_count(self):
        """Test anything other than eight probabilities is rejected."""
        with pytest.raises(SplurgeDcfValueError):
            level_input(np.ones(3), np.ones(4))

    def test_matrix(self):
        """Test the row-wise version."""
        combined = level_input_matrix(np.ones((2, 3)), np.zeros((2, 8)))
        assert combined.shape == (2, 11)
        with pytest.raises(SplurgeDcfValueError):
            level_input_matrix(np.ones((2, 3)), np.zeros((3, 8)))


class TestDecision:
    """Test average_probabilities and decide."""

    def test_average(self):
        """Test ham and spam columns are averaged separately."""
        probabilities = np.array([[0.9, 0.8, 0.7, 0.6, 0.1, 0.2, 0.3, 0.4]])
        assert np.allclose(average_probabilities(probabilities), [[0.75, 0.25]])

    def test_decide(self):
        """Test ham needs a strict majority and ties go to spam."""
        averaged = np.array([[0.6, 0.4], [0.4, 0.6], [0.5, 0.5]])
        assert decide(averaged).tolist() == [0, 1, 1]


class TestWordMatrices:
    """Test the word_matrices function."""

    def test_messages_and_token_lists(self):
        """Test both input forms give padded matrices."""
        table = EmbeddingTable(dim=2, entries={"a": [1.0, 0.0]})
        matrices = word_matrices([TokenizedMessage(label=0, tokens=("a",)), ["a", "b", "a"]], table, 2)
        assert [m.shape for m in matrices] == [(2, 2), (3, 2)]


class TestTrainCascade:
    """Test train_cascade on the synthetic corpus."""

    def test_report_consistent(self, trained, small_config):
        """Test the report and the model agree."""
        model, report = trained
        assert len(model.levels) == report.level_count >= 1
        assert report.level_count <= small_config.max_levels
        assert len(report.log_losses) == report.level_count
        if report.stop_reason is StopReason.NO_IMPROVEMENT:
            assert report.rejected_accuracy is not None
            assert report.rejected_accuracy - max(report.accuracies) <= small_config.epsilon
        else:
            assert report.level_count == small_config.max_levels

    def test_accepted_levels_improve(self, trained, small_config):
        """Test every retained level beats the best earlier level by more than epsilon."""
        _, report = trained
        for index in range(1, report.level_count):
            assert report.accuracies[index] - max(report.accuracies[:index]) > small_config.epsilon

    def test_level_shapes(self, trained_model, small_config):
        """Test bank shapes and forest widths per level."""
        first, *rest = trained_model.levels
        assert first.bank.weights.shape == (6, 8, 2)
        assert all(f.feature_count == 6 for f in first.forests)
        for level in rest:
            assert level.bank.weights.shape == (6, 1, 2)
            assert all(f.feature_count == 14 for f in level.forests)
        assert [level.level_index for level in trained_model.levels] == list(range(1, len(trained_model.levels) + 1))

    def test_separates_synthetic_classes(self, trained_model, dataset_split, embedding_table):
        """Test the cascade learns the synthetic vocabularies."""
        labels, p_spam = predict_messages(trained_model, dataset_split.test, embedding_table)
        truth = np.array([m.label for m in dataset_split.test])
        assert (labels == truth).mean() >= 0.8
        assert ((p_spam >= 0) & (p_spam <= 1)).all()

    def test_large_epsilon_keeps_one_level(self, dataset_split, small_config, embedding_table):
        """Test an unreachable improvement threshold stops after level 1."""
        config = dataclasses.replace(small_config, epsilon=1.0)
        model, report = train_cascade(dataset_split, config, embedding_table)
        assert len(model.levels) == 1
        assert report.stop_reason is StopReason.NO_IMPROVEMENT
        assert report.rejected_accuracy is not None

    def test_max_levels_one(self, dataset_split, small_config, embedding_table):
        """Test a one-level limit stops with max-levels."""
        config = dataclasses.replace(small_config, max_levels=1, cross_fit=False)
        model, report = train_cascade(dataset_split, config, embedding_table)
        assert len(model.levels) == 1
        assert report.stop_reason is StopReason.MAX_LEVELS
        assert report.rejected_accuracy is None

    def test_deterministic(self, dataset_split, small_config, embedding_table, trained):
        """Test the same seed reproduces the same report."""
        _, report = train_cascade(dataset_split, small_config, embedding_table)
        assert report == trained[1]

    def test_dimension_mismatch(self, dataset_split, small_config):
        """Test a table of another dimension is rejected."""
        with pytest.raises(SplurgeDcfValueError) as exc_info:
            train_cascade(dataset_split, small_config, EmbeddingTable(dim=3))
        assert exc_info.value.error_code == "dimension-mismatch"

    def test_single_class_training(self, dataset_split, small_config, embedding_table):
        """Test a single-class training set is rejected."""
        ham_only = tuple(m for m in dataset_split.train if m.label == 0)
        split = DatasetSplit(train=ham_only, validation=dataset_split.validation, test=(), seed=0)
        with pytest.raises(SplurgeDcfValueError) as exc_info:
            train_cascade(split, small_config, embedding_table)
        assert exc_info.value.error_code == "single-class"

    def test_empty_validation(self, dataset_split, small_config, embedding_table):
        """Test an empty validation set is rejected."""
        split = DatasetSplit(train=dataset_split.train, validation=(), test=(), seed=0)
        with pytest.raises(SplurgeDcfValueError):
            train_cascade(split, small_config, embedding_table)


class TestCascadeModel:
    """Test CascadeModel prediction and validation."""

    def test_predict_message(self, trained_model, embedding_table):
        """Test single messages with spam and ham vocabulary."""
        spam_label, spam_score = predict_message(trained_model, preprocess("win cash prize claim free"), embedding_table)
        ham_label, ham_score = predict_message(trained_model, preprocess("dinner home tomorrow mum"), embedding_table)
        assert (spam_label, ham_label) == (1, 0)
        assert spam_score > ham_score

    def test_empty_message(self, trained_model, embedding_table):
        """Test a message without tokens still gets a label."""
        label, score = predict_message(trained_model, [], embedding_table)
        assert label in (0, 1) and 0.0 <= score <= 1.0

    def test_no_messages(self, trained_model, embedding_table):
        """Test an empty batch gives empty outputs."""
        labels, scores = predict_messages(trained_model, [], embedding_table)
        assert labels.shape == (0,) and scores.shape == (0,)

    def test_prediction_dimension_mismatch(self, trained_model):
        """Test prediction with a table of another dimension is rejected."""
        with pytest.raises(SplurgeDcfValueError):
            predict_messages(trained_model, [["win"]], EmbeddingTable(dim=3))

    def test_describe(self, trained_model):
        """Test the structure summary."""
        summary = trained_model.describe()
        assert summary["levels"] == len(trained_model.levels)
        assert summary["n_filters"] == 6 and summary["kernel_size"] == 2
        assert len(summary["nodes_per_level"]) == len(trained_model.levels)

    def test_rejects_empty_levels(self, small_config):
        """Test a model needs at least one level."""
        with pytest.raises(SplurgeDcfValueError):
            CascadeModel(levels=(), config=small_config, stop_reason=StopReason.MAX_LEVELS)

    def test_rejects_mismatched_levels(self, trained_model, small_config):
        """Test levels must match the configured shapes."""
        other = dataclasses.replace(small_config, n_filters=7)
        with pytest.raises(SplurgeDcfValueError) as exc_info:
            CascadeModel(levels=trained_model.levels, config=other, stop_reason=StopReason.MAX_LEVELS)
        assert exc_info.value.error_code == "dimension-mismatch"

    def test_level_probabilities(self, trained_model):
        """Test a level's eight outputs average to normalised pairs."""
        level: CascadeLevel = trained_model.levels[0]
        X = np.random.default_rng(0).random((3, 6))
        eight = level.forest_probabilities(X)
        assert eight.shape == (3, 8)
        assert np.allclose(level.predict_proba(X).sum(axis=1), 1.0)


class TestTrainReport:
    """Test TrainReport serialisation and rendering."""

    def test_round_trip(self):
        """Test to_dict and from_dict agree."""
        report = TrainReport((0.9, 0.95), (0.3, 0.2), StopReason.NO_IMPROVEMENT, 0.95, 0.21)
        assert TrainReport.from_dict(report.to_dict()) == report

    def test_invalid(self):
        """Test an incomplete report is rejected."""
        with pytest.raises(SplurgeDcfValueError):
            TrainReport.from_dict({"accuracies": []})

    def test_format_table(self):
        """Test accepted and rejected rows are rendered."""
        text = TrainReport((0.9,), (0.3,), StopReason.NO_IMPROVEMENT, 0.9, 0.31).format_table()
        assert "90.00%" in text
        assert "(rej)" in text
        assert "stopped: no-improvement" in text
