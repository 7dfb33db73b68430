"""
Unit tests for splurge_dcf.metrics module.

Tests confusion counts, per-class rates, ROC/AUC, log-loss and the
evaluation report.
"""

import math

import pytest

from splurge_dcf.exceptions import SplurgeDcfValueError
from splurge_dcf.metrics import (
    ConfusionMatrix,
    EvalReport,
    compute_metrics,
    evaluate,
    log_loss,
    roc_auc,
    roc_curve,
)


class TestConfusionMatrix:
    """Test ConfusionMatrix."""

    def test_from_labels(self):
        """Test counting with spam positive."""
        confusion = ConfusionMatrix.from_labels([1, 1, 0, 0, 0], [1, 0, 1, 0, 0])
        assert confusion == ConfusionMatrix(tp=1, fp=1, tn=2, fn=1)
        assert confusion.total == 5

    def test_swapped(self):
        """Test swapping the positive class."""
        assert ConfusionMatrix(tp=1, fp=2, tn=3, fn=4).swapped() == ConfusionMatrix(tp=3, fp=4, tn=1, fn=2)

    def test_negative_count(self):
        """Test negative counts are rejected."""
        with pytest.raises(SplurgeDcfValueError):
            ConfusionMatrix(tp=-1, fp=0, tn=0, fn=0)

    def test_length_mismatch(self):
        """Test mismatched label arrays are rejected."""
        with pytest.raises(SplurgeDcfValueError):
            ConfusionMatrix.from_labels([0, 1], [0])


class TestComputeMetrics:
    """Test the compute_metrics function."""

    def test_rates(self):
        """Test precision, recall, F1 and accuracy."""
        metrics = compute_metrics(ConfusionMatrix(tp=8, fp=2, tn=85, fn=5))
        assert metrics.precision == pytest.approx(0.8)
        assert metrics.recall == pytest.approx(8 / 13)
        assert metrics.f1 == pytest.approx(2 * 0.8 * (8 / 13) / (0.8 + 8 / 13))
        assert metrics.accuracy == pytest.approx(0.93)
        assert not metrics.is_degenerate

    def test_zero_denominators(self):
        """Test undefined rates are 0 and flagged."""
        metrics = compute_metrics(ConfusionMatrix(tp=0, fp=0, tn=10, fn=0))
        assert (metrics.precision, metrics.recall, metrics.f1) == (0.0, 0.0, 0.0)
        assert metrics.degenerate == ("precision", "recall", "f1")
        assert metrics.accuracy == 1.0

    def test_empty(self):
        """Test an empty matrix is rejected."""
        with pytest.raises(SplurgeDcfValueError):
            compute_metrics(ConfusionMatrix(tp=0, fp=0, tn=0, fn=0))


class TestRoc:
    """Test roc_curve and roc_auc."""

    def test_perfect(self):
        """Test a perfect ranking gives AUC 1."""
        value, curve = roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
        assert value == 1.0
        assert curve[0] == (0.0, 0.0) and curve[-1] == (1.0, 1.0)

    def test_inverted(self):
        """Test an inverted ranking gives AUC 0."""
        assert roc_auc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0])[0] == 0.0

    def test_ties_count_half(self):
        """Test tied scores form one step worth half a pair."""
        assert roc_auc([0.5, 0.5], [1, 0])[0] == pytest.approx(0.5)

    def test_mixed(self):
        """Test a partially correct ranking."""
        assert roc_auc([0.9, 0.4, 0.6, 0.1], [1, 1, 0, 0])[0] == pytest.approx(0.75)

    def test_monotone(self):
        """Test the curve never decreases."""
        curve = roc_curve([0.3, 0.7, 0.7, 0.1, 0.9], [0, 1, 0, 0, 1])
        assert all(a[0] <= b[0] and a[1] <= b[1] for a, b in zip(curve, curve[1:], strict=False))

    def test_single_class(self):
        """Test a single class has no ROC curve."""
        with pytest.raises(SplurgeDcfValueError) as exc_info:
            roc_curve([0.1, 0.2], [1, 1])
        assert exc_info.value.error_code == "single-class"


class TestLogLoss:
    """Test the log_loss function."""

    def test_value(self):
        """Test the mean cross-entropy."""
        expected = -(math.log(0.8) + math.log(0.9)) / 2
        assert log_loss([1, 0], [0.8, 0.1]) == pytest.approx(expected)

    def test_clipping(self):
        """Test confident mistakes stay finite."""
        assert log_loss([1], [0.0]) == pytest.approx(-math.log(1e-15))

    def test_invalid(self):
        """Test empty input and out-of-range probabilities are rejected."""
        with pytest.raises(SplurgeDcfValueError):
            log_loss([], [])
        with pytest.raises(SplurgeDcfValueError):
            log_loss([1], [1.5])
        with pytest.raises(SplurgeDcfValueError):
            log_loss([0, 1], [0.5])


class TestEvaluate:
    """Test evaluate and EvalReport."""

    def test_report(self):
        """Test the report fields."""
        report = evaluate([1, 0, 1, 0], [0.9, 0.2, 0.4, 0.6], label="demo")
        assert report.confusion == ConfusionMatrix(tp=1, fp=1, tn=1, fn=1)
        assert report.accuracy == 0.5
        assert set(report.per_class) == {"ham", "spam"}
        assert report.auc == pytest.approx(0.75)

    def test_explicit_predictions(self):
        """Test hard predictions override the 0.5 threshold."""
        report = evaluate([1, 0], [0.4, 0.6], [1, 0])
        assert report.accuracy == 1.0

    def test_single_class_has_no_auc(self):
        """Test AUC is None when only one class is present."""
        assert evaluate([0, 0], [0.1, 0.3]).auc is None

    def test_dict_round_trip(self):
        """Test to_dict and from_dict agree."""
        report = evaluate([1, 0, 1, 0], [0.9, 0.2, 0.4, 0.6], label="demo")
        assert EvalReport.from_dict(report.to_dict()) == report

    def test_from_dict_invalid(self):
        """Test a report without required keys is rejected."""
        with pytest.raises(SplurgeDcfValueError):
            EvalReport.from_dict({"accuracy": 1.0})

    def test_format_table(self):
        """Test the rendered table."""
        text = evaluate([1, 0, 1, 0], [0.9, 0.2, 0.4, 0.6], label="demo").format_table()
        assert "Evaluation: demo" in text
        assert "accuracy: 50.00%" in text
        assert "rows = actual, columns = predicted" in text


class TestHandBuiltMatrix:
    """Test exact rates on a small hand-built matrix."""

    def test_exact_rates(self):
        """Test precision 2/3, recall 1 and accuracy 0.9."""
        confusion = ConfusionMatrix(tp=2, fp=1, tn=7, fn=0)
        spam = compute_metrics(confusion)
        assert spam.precision == 2 / 3
        assert spam.recall == 1.0
        assert spam.accuracy == 0.9

    def test_two_row_layout(self):
        """Test one row per class with ham computed as the positive class."""
        report = evaluate([1, 1, 0, 0, 0, 0, 0, 0, 0, 0], [0.9, 0.8, 0.7, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1])
        assert list(report.per_class) == ["ham", "spam"]
        assert report.per_class["ham"].precision == 1.0
        assert report.per_class["ham"].recall == 7 / 8
