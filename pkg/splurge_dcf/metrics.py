"""Classification metrics: confusion counts, per-class rates, ROC/AUC and log-loss.

Spam (label 1) is the positive class unless stated otherwise. Per-class rows
are produced by swapping the positive class, giving one row for ham and one
for spam. Rates with a zero denominator are reported as 0 and flagged as
degenerate instead of propagating NaN.

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt
from sklearn.metrics import auc as trapezoid_auc
from sklearn.metrics import confusion_matrix
from sklearn.metrics import roc_curve as sklearn_roc_curve

from .exceptions import SplurgeDcfValueError
from .protocols import ProbabilisticClassifier

PROBABILITY_CLIP = 1e-15
CLASS_NAMES: tuple[str, str] = ("ham", "spam")


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts with spam as the positive class.

    Attributes:
        tp: Spam predicted as spam.
        fp: Ham predicted as spam.
        tn: Ham predicted as ham.
        fn: Spam predicted as ham.
    """

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise SplurgeDcfValueError(
                    message=f"Confusion count {name} must be non-negative",
                    details={"param": name, "value": str(getattr(self, name))},
                )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def swapped(self) -> ConfusionMatrix:
        """The same counts with ham treated as the positive class."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)

    @classmethod
    def from_labels(cls, y_true: Sequence[int] | npt.ArrayLike, y_pred: Sequence[int] | npt.ArrayLike) -> ConfusionMatrix:
        """Count outcomes of paired true and predicted labels."""
        truth = np.asarray(y_true, dtype=np.int64)
        predicted = np.asarray(y_pred, dtype=np.int64)
        if truth.shape != predicted.shape:
            raise SplurgeDcfValueError(
                message=f"Got {truth.size} true labels and {predicted.size} predictions",
                details={"param": "y_pred"},
            )
        (tn, fp), (fn, tp) = confusion_matrix(truth, predicted, labels=[0, 1])
        return cls(tp=int(tp), fp=int(fp), tn=int(tn), fn=int(fn))

    def to_dict(self) -> dict[str, int]:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class ClassMetrics:
    """Precision, recall, F1 and accuracy for one choice of positive class.

    ``degenerate`` lists the rates whose denominator was zero.
    """

    precision: float
    recall: float
    f1: float
    accuracy: float
    degenerate: tuple[str, ...] = ()

    @property
    def is_degenerate(self) -> bool:
        return bool(self.degenerate)


def compute_metrics(confusion: ConfusionMatrix) -> ClassMetrics:
    """Precision, recall, F1 and accuracy of a confusion matrix.

    Args:
        confusion (ConfusionMatrix): Counts with a non-zero total.

    Returns:
        ClassMetrics: Rates for the positive class; zero-denominator rates are
        0 and named in ``degenerate``.

    Raises:
        SplurgeDcfValueError: If the matrix is empty.
    """
    if confusion.total == 0:
        raise SplurgeDcfValueError(
            message="Cannot compute metrics of an empty confusion matrix",
            details={"param": "confusion", "value": "0"},
        )
    degenerate: list[str] = []

    def ratio(name: str, numerator: float, denominator: float) -> float:
        if denominator == 0:
            degenerate.append(name)
            return 0.0
        return numerator / denominator

    precision = ratio("precision", confusion.tp, confusion.tp + confusion.fp)
    recall = ratio("recall", confusion.tp, confusion.tp + confusion.fn)
    f1 = ratio("f1", 2 * precision * recall, precision + recall)
    accuracy = (confusion.tp + confusion.tn) / confusion.total
    return ClassMetrics(precision=precision, recall=recall, f1=f1, accuracy=accuracy, degenerate=tuple(degenerate))


def _check_binary(labels: npt.NDArray[np.int64], name: str) -> None:
    if not np.all((labels == 0) | (labels == 1)):
        raise SplurgeDcfValueError(
            message=f"{name} must contain only 0 and 1",
            details={"param": name},
        )


def roc_curve(scores: Sequence[float] | npt.ArrayLike, labels: Sequence[int] | npt.ArrayLike) -> list[tuple[float, float]]:
    """ROC points ``(FPR, TPR)`` over distinct score thresholds, descending.

    Equal scores form a single threshold step. The curve starts at ``(0, 0)``
    and ends at ``(1, 1)``.

    Raises:
        SplurgeDcfValueError: If fewer than two classes are present.
    """
    score_array = np.asarray(scores, dtype=np.float64)
    label_array = np.asarray(labels, dtype=np.int64)
    _check_binary(label_array, "labels")
    if score_array.shape != label_array.shape or np.unique(label_array).size < 2:
        raise SplurgeDcfValueError(
            message="ROC analysis needs matching scores and labels with both classes present",
            error_code="single-class",
            details={"param": "labels"},
        )
    fpr, tpr, _ = sklearn_roc_curve(label_array, score_array, pos_label=1, drop_intermediate=False)
    return [(float(x), float(y)) for x, y in zip(fpr, tpr, strict=True)]


def roc_auc(
    scores: Sequence[float] | npt.ArrayLike,
    labels: Sequence[int] | npt.ArrayLike,
) -> tuple[float, list[tuple[float, float]]]:
    """Area under the ROC curve by trapezoidal integration.

    Args:
        scores: Spam scores, higher meaning more likely spam.
        labels: True labels in ``{0, 1}``.

    Returns:
        tuple[float, list]: The AUC and the curve points.

    Raises:
        SplurgeDcfValueError: If fewer than two classes are present.
    """
    curve = roc_curve(scores, labels)
    fpr = np.array([point[0] for point in curve])
    tpr = np.array([point[1] for point in curve])
    return float(trapezoid_auc(fpr, tpr)), curve


def log_loss(y_true: Sequence[int] | npt.ArrayLike, p_spam: Sequence[float] | npt.ArrayLike) -> float:
    """Mean binary cross-entropy with probabilities clipped to ``[1e-15, 1 - 1e-15]``.

    Raises:
        SplurgeDcfValueError: If the input is empty, lengths differ, labels
            are not binary or probabilities lie outside ``[0, 1]``.
    """
    truth = np.asarray(y_true, dtype=np.int64)
    probabilities = np.asarray(p_spam, dtype=np.float64)
    if truth.size == 0:
        raise SplurgeDcfValueError(
            message="Cannot compute log-loss of an empty sample",
            details={"param": "y_true", "value": "0"},
        )
    if truth.shape != probabilities.shape:
        raise SplurgeDcfValueError(
            message=f"Got {truth.size} labels and {probabilities.size} probabilities",
            details={"param": "p_spam"},
        )
    _check_binary(truth, "y_true")
    if np.any((probabilities < 0) | (probabilities > 1)) or not np.all(np.isfinite(probabilities)):
        raise SplurgeDcfValueError(
            message="Probabilities must lie in [0, 1]",
            details={"param": "p_spam"},
        )
    clipped = np.clip(probabilities, PROBABILITY_CLIP, 1.0 - PROBABILITY_CLIP)
    losses = -(truth * np.log(clipped) + (1 - truth) * np.log(1.0 - clipped))
    return float(losses.mean())


@dataclass(frozen=True)
class EvalReport:
    """Evaluation of a classifier on one labeled set.

    ``per_class`` holds one :class:`ClassMetrics` per class name, computed with
    that class as positive. ``auc`` is None when only one class was present.
    """

    confusion: ConfusionMatrix
    per_class: Mapping[str, ClassMetrics]
    accuracy: float
    auc: float | None
    log_loss: float
    roc: tuple[tuple[float, float], ...] = field(default=())
    label: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "accuracy": self.accuracy,
            "auc": self.auc,
            "log_loss": self.log_loss,
            "confusion": self.confusion.to_dict(),
            "per_class": {
                name: {
                    "precision": metrics.precision,
                    "recall": metrics.recall,
                    "f1": metrics.f1,
                    "degenerate": list(metrics.degenerate),
                }
                for name, metrics in self.per_class.items()
            },
            "roc": [list(point) for point in self.roc],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> EvalReport:
        """Rebuild a report written by :meth:`to_dict`.

        Raises:
            SplurgeDcfValueError: If a required key is missing.
        """
        try:
            confusion = ConfusionMatrix(**{key: int(data["confusion"][key]) for key in ("tp", "fp", "tn", "fn")})
            per_class = {
                name: ClassMetrics(
                    precision=float(values["precision"]),
                    recall=float(values["recall"]),
                    f1=float(values["f1"]),
                    accuracy=float(data["accuracy"]),
                    degenerate=tuple(values.get("degenerate", ())),
                )
                for name, values in data["per_class"].items()
            }
            return cls(
                confusion=confusion,
                per_class=per_class,
                accuracy=float(data["accuracy"]),
                auc=None if data.get("auc") is None else float(data["auc"]),
                log_loss=float(data["log_loss"]),
                roc=tuple((float(x), float(y)) for x, y in data.get("roc", ())),
                label=str(data.get("label", "")),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise SplurgeDcfValueError(
                message=f"Invalid evaluation report: {e}",
                details={"param": "report"},
            ) from e

    def format_table(self) -> str:
        """Plain-text rendering with per-class rows and a labelled confusion matrix."""
        title = f"Evaluation: {self.label}" if self.label else "Evaluation"
        lines = [
            title,
            f"{'class':<8}{'precision':>11}{'recall':>9}{'f1':>9}",
        ]
        for name, metrics in self.per_class.items():
            flag = " *" if metrics.is_degenerate else ""
            lines.append(f"{name:<8}{metrics.precision:>11.4f}{metrics.recall:>9.4f}{metrics.f1:>9.4f}{flag}")
        auc_text = "n/a" if self.auc is None else f"{self.auc:.4f}"
        lines.extend(
            [
                f"accuracy: {self.accuracy * 100:.2f}%",
                f"auc: {auc_text}",
                f"log-loss: {self.log_loss:.4f}",
                "confusion (rows = actual, columns = predicted):",
                f"{'':<14}{'pred ham':>10}{'pred spam':>11}",
                f"{'actual ham':<14}{self.confusion.tn:>10}{self.confusion.fp:>11}",
                f"{'actual spam':<14}{self.confusion.fn:>10}{self.confusion.tp:>11}",
            ]
        )
        if any(metrics.is_degenerate for metrics in self.per_class.values()):
            lines.append("* a rate had a zero denominator and is reported as 0")
        return "\n".join(lines)


def evaluate(
    y_true: Sequence[int] | npt.ArrayLike,
    p_spam: Sequence[float] | npt.ArrayLike,
    y_pred: Sequence[int] | npt.ArrayLike | None = None,
    *,
    label: str = "",
) -> EvalReport:
    """Build an :class:`EvalReport` from labels and spam probabilities.

    Args:
        y_true: True labels.
        p_spam: Spam probability of every sample, used for AUC and log-loss.
        y_pred: Hard predictions; when None, spam is predicted for
            ``p_spam >= 0.5``.
        label: Name shown in the rendered table.

    Returns:
        EvalReport: The report.
    """
    truth = np.asarray(y_true, dtype=np.int64)
    probabilities = np.asarray(p_spam, dtype=np.float64)
    predicted = (probabilities >= 0.5).astype(np.int64) if y_pred is None else np.asarray(y_pred, dtype=np.int64)

    confusion = ConfusionMatrix.from_labels(truth, predicted)
    spam = compute_metrics(confusion)
    ham = compute_metrics(confusion.swapped())
    auc_value: float | None
    curve: list[tuple[float, float]]
    if np.unique(truth).size == 2:
        auc_value, curve = roc_auc(probabilities, truth)
    else:
        auc_value, curve = None, []
    loss = log_loss(truth, probabilities)
    return EvalReport(
        confusion=confusion,
        per_class={CLASS_NAMES[0]: ham, CLASS_NAMES[1]: spam},
        accuracy=spam.accuracy,
        auc=auc_value,
        log_loss=loss,
        roc=tuple(curve),
        label=label,
    )


def evaluate_classifier(
    classifier: ProbabilisticClassifier,
    X: npt.ArrayLike,
    y_true: Sequence[int] | npt.ArrayLike,
    *,
    label: str = "",
) -> EvalReport:
    """Evaluate anything with ``predict_proba`` on labeled feature rows.

    Hard labels follow the cascade rule: ham only when ``p_ham > p_spam``.

    Raises:
        SplurgeDcfValueError: If ``classifier`` has no ``predict_proba``.
    """
    if not isinstance(classifier, ProbabilisticClassifier):
        raise SplurgeDcfValueError(
            message=f"{type(classifier).__name__} does not provide predict_proba",
            details={"param": "classifier", "value": type(classifier).__name__},
        )
    probabilities = classifier.predict_proba(np.asarray(X, dtype=np.float64))
    predicted = np.where(probabilities[:, 0] > probabilities[:, 1], 0, 1)
    return evaluate(y_true, probabilities[:, 1], predicted, label=label)
