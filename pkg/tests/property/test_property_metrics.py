from __future__ import annotations

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from splurge_dcf.metrics import ConfusionMatrix, compute_metrics, roc_auc


@st.composite
def scored_labels(draw: st.DrawFn) -> tuple[list[float], list[int]]:
    n = draw(st.integers(min_value=2, max_value=30))
    scores = draw(st.lists(st.integers(min_value=-7, max_value=7), min_size=n, max_size=n))
    labels = draw(st.lists(st.integers(min_value=0, max_value=1), min_size=n, max_size=n))
    assume(0 < sum(labels) < n)
    return [s / 7 for s in scores], labels


def _pair_count_auc(scores: list[float], labels: list[int]) -> float:
    positives = [s for s, label in zip(scores, labels, strict=True) if label == 1]
    negatives = [s for s, label in zip(scores, labels, strict=True) if label == 0]
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in positives for q in negatives)
    return wins / (len(positives) * len(negatives))


@given(data=scored_labels())
def test_auc_equals_pair_count(data: tuple[list[float], list[int]]):
    scores, labels = data
    value, curve = roc_auc(scores, labels)
    assert abs(value - _pair_count_auc(scores, labels)) <= 1e-12
    assert curve[0] == (0.0, 0.0) and curve[-1] == (1.0, 1.0)


@given(data=scored_labels())
def test_auc_invariant_under_monotone_transform(data: tuple[list[float], list[int]]):
    scores, labels = data
    cubed = (np.array(scores) ** 3).tolist()
    assert abs(roc_auc(scores, labels)[0] - roc_auc(cubed, labels)[0]) < 1e-9


@given(
    tp=st.integers(min_value=0, max_value=50),
    fp=st.integers(min_value=0, max_value=50),
    tn=st.integers(min_value=0, max_value=50),
    fn=st.integers(min_value=0, max_value=50),
)
def test_rates_bounded(tp: int, fp: int, tn: int, fn: int):
    confusion = ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)
    assume(confusion.total > 0)
    for metrics in (compute_metrics(confusion), compute_metrics(confusion.swapped())):
        for value in (metrics.precision, metrics.recall, metrics.f1, metrics.accuracy):
            assert 0.0 <= value <= 1.0
    assert compute_metrics(confusion).accuracy == compute_metrics(confusion.swapped()).accuracy
