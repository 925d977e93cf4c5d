"""Classification metrics and FAU temporal-consistency statistics"""

import logging
from typing import List, Sequence

import numpy as np
from scipy.stats import rankdata
from sklearn.metrics import accuracy_score, confusion_matrix

from fauforensics.errors import MetricError, UsageError
from fauforensics.models.evaluation import CorrelationSummary, GroupStatistic

logger = logging.getLogger(__name__)

COSINE_STATISTIC = 'consecutive_cosine'
AUTOCORR_STATISTIC = 'lag1_autocorrelation'


def _check_pairs(preds: Sequence[int], labels: Sequence[int]) -> None:
    if len(preds) == 0:
        raise UsageError("Metrics need at least one prediction")
    if len(preds) != len(labels):
        raise UsageError(f"{len(preds)} predictions for {len(labels)} labels")


def accuracy(preds: Sequence[int], labels: Sequence[int]) -> float:
    _check_pairs(preds, labels)
    return float(accuracy_score(labels, preds))


def confusion(preds: Sequence[int], labels: Sequence[int], num_classes: int) -> np.ndarray:
    """C x C counts; rows are true labels, columns predictions"""
    _check_pairs(preds, labels)
    return confusion_matrix(labels, preds, labels=list(range(num_classes)))


def per_class_recall(matrix: np.ndarray) -> List[float]:
    """Diagonal over row sums; classes without samples report nan"""
    rows = matrix.sum(axis=1)
    return [float(matrix[i, i] / rows[i]) if rows[i] else float('nan') for i in range(matrix.shape[0])]


def auc(scores: Sequence[float], binary_labels: Sequence[int]) -> float:
    """
    Rank-based ROC AUC (Mann-Whitney U over positive-class scores)

    Tied scores get midranks, so each tied positive/negative pair counts 0.5.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(binary_labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise UsageError(f"scores {scores.shape} and labels {labels.shape} must be equal-length vectors")
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise MetricError(f"AUC needs both classes, got {n_pos} positive and {n_neg} negative")
    ranks = rankdata(scores, method='average')
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def correlation_intensity(fau: np.ndarray) -> float:
    """Mean cosine similarity of consecutive FAU frames; zero-norm frames drop their pairs"""
    fau = np.asarray(fau, dtype=np.float64)
    if fau.ndim != 2 or fau.shape[0] < 2:
        raise MetricError(f"correlation_intensity needs a T x D sequence with T >= 2, got {fau.shape}")
    norms = np.linalg.norm(fau, axis=1)
    valid = (norms[:-1] > 0) & (norms[1:] > 0)
    if not valid.any():
        raise MetricError("correlation_intensity is undefined for an all-zero sequence")
    dots = np.einsum('td,td->t', fau[:-1], fau[1:])
    cosines = dots[valid] / (norms[:-1][valid] * norms[1:][valid])
    return float(np.clip(cosines.mean(), -1.0, 1.0))


def lag1_autocorrelation(fau: np.ndarray) -> float:
    """Mean over channels of the lag-1 Pearson autocorrelation; constant channels are skipped"""
    fau = np.asarray(fau, dtype=np.float64)
    if fau.ndim != 2 or fau.shape[0] < 3:
        raise MetricError(f"lag1_autocorrelation needs a T x D sequence with T >= 3, got {fau.shape}")
    values = []
    for channel in fau.T:
        head, tail = channel[:-1], channel[1:]
        if np.ptp(head) == 0 or np.ptp(tail) == 0:
            continue
        values.append(np.corrcoef(head, tail)[0, 1])
    if not values:
        raise MetricError("lag1_autocorrelation is undefined when every channel is constant")
    return float(np.mean(values))


def group_statistic(name: str, values: Sequence[float]) -> GroupStatistic:
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise MetricError(f"Group {name!r} is empty")
    std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return GroupStatistic(name=name, count=int(values.size), mean=float(values.mean()),
                          std=std, stderr=std / np.sqrt(values.size))


def compare_groups(statistic: str, real: Sequence[float], fake: Sequence[float]) -> CorrelationSummary:
    """Real-minus-fake mean difference in units of the pooled standard error"""
    real_stat = group_statistic('real_video', real)
    fake_stat = group_statistic('fake_video', fake)
    se = float(np.hypot(real_stat.stderr, fake_stat.stderr))
    diff = real_stat.mean - fake_stat.mean
    if se > 0:
        separation = diff / se
    else:
        separation = float('inf') if diff > 0 else (float('-inf') if diff < 0 else 0.0)
    return CorrelationSummary(statistic=statistic, real=real_stat, fake=fake_stat, separation=separation)
