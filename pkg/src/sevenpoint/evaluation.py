"""Metrics: AUC, confusion rates, the integer checklist score, ROC curves.

AUC is the Mann-Whitney statistic computed from tied ranks, so ties count
half. ROC curves sweep explicit thresholds; the traditional curve sweeps
the integer score range 0..10. Precision is reported as None (never 0)
when there are no positive predictions.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .constants import (
    ATTRIBUTES,
    MAX_TRADITIONAL_SCORE,
    N_ATTRIBUTES,
    REFERRAL_THRESHOLD,
    TRADITIONAL_WEIGHTS,
)
from .errors import ContractError, UndefinedMetricError
from .validation import check_attr_values, check_binary, check_vector

REPORT_LABELS = ("MEL",) + ATTRIBUTES

# Weight profile and average AUC reported by the original clinical-image
# study. Desk-scale runs cannot reproduce them (no image backbone here);
# they ship in reports purely as reference context and are never asserted.
REFERENCE_LEARNED_WEIGHTS = (1.47, 0.95, 0.93, 0.92, 0.97, 1.42, 1.35)
REFERENCE_AVERAGE_AUC = 0.850


def _tied_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.shape[0], dtype=float)
    i = 0
    n = values.shape[0]
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _check_scores_labels(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = check_vector(scores, name="scores")
    labels = check_binary(labels, name="labels")
    if labels.shape != scores.shape:
        raise ContractError("scores and labels must have the same length")
    if labels.min() == labels.max():
        raise UndefinedMetricError("metric undefined: only one class present")
    return scores, labels


def auc(scores, labels) -> float:
    """Mann-Whitney AUC: (#concordant + half the ties) / (#pos * #neg)."""
    scores, labels = _check_scores_labels(scores, labels)
    ranks = _tied_ranks(scores)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.shape[0] - n_pos
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def confusion_metrics(scores, labels, threshold: float) -> tuple[float | None, float, float]:
    """(precision, sensitivity, specificity) with prediction = score >= threshold.

    Precision is None when nothing is predicted positive.
    """
    scores, labels = _check_scores_labels(scores, labels)
    pred = scores >= threshold
    pos = labels == 1
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    fn = int(np.sum(~pred & pos))
    tn = int(np.sum(~pred & ~pos))
    precision = tp / (tp + fp) if (tp + fp) > 0 else None
    sensitivity = tp / (tp + fn)
    specificity = tn / (tn + fp)
    return precision, sensitivity, specificity


def traditional_score(attrs) -> int:
    """Clinic integer score: 2 points per major attribute, 1 per minor."""
    attrs = check_attr_values(attrs, allow_probabilities=False)
    return int(round(float(attrs @ TRADITIONAL_WEIGHTS)))


def is_referral(score: int) -> bool:
    return score >= REFERRAL_THRESHOLD


@dataclass
class RocCurve:
    """Operating points ordered by ascending threshold, plus the curve area."""

    points: list[tuple[float, float, float]]  # (threshold, sensitivity, specificity)
    auc: float

    def to_rows(self) -> list[tuple[float, float, float]]:
        return list(self.points)


def _sweep(scores: np.ndarray, labels: np.ndarray, thresholds: np.ndarray) -> list[tuple[float, float, float]]:
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.shape[0] - n_pos
    points = []
    for t in thresholds:
        pred = scores >= t
        sens = float(np.sum(pred & pos) / n_pos)
        spec = float(np.sum(~pred & ~pos) / n_neg)
        points.append((float(t), sens, spec))
    return points


def _trapezoid_auc(points: list[tuple[float, float, float]]) -> float:
    """Area under (1-specificity, sensitivity), corners (0,0) and (1,1) included."""
    xy = {(1.0 - spec, sens) for _, sens, spec in points}
    xy.add((0.0, 0.0))
    xy.add((1.0, 1.0))
    pts = sorted(xy)
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    trapezoid = getattr(np, "trapezoid", np.trapz)
    return float(trapezoid(ys, xs))


def roc_curve(scores, labels, thresholds=None) -> RocCurve:
    """ROC over explicit thresholds; defaults to every distinct score."""
    scores, labels = _check_scores_labels(scores, labels)
    if thresholds is None:
        thresholds = np.unique(scores)
    thresholds = np.sort(np.asarray(thresholds, dtype=float))
    points = _sweep(scores, labels, thresholds)
    return RocCurve(points=points, auc=_trapezoid_auc(points))


def traditional_roc(y7hat, mel_labels, binarize_threshold: float = 0.5) -> RocCurve:
    """ROC of the integer checklist score computed from attribute predictions.

    Each case's attributes are binarized at binarize_threshold, scored with
    the traditional rule, and swept over the full integer range 0..10.
    """
    y7hat = np.atleast_2d(np.asarray(y7hat, dtype=float))
    if y7hat.shape[1] != N_ATTRIBUTES:
        raise ContractError("y7hat must have 7 columns")
    binary = (y7hat >= binarize_threshold).astype(float)
    scores = binary @ TRADITIONAL_WEIGHTS
    labels = check_binary(mel_labels, name="mel_labels")
    if labels.min() == labels.max():
        raise UndefinedMetricError("ROC undefined: only one class present")
    thresholds = np.arange(0, MAX_TRADITIONAL_SCORE + 1, dtype=float)
    points = _sweep(scores, labels, thresholds)
    return RocCurve(points=points, auc=_trapezoid_auc(points))


def youden_threshold(scores, labels) -> float:
    """Threshold maximizing sensitivity + specificity - 1 (lowest on ties)."""
    scores, labels = _check_scores_labels(scores, labels)
    best_j, best_t = -np.inf, None
    for t, sens, spec in _sweep(scores, labels, np.unique(scores)):
        j = sens + spec - 1.0
        if j > best_j + 1e-15:
            best_j, best_t = j, t
    return float(best_t)


@dataclass
class WeightsComparison:
    """Traditional integer weights next to the learned profile.

    The learned weights are reported mean-normalized to the traditional
    mean, since the melanoma head is invariant to their overall scale.
    """

    traditional: tuple[int, ...]
    learned: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "attributes": list(ATTRIBUTES),
            "traditional": list(self.traditional),
            "learned": list(self.learned),
            "reference_learned": list(REFERENCE_LEARNED_WEIGHTS),
            "reference_average_auc": REFERENCE_AVERAGE_AUC,
        }


def normalize_weights(weights) -> np.ndarray:
    """Rescale a positive weight vector so its mean matches the traditional mean."""
    weights = check_vector(weights, N_ATTRIBUTES, name="weights")
    if np.any(weights <= 0):
        raise ContractError("weights must be positive")
    return weights * (TRADITIONAL_WEIGHTS.mean() / weights.mean())


def compare_weights(learned_weights) -> WeightsComparison:
    normalized = normalize_weights(learned_weights)
    return WeightsComparison(
        traditional=tuple(int(w) for w in TRADITIONAL_WEIGHTS),
        learned=tuple(float(w) for w in normalized),
    )


@dataclass
class MetricsReport:
    """Per-label AUC / precision / sensitivity / specificity plus averages."""

    per_label: dict[str, dict]
    averages: dict[str, float | None]
    thresholds: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "labels": list(REPORT_LABELS),
            "per_label": self.per_label,
            "averages": self.averages,
            "thresholds": self.thresholds,
        }


def _label_metrics(scores: np.ndarray, labels: np.ndarray, threshold: float) -> dict:
    precision, sensitivity, specificity = confusion_metrics(scores, labels, threshold)
    return {
        "auc": auc(scores, labels),
        "precision": precision,
        "sensitivity": sensitivity,
        "specificity": specificity,
    }


def metrics_report(
    y7hat,
    ymhat,
    y7,
    ym,
    mel_threshold: float,
    attr_threshold: float = 0.5,
    workers: int = 1,
) -> MetricsReport:
    """Assemble the per-label table; label order is MEL then the attributes.

    Labels may be evaluated concurrently, but results are always collected
    in label order, so the output is identical for any worker count.
    """
    y7hat = np.atleast_2d(np.asarray(y7hat, dtype=float))
    ymhat = np.asarray(ymhat, dtype=float)
    y7 = np.atleast_2d(np.asarray(y7))
    ym = np.asarray(ym)
    tasks = [(ymhat, ym, mel_threshold)] + [
        (y7hat[:, j], y7[:, j], attr_threshold) for j in range(N_ATTRIBUTES)
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda args: _label_metrics(*args), tasks))
    else:
        results = [_label_metrics(*args) for args in tasks]
    per_label = dict(zip(REPORT_LABELS, results))
    averages = {}
    for key in ("auc", "precision", "sensitivity", "specificity"):
        values = [m[key] for m in results if m[key] is not None]
        averages[key] = float(np.mean(values)) if values else None
    thresholds = {"MEL": float(mel_threshold)}
    thresholds.update({name: float(attr_threshold) for name in ATTRIBUTES})
    return MetricsReport(per_label=per_label, averages=averages, thresholds=thresholds)


@dataclass
class ReportBundle:
    metrics: MetricsReport
    weights: WeightsComparison
    roc_learned: RocCurve
    roc_traditional: RocCurve


def report(
    y7hat,
    ymhat,
    y7,
    ym,
    learned_weights,
    mel_threshold: float,
    attr_threshold: float = 0.5,
    workers: int = 1,
) -> ReportBundle:
    """Metrics table, weight comparison, and both ROC curves on the same cases."""
    return ReportBundle(
        metrics=metrics_report(
            y7hat, ymhat, y7, ym, mel_threshold, attr_threshold, workers=workers
        ),
        weights=compare_weights(learned_weights),
        roc_learned=roc_curve(ymhat, ym),
        roc_traditional=traditional_roc(y7hat, ym, attr_threshold),
    )
