"""Evaluation harness: stratified cross-validation, accuracy, weighted F1,
and Fleiss' kappa for annotator agreement.

Weighted F1 averages per-class F1 scores with weights proportional to
true-class support, so dominant classes cannot hide a collapsed minority
class without also dragging the average.  Fleiss' kappa follows the
standard formulation

    kappa = (P_bar - P_bar_e) / (1 - P_bar_e)

over a subjects x categories matrix of rating counts, with the degenerate
all-raters-one-category case (P_bar_e = 1) defined as perfect agreement.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import MetricsError

__all__ = [
    "ConfusionMatrix",
    "ClassMetrics",
    "EvalReport",
    "stratified_kfold",
    "accuracy",
    "weighted_f1",
    "per_class_metrics",
    "evaluation_report",
    "fleiss_kappa",
    "binary_fleiss_kappa",
    "annotation_counts",
]

logger = logging.getLogger(__name__)


def stratified_kfold(
    labels: Sequence[str], k: int, seed: int = 0
) -> list[np.ndarray]:
    """Split ``range(len(labels))`` into ``k`` disjoint stratified folds.

    Per-class counts differ by at most one across folds, and fold totals
    stay balanced by dealing classes round-robin from a rolling start.
    Classes with fewer than ``k`` members are flagged with a warning but
    still dealt.  Deterministic for a given seed.
    """
    n = len(labels)
    if k < 2:
        raise MetricsError(f"k must be >= 2, got {k}")
    if k > n:
        raise MetricsError(f"k={k} exceeds the number of samples ({n})")

    rng = np.random.Generator(np.random.PCG64(seed))
    by_class: dict[str, list[int]] = {}
    for i, label in enumerate(labels):
        by_class.setdefault(label, []).append(i)

    folds: list[list[int]] = [[] for _ in range(k)]
    start = 0
    for cls in sorted(by_class):
        idx = np.asarray(by_class[cls])
        if len(idx) < k:
            logger.warning("class %r has %d members, fewer than k=%d folds", cls, len(idx), k)
        rng.shuffle(idx)
        for j, sample in enumerate(idx):
            folds[(start + j) % k].append(int(sample))
        start = (start + len(idx)) % k
    return [np.asarray(sorted(f), dtype=np.int64) for f in folds]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square count matrix indexed by (true class, predicted class)."""

    classes: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self) -> None:
        k = len(self.classes)
        if self.counts.shape != (k, k):
            raise MetricsError(f"counts must be {k}x{k}")
        if (self.counts < 0).any():
            raise MetricsError("counts must be non-negative")

    @classmethod
    def from_predictions(
        cls, y_true: Sequence[str], y_pred: Sequence[str], classes: Sequence[str]
    ) -> "ConfusionMatrix":
        if len(y_true) != len(y_pred):
            raise MetricsError("y_true and y_pred lengths differ")
        index = {c: i for i, c in enumerate(classes)}
        counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
        for t, p in zip(y_true, y_pred):
            if t not in index:
                raise MetricsError(f"unknown true class {t!r}")
            if p not in index:
                raise MetricsError(f"unknown predicted class {p!r}")
            counts[index[t], index[p]] += 1
        return cls(classes=tuple(classes), counts=counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.classes != other.classes:
            raise MetricsError("cannot add confusion matrices with different classes")
        return ConfusionMatrix(self.classes, self.counts + other.counts)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


def accuracy(cm: ConfusionMatrix) -> float:
    """Fraction of correctly classified samples: trace / total."""
    if cm.total == 0:
        raise MetricsError("empty confusion matrix")
    return float(np.trace(cm.counts) / cm.total)


def per_class_metrics(cm: ConfusionMatrix) -> dict[str, ClassMetrics]:
    """Precision, recall, F1, and support per class (0 where undefined)."""
    if cm.total == 0:
        raise MetricsError("empty confusion matrix")
    out: dict[str, ClassMetrics] = {}
    col_sums = cm.counts.sum(axis=0)
    row_sums = cm.counts.sum(axis=1)
    for i, name in enumerate(cm.classes):
        tp = float(cm.counts[i, i])
        precision = tp / col_sums[i] if col_sums[i] > 0 else 0.0
        recall = tp / row_sums[i] if row_sums[i] > 0 else 0.0
        if row_sums[i] == 0 and col_sums[i] == 0:
            logger.warning("class %r has no truths and no predictions; F1 set to 0", name)
        f1 = (
            2.0 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        out[name] = ClassMetrics(
            precision=float(precision),
            recall=float(recall),
            f1=float(f1),
            support=int(row_sums[i]),
        )
    return out


def weighted_f1(cm: ConfusionMatrix) -> float:
    """Per-class F1 averaged with weights proportional to true-class support."""
    metrics = per_class_metrics(cm)
    total = cm.total
    return float(sum(m.f1 * m.support / total for m in metrics.values()))


@dataclass(frozen=True)
class EvalReport:
    """Pooled and per-fold evaluation results."""

    classes: tuple[str, ...]
    accuracy: float
    weighted_f1: float
    per_class: dict[str, ClassMetrics]
    fold_accuracy: tuple[float, ...]
    fold_weighted_f1: tuple[float, ...]
    mean_accuracy: float
    std_accuracy: float
    mean_weighted_f1: float
    std_weighted_f1: float
    pooled_counts: np.ndarray

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "accuracy": self.accuracy,
            "weighted_f1": self.weighted_f1,
            "per_class": {
                name: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for name, m in self.per_class.items()
            },
            "folds": [
                {"fold": i, "accuracy": a, "weighted_f1": f}
                for i, (a, f) in enumerate(zip(self.fold_accuracy, self.fold_weighted_f1))
            ],
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "mean_weighted_f1": self.mean_weighted_f1,
            "std_weighted_f1": self.std_weighted_f1,
            "confusion": self.pooled_counts.tolist(),
        }

    def format_table(self) -> str:
        """Human-readable summary table."""
        lines = [
            f"{'fold':>4}  {'accuracy':>8}  {'weighted F1':>11}",
        ]
        for i, (a, f) in enumerate(zip(self.fold_accuracy, self.fold_weighted_f1)):
            lines.append(f"{i:>4}  {a:8.4f}  {f:11.4f}")
        lines.append(
            f"mean  {self.mean_accuracy:8.4f}  {self.mean_weighted_f1:11.4f}"
            f"   (std {self.std_accuracy:.4f} / {self.std_weighted_f1:.4f})"
        )
        lines.append(
            f"pooled accuracy {self.accuracy:.4f}, pooled weighted F1 {self.weighted_f1:.4f}"
        )
        lines.append(f"{'class':>12}  {'prec':>6}  {'rec':>6}  {'f1':>6}  {'n':>5}")
        for name, m in self.per_class.items():
            lines.append(
                f"{name:>12}  {m.precision:6.3f}  {m.recall:6.3f}  {m.f1:6.3f}  {m.support:>5}"
            )
        return "\n".join(lines)


def evaluation_report(fold_cms: Sequence[ConfusionMatrix]) -> EvalReport:
    """Aggregate per-fold confusion matrices into pooled and mean±std metrics.

    Std is the population standard deviation across folds.
    """
    if not fold_cms:
        raise MetricsError("no folds to aggregate")
    pooled = fold_cms[0]
    for cm in fold_cms[1:]:
        pooled = pooled + cm
    fold_acc = tuple(accuracy(cm) for cm in fold_cms)
    fold_f1 = tuple(weighted_f1(cm) for cm in fold_cms)
    return EvalReport(
        classes=pooled.classes,
        accuracy=accuracy(pooled),
        weighted_f1=weighted_f1(pooled),
        per_class=per_class_metrics(pooled),
        fold_accuracy=fold_acc,
        fold_weighted_f1=fold_f1,
        mean_accuracy=float(np.mean(fold_acc)),
        std_accuracy=float(np.std(fold_acc)),
        mean_weighted_f1=float(np.mean(fold_f1)),
        std_weighted_f1=float(np.std(fold_f1)),
        pooled_counts=pooled.counts,
    )


def fleiss_kappa(ratings: np.ndarray) -> float:
    """Fleiss' kappa over a subjects x categories matrix of rating counts.

    Every subject must have the same number of ratings ``n >= 2``.  When
    every rater puts every subject in one single category the expected
    agreement is 1 and kappa is defined as 1.0.
    """
    ratings = np.asarray(ratings, dtype=np.float64)
    if ratings.ndim != 2 or ratings.shape[0] < 1 or ratings.shape[1] < 1:
        raise MetricsError("ratings must be a non-empty 2-d matrix")
    if (ratings < 0).any():
        raise MetricsError("rating counts must be non-negative")
    row_totals = ratings.sum(axis=1)
    n = row_totals[0]
    if not np.all(row_totals == n):
        raise MetricsError("every subject must have the same number of ratings")
    if n < 2:
        raise MetricsError("at least two ratings per subject are required")

    n_subjects = ratings.shape[0]
    p_subject = (np.sum(ratings**2, axis=1) - n) / (n * (n - 1))
    p_bar = float(p_subject.mean())
    p_cat = ratings.sum(axis=0) / (n_subjects * n)
    p_bar_e = float(np.sum(p_cat**2))
    if p_bar_e >= 1.0:
        return 1.0
    return (p_bar - p_bar_e) / (1.0 - p_bar_e)


def binary_fleiss_kappa(ratings: np.ndarray, category: int) -> float:
    """Kappa for one category against the rest (collapse to {c, not-c})."""
    ratings = np.asarray(ratings, dtype=np.float64)
    if not 0 <= category < ratings.shape[1]:
        raise MetricsError(f"category index {category} out of range")
    target = ratings[:, category]
    rest = ratings.sum(axis=1) - target
    return fleiss_kappa(np.column_stack((target, rest)))


def annotation_counts(
    annotations: Mapping[tuple[str, str], str], classes: Sequence[str]
) -> tuple[np.ndarray, list[str]]:
    """Build the subjects x categories count matrix from per-annotator votes.

    Subjects are ordered by thread id; returns the matrix and that order.
    """
    index = {c: i for i, c in enumerate(classes)}
    subjects = sorted({tid for tid, _ in annotations})
    counts = np.zeros((len(subjects), len(classes)), dtype=np.int64)
    subject_pos = {tid: i for i, tid in enumerate(subjects)}
    for (tid, _), label in annotations.items():
        if label not in index:
            raise MetricsError(f"unknown class {label!r} in annotations")
        counts[subject_pos[tid], index[label]] += 1
    return counts, subjects
