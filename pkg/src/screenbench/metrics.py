"""Confusion-matrix metrics: balanced accuracy, F1, weighted F1, MAE, multi-label credit.

Predictions that failed parsing are passed as ``None``. They are kept out of
the N x N matrix and tallied per truth class; the scoring mode decides
whether they enter recall denominators (``count_invalid_as_wrong``) or are
dropped (``exclude_invalid``).
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Hashable, Sequence

import numpy as np

log = logging.getLogger(__name__)

COUNT_AS_WRONG = "count_invalid_as_wrong"
EXCLUDE = "exclude_invalid"
SCORING_MODES = (COUNT_AS_WRONG, EXCLUDE)


class MetricError(ValueError):
    pass


class EmptyClass(MetricError):
    def __init__(self, index: int, label: Hashable = None):
        super().__init__(f"class {label!r} (index {index}) has no truth samples; recall undefined")
        self.index = index
        self.label = label


class LengthMismatch(MetricError):
    pass


@dataclass
class ConfusionMatrix:
    classes: list
    counts: np.ndarray
    invalid: np.ndarray = None
    mode: str = COUNT_AS_WRONG

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        n = len(self.classes)
        if self.counts.shape != (n, n):
            raise MetricError(f"counts shape {self.counts.shape} does not match {n} classes")
        if self.invalid is None:
            self.invalid = np.zeros(n, dtype=np.int64)
        self.invalid = np.asarray(self.invalid, dtype=np.int64)
        if self.mode not in SCORING_MODES:
            raise MetricError(f"unknown scoring mode {self.mode!r}")

    @classmethod
    def from_labels(
        cls,
        truths: Sequence,
        preds: Sequence,
        classes: Sequence,
        mode: str = COUNT_AS_WRONG,
    ) -> "ConfusionMatrix":
        if len(truths) != len(preds):
            raise LengthMismatch(f"{len(truths)} truths vs {len(preds)} predictions")
        index = {c: i for i, c in enumerate(classes)}
        counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
        invalid = np.zeros(len(classes), dtype=np.int64)
        for t, p in zip(truths, preds):
            if p is None or p not in index:
                invalid[index[t]] += 1
            else:
                counts[index[t], index[p]] += 1
        return cls(list(classes), counts, invalid, mode)

    @property
    def invalid_count(self) -> int:
        return int(self.invalid.sum())

    @property
    def n(self) -> int:
        return int(self.counts.sum()) + self.invalid_count

    @property
    def support(self) -> np.ndarray:
        """Truth samples per class that enter recall denominators."""
        s = self.counts.sum(axis=1)
        if self.mode == COUNT_AS_WRONG:
            s = s + self.invalid
        return s


def per_class_recall(cm: ConfusionMatrix) -> list[float | None]:
    support = cm.support
    diag = np.diag(cm.counts)
    return [float(diag[i] / support[i]) if support[i] else None for i in range(len(cm.classes))]


def balanced_accuracy(cm: ConfusionMatrix, drop_empty: bool = False) -> float:
    """Mean per-class recall.

    A class with no truth samples raises :class:`EmptyClass` unless
    ``drop_empty`` is set, in which case it is skipped (and logged).
    """
    recalls = per_class_recall(cm)
    kept = []
    for i, r in enumerate(recalls):
        if r is None:
            if not drop_empty:
                raise EmptyClass(i, cm.classes[i])
            log.info("dropping class %r with no truth samples from balanced accuracy", cm.classes[i])
            continue
        kept.append(r)
    if not kept:
        raise EmptyClass(0, cm.classes[0] if cm.classes else None)
    return float(sum(kept) / len(kept))


def _one_vs_rest_f1(cm: ConfusionMatrix, i: int) -> float:
    tp = int(cm.counts[i, i])
    fp = int(cm.counts[:, i].sum()) - tp
    fn = int(cm.support[i]) - tp
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def f1_binary(cm: ConfusionMatrix, positive_class: Hashable = 1) -> float:
    if len(cm.classes) != 2:
        raise MetricError("f1_binary needs a 2-class matrix")
    return _one_vs_rest_f1(cm, cm.classes.index(positive_class))


def weighted_f1(cm: ConfusionMatrix) -> float:
    """Support-weighted mean of one-vs-rest F1 (classes without support weigh 0)."""
    if len(cm.classes) < 2:
        raise MetricError("weighted_f1 needs at least 2 classes")
    support = cm.support
    total = int(support.sum())
    if total == 0:
        return 0.0
    return float(sum(support[i] * _one_vs_rest_f1(cm, i) for i in range(len(cm.classes))) / total)


def mae(truths: Sequence[int], preds: Sequence[int]) -> float:
    if len(truths) != len(preds):
        raise LengthMismatch(f"{len(truths)} truths vs {len(preds)} predictions")
    if not truths:
        raise MetricError("mae of an empty sample")
    return float(sum(abs(int(y) - int(p)) for y, p in zip(truths, preds)) / len(truths))


def mae_with_invalid(
    truths: Sequence[int], preds: Sequence[int | None], scale_range: tuple[int, int], mode: str = COUNT_AS_WRONG
) -> float | None:
    """MAE where an invalid prediction is either dropped or charged the largest possible error."""
    if len(truths) != len(preds):
        raise LengthMismatch(f"{len(truths)} truths vs {len(preds)} predictions")
    lo, hi = scale_range
    ys, ps = [], []
    for y, p in zip(truths, preds):
        if p is None:
            if mode == EXCLUDE:
                continue
            p = lo if hi - y < y - lo else hi  # farthest end of the scale
        ys.append(y)
        ps.append(p)
    return mae(ys, ps) if ys else None


def multilabel_scores(
    truths: Sequence[tuple[int, int]], preds: Sequence[tuple[int, int]]
) -> dict[str, float]:
    """Partial-credit scores over (depression, ptsd) bit pairs.

    ``mean_credit`` averages matched-bits/2; ``grouped_balanced_credit`` is
    the unweighted mean of per-truth-combination mean credit (empty groups
    skipped); ``micro_f1`` pools all 2n sub-decisions with positive =
    disorder present.
    """
    if len(truths) != len(preds):
        raise LengthMismatch(f"{len(truths)} truths vs {len(preds)} predictions")
    if not truths:
        raise MetricError("multilabel_scores of an empty sample")
    credits = []
    groups: dict[tuple[int, int], list[float]] = {}
    tp = fp = fn = 0
    for t, p in zip(truths, preds):
        t = (int(t[0]), int(t[1]))
        p = (int(p[0]), int(p[1]))
        c = ((t[0] == p[0]) + (t[1] == p[1])) / 2
        credits.append(c)
        groups.setdefault(t, []).append(c)
        for tb, pb in zip(t, p):
            tp += tb and pb
            fp += (not tb) and pb
            fn += tb and (not pb)
    micro = 2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 1.0
    return {
        "mean_credit": float(sum(credits) / len(credits)),
        "grouped_balanced_credit": float(sum(sum(g) / len(g) for g in groups.values()) / len(groups)),
        "micro_f1": float(micro),
    }


@dataclass
class MetricReport:
    balanced_accuracy: float | None
    f1: float | None
    mae: float | None
    per_class_recall: list[float | None]
    invalid_rate: float
    n: int
    invalid_count: int = 0
    classes: list = field(default_factory=list)
    scoring_mode: str = COUNT_AS_WRONG
    extras: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("balanced_accuracy", "f1", "mae", "invalid_rate"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                raise MetricError(f"{name} is not finite: {v}")

    def to_dict(self) -> dict:
        return asdict(self)


def build_report(
    kind: str,
    truths: Sequence,
    preds: Sequence,
    classes: Sequence,
    mode: str = COUNT_AS_WRONG,
    positive_class: Hashable = 1,
) -> MetricReport:
    """Score one cell. ``kind`` is binary, severity or multiclass; ``preds`` uses ``None`` for invalid."""
    cm = ConfusionMatrix.from_labels(truths, preds, classes, mode)
    n = cm.n
    scored = int(cm.support.sum())
    ba = f1 = err = None
    if scored:
        ba = balanced_accuracy(cm, drop_empty=True)
        f1 = f1_binary(cm, positive_class) if kind == "binary" else weighted_f1(cm)
        if kind == "severity":
            err = mae_with_invalid(list(truths), list(preds), (min(classes), max(classes)), mode)
    return MetricReport(
        balanced_accuracy=ba,
        f1=f1,
        mae=err,
        per_class_recall=per_class_recall(cm),
        invalid_rate=cm.invalid_count / n if n else 0.0,
        n=n,
        invalid_count=cm.invalid_count,
        classes=list(classes),
        scoring_mode=mode,
    )
