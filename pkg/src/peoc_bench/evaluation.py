"""Binary-classifier evaluation: splits, ROC curves, AUC, aggregation.

Out-of-distribution is the positive class throughout. Tied scores change
classification together, so the ROC curve has one vertex per distinct
score and the trapezoidal AUC equals the Mann-Whitney pairwise statistic
(ties counted half).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, ParseError, RangeError, SingleClassInput

LABEL_IND = 0
LABEL_OOD = 1


@dataclass(frozen=True)
class ScoredSample:
    score: float
    label: int  # LABEL_IND or LABEL_OOD (the positive class)
    source: str = ""


@dataclass(frozen=True)
class RocCurve:
    """Threshold-swept (fpr, tpr) points, descending thresholds, and AUC.

    thresholds[0] is +inf for the mandatory (0, 0) vertex; thresholds[i]
    for i >= 1 is the i-th distinct score value in descending order.
    """

    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    def __len__(self) -> int:
        return len(self.fpr)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["threshold", "fpr", "tpr"])
        for t, f, r in zip(self.thresholds, self.fpr, self.tpr):
            writer.writerow([repr(float(t)), repr(float(f)), repr(float(r))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RocCurve":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["threshold", "fpr", "tpr"]:
            raise ParseError("not a ROC CSV (expected header threshold,fpr,tpr)")
        try:
            data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"bad numeric value in ROC CSV: {exc}") from exc
        if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != 3:
            raise ParseError("ROC CSV needs at least two threshold,fpr,tpr rows")
        fpr, tpr = data[:, 1], data[:, 2]
        return cls(fpr=fpr, tpr=tpr, thresholds=data[:, 0], auc=float(np.trapezoid(tpr, fpr)))


def train_test_split(samples: np.ndarray, ratio: tuple[int, int],
                     seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded uniform partition of the rows of `samples`.

    |train| = round(n * train_parts / (train_parts + test_parts)); the two
    outputs are disjoint and their union is the input (as index sets).
    """
    arr = np.asarray(samples)
    n = arr.shape[0]
    if n == 0:
        raise EmptyInput("cannot split an empty sample set")
    train_parts, test_parts = ratio
    if train_parts <= 0 or test_parts <= 0:
        raise RangeError("both split parts must be positive")
    n_train = int(round(n * train_parts / (train_parts + test_parts)))
    perm = np.random.default_rng(seed).permutation(n)
    return arr[perm[:n_train]], arr[perm[n_train:]]


def roc_curve(scores, labels=None) -> RocCurve:
    """ROC curve of OOD-positive scores with tie-grouped thresholds.

    Accepts either (scores, labels) vectors or a single sequence of
    ScoredSample. Thresholds sweep the distinct score values in
    descending order; all samples sharing a score flip to positive
    together.
    """
    if labels is None:
        samples = list(scores)
        if not samples:
            raise EmptyInput("no scored samples")
        s = np.array([x.score for x in samples], dtype=np.float64)
        y = np.array([x.label for x in samples])
    else:
        s = np.asarray(scores, dtype=np.float64)
        y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise EmptyInput("scores and labels must be equal-length vectors")
    pos = int((y == LABEL_OOD).sum())
    neg = int(s.size - pos)
    if pos == 0 or neg == 0:
        raise SingleClassInput("roc_curve needs at least one sample of each class")

    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = (y[order] == LABEL_OOD)

    # last index of each tie group marks one threshold vertex
    boundary = np.nonzero(np.diff(s_sorted))[0]
    last = np.append(boundary, s.size - 1)

    tp = np.concatenate([[0], np.cumsum(y_sorted)[last]]).astype(np.int64)
    fp = np.concatenate([[0], (last + 1)]).astype(np.int64) - tp
    tpr = tp / pos
    fpr = fp / neg
    thresholds = np.concatenate([[np.inf], s_sorted[last]])
    # trapezoid rule evaluated on the integer counts: exact, so perfect
    # separation yields exactly 1.0 and ties exactly their half-credit
    area2 = int(np.sum((fp[1:] - fp[:-1]) * (tp[1:] + tp[:-1])))
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds,
                    auc=area2 / (2.0 * pos * neg))


def auc(curve: RocCurve) -> float:
    """Area under the curve by trapezoidal integration over fpr."""
    return float(np.trapezoid(curve.tpr, curve.fpr))


def pairwise_auc(scores_ood, scores_ind) -> float:
    """Independent oracle: P(ood > ind) + 0.5 P(ood = ind) over all pairs."""
    o = np.asarray(scores_ood, dtype=np.float64)[:, None]
    i = np.asarray(scores_ind, dtype=np.float64)[None, :]
    wins = (o > i).sum() + 0.5 * (o == i).sum()
    return float(wins / (o.size * i.shape[1]))


@dataclass(frozen=True)
class ClassifierStats:
    """Cross-repeat AUC statistics for one classifier."""

    name: str
    n_repeats: int
    median: float
    mean: float
    std: float          # n-1 denominator; 0.0 when only one repeat (see flag)
    std_degenerate: bool
    min: float
    q1: float
    q3: float
    max: float


@dataclass(frozen=True)
class AggregateStats:
    per_classifier: dict[str, ClassifierStats]

    def names(self) -> list[str]:
        return list(self.per_classifier)


def aggregate(auc_by_classifier: dict[str, list[float]]) -> AggregateStats:
    """Median/mean/std/min/quartiles/max of per-repeat AUC values.

    Median uses the midpoint convention for even counts; a single repeat
    reports std 0.0 with the degenerate flag set.
    """
    if not auc_by_classifier:
        raise EmptyInput("no classifier results to aggregate")
    out: dict[str, ClassifierStats] = {}
    for name, values in auc_by_classifier.items():
        v = np.asarray(values, dtype=np.float64)
        if v.size == 0:
            raise EmptyInput(f"classifier {name!r} has no repeats")
        degenerate = v.size < 2
        q1, q3 = np.percentile(v, [25.0, 75.0])
        out[name] = ClassifierStats(
            name=name, n_repeats=int(v.size), median=float(np.median(v)),
            mean=float(v.mean()), std=0.0 if degenerate else float(v.std(ddof=1)),
            std_degenerate=degenerate, min=float(v.min()), q1=float(q1),
            q3=float(q3), max=float(v.max()))
    return AggregateStats(per_classifier=out)
