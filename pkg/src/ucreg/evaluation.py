"""ROC curves, AUC, cutoffs, confusion matrices, and the holdout split."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, TargetDecomposition
from .errors import InsufficientDataError, LabelMismatchError, UndefinedRocError
from .logit import MultinomialModel, probability_matrix


def _json_threshold(t: float):
    """Infinities are not valid JSON; encode them as strings."""
    if np.isposinf(t):
        return "inf"
    if np.isneginf(t):
        return "-inf"
    return float(t)


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    sensitivity: float
    specificity: float

    @property
    def fpr(self) -> float:
        return 1.0 - self.specificity


@dataclass(frozen=True)
class RocCurve:
    """Swept (threshold, TPR, TNR) points with trapezoid AUC.

    Items score positive when score >= threshold; the first point
    (threshold -inf) classifies everything positive, the last (+inf)
    nothing.  The optimal cutoff maximizes Youden J with the lowest
    threshold breaking ties.
    """

    points: tuple[RocPoint, ...]
    auc: float
    optimal_threshold: float
    optimal_j: float

    def to_json_dict(self, model_meta: dict | None = None) -> dict:
        out = {
            "points": [
                {
                    "t": _json_threshold(p.threshold),
                    "tpr": p.sensitivity,
                    "fpr": p.fpr,
                }
                for p in self.points
            ],
            "auc": self.auc,
            "optimal": {
                "t": _json_threshold(self.optimal_threshold),
                "j": self.optimal_j,
            },
        }
        if model_meta is not None:
            out["model_meta"] = model_meta
        return out


def roc_curve(scores, truth) -> RocCurve:
    """ROC over the distinct score values (ties merged into one step)."""
    scores = np.asarray(scores, dtype=float)
    truth = np.asarray(truth)
    if scores.shape != truth.shape:
        raise ValueError("scores and truth must have equal length")
    pos = truth == 1
    P = int(pos.sum())
    N = int(len(truth) - P)
    if P == 0 or N == 0:
        raise UndefinedRocError("truth must contain both classes")

    distinct = np.unique(scores)
    # positives/negatives strictly below each distinct value
    pos_below = np.concatenate(
        ([0], np.cumsum([int(pos[scores == s].sum()) for s in distinct]))
    )
    neg_below = np.concatenate(
        ([0], np.cumsum([int((~pos)[scores == s].sum()) for s in distinct]))
    )

    thresholds = [-np.inf] + list(distinct[1:]) + [np.inf]
    points = []
    for i, t in enumerate(thresholds):
        # threshold index i admits scores >= distinct[i] (everything for -inf)
        tp = P - pos_below[i]
        fp = N - neg_below[i]
        points.append(
            RocPoint(
                threshold=float(t),
                sensitivity=tp / P,
                specificity=1.0 - fp / N,
            )
        )

    # trapezoid over FPR ascending = threshold descending
    auc = 0.0
    for a, b in zip(points[1:], points[:-1]):
        auc += (b.fpr - a.fpr) * (a.sensitivity + b.sensitivity) / 2.0

    best = points[0]
    best_j = best.sensitivity + best.specificity - 1.0
    for p in points[1:]:
        j = p.sensitivity + p.specificity - 1.0
        if j > best_j:
            best, best_j = p, j
    return RocCurve(
        points=tuple(points),
        auc=float(auc),
        optimal_threshold=best.threshold,
        optimal_j=float(best_j),
    )


def auc_pairs_oracle(scores, truth) -> float:
    """O(n^2) concordant-pair probability; tied pairs count one half.

    Independent of the trapezoid path; used to cross-check it.
    """
    scores = np.asarray(scores, dtype=float)
    truth = np.asarray(truth)
    s_pos = scores[truth == 1]
    s_neg = scores[truth != 1]
    if len(s_pos) == 0 or len(s_neg) == 0:
        raise UndefinedRocError("truth must contain both classes")
    diff = s_pos[:, None] - s_neg[None, :]
    wins = (diff > 0).sum() + 0.5 * (diff == 0).sum()
    return float(wins / (len(s_pos) * len(s_neg)))


@dataclass(frozen=True)
class ConfusionMatrix:
    """k x k counts: rows are true labels, columns predicted argmax."""

    labels: tuple[str, ...]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_json_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "counts": [[int(v) for v in row] for row in self.counts],
        }


def confusion(
    mm: MultinomialModel, ds: Dataset, dec: TargetDecomposition
) -> ConfusionMatrix:
    """Argmax-prediction confusion counts over the decomposition's rows."""
    unknown = [l for l in dec.labels if l not in mm.labels]
    if unknown:
        raise LabelMismatchError(f"truth labels not in model: {unknown}")
    pm = probability_matrix(mm, ds, rows=dec.row_indices)
    # positions within dec of the rows that survived the missing-cell filter
    pos_by_row = {int(r): i for i, r in enumerate(dec.row_indices)}
    counts = np.zeros((mm.k, mm.k), dtype=int)
    truth_idx = np.argmax(dec.presence, axis=1)
    for mat_row, ds_row in enumerate(pm.row_indices):
        true_lab = dec.labels[truth_idx[pos_by_row[int(ds_row)]]]
        i = mm.labels.index(true_lab)
        j = int(np.argmax(pm.matrix[mat_row]))
        counts[i, j] += 1
    return ConfusionMatrix(labels=mm.labels, counts=counts)


def split(ds: Dataset, ratio: float, seed: int):
    """Deterministic shuffled holdout split.

    ratio is the test fraction; the test side gets floor(n * ratio) rows
    but at least one.  Returns (train_indices, test_indices), each sorted.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    n = ds.n_rows
    if n < 2:
        raise InsufficientDataError("need at least 2 rows to split")
    n_test = max(1, int(np.floor(n * ratio)))
    perm = np.random.default_rng(seed).permutation(n)
    test = np.sort(perm[:n_test])
    train = np.sort(perm[n_test:])
    return train, test
