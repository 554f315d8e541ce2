"""k-fold cross-validation, accuracy, ROC/AUC and report assembly."""
import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLabels, FoldError, InvalidK, LengthMismatch
from .numerics import RNG_ALGORITHM, derive_seed, make_rng


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    fold_of: np.ndarray
    seed: int

    def test_rows(self, fold):
        return np.flatnonzero(self.fold_of == fold)

    def train_rows(self, fold):
        return np.flatnonzero(self.fold_of != fold)

    def sizes(self):
        return np.bincount(self.fold_of, minlength=self.k)


def kfold_split(n, k, seed):
    """Shuffle row indices with ``seed`` and cut them into k contiguous chunks.

    The first ``n % k`` folds receive one extra row.
    """
    if not 2 <= k <= n:
        raise InvalidK(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = make_rng(derive_seed(seed, "kfold")).permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    for fold, chunk in enumerate(np.array_split(perm, k)):
        fold_of[chunk] = fold
    return FoldAssignment(k, fold_of, seed)


def accuracy(predicted, actual):
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape or predicted.size == 0:
        raise LengthMismatch(f"lengths {predicted.size} and {actual.size} must match and be >= 1")
    return float(np.mean(predicted == actual))


@dataclass(frozen=True)
class RocCurve:
    points: tuple  # (fpr, tpr) pairs, (0, 0) first and (1, 1) last
    auc: float


def roc_auc(scores, labels):
    """ROC curve by a descending-score sweep (tied scores form one step) and its trapezoidal area."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise LengthMismatch("scores and labels differ in length")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels("ROC needs at least one positive and one negative")
    order = np.argsort(-scores, kind="stable")
    s, p = scores[order], pos[order]
    tp = np.cumsum(p)
    fp = np.cumsum(~p)
    # keep the last index of each run of equal scores
    last = np.r_[s[1:] != s[:-1], True]
    tpr = np.r_[0.0, tp[last] / n_pos]
    fpr = np.r_[0.0, fp[last] / n_neg]
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(tuple(zip(fpr.tolist(), tpr.tolist())), auc)


# --------------------------------------------------------------------------
# Cross-validation
# --------------------------------------------------------------------------
@dataclass
class FoldOutput:
    labels: np.ndarray
    scores: np.ndarray | None = None  # positive-class scores, binary task only


@dataclass
class EvaluationReport:
    config: dict
    fold_accuracies: list
    mean_cv_score: float
    fold_sizes: list
    fold_aucs: list = field(default_factory=list)  # None where undefined
    mean_auc: float | None = None
    roc_curves: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def binary(self):
        return bool(self.fold_aucs)

    def to_csv(self):
        buf = io.StringIO()
        for key, value in self.header_items():
            buf.write(f"# {key}: {value}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fold", "n_test", "accuracy", "auc"])
        for i, acc in enumerate(self.fold_accuracies):
            auc = self.fold_aucs[i] if self.binary else None
            w.writerow([i + 1, self.fold_sizes[i], _fmt(acc), "" if auc is None else _fmt(auc)])
        w.writerow(["mean", sum(self.fold_sizes), _fmt(self.mean_cv_score),
                    "" if self.mean_auc is None else _fmt(self.mean_auc)])
        return buf.getvalue()

    def roc_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fold", "fpr", "tpr"])
        for i, curve in enumerate(self.roc_curves):
            if curve is None:
                continue
            for fpr, tpr in curve.points:
                w.writerow([i + 1, _fmt(fpr), _fmt(tpr)])
        return buf.getvalue()

    def header_items(self):
        return [
            ("config", json.dumps(self.config, sort_keys=True)),
            ("rng", RNG_ALGORITHM),
            ("leakage", self.config.get("leakage", "n/a")),
        ] + [("note", n) for n in self.notes]

    def to_text(self):
        lines = [f"{k}: {v}" for k, v in self.header_items()]
        cols = [f"Fold {i + 1}" for i in range(len(self.fold_accuracies))]
        rows = [["Accuracy (%)"] + [_pct(a) for a in self.fold_accuracies] + [_pct(self.mean_cv_score)]]
        if self.binary:
            rows.append(["AUC (%)"] + [_pct(a) for a in self.fold_aucs] + [_pct(self.mean_auc)])
        lines.append("")
        lines.extend(aligned_table(["Metric"] + cols + ["Mean"], rows))
        return "\n".join(lines) + "\n"


def _fmt(x):
    return f"{x:.6f}"


def _pct(x):
    return "undef" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{100 * x:.2f}"


def aligned_table(header, rows):
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
    fmt = lambda r: "  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip()
    return [fmt(header), fmt(["-" * w for w in widths])] + [fmt(r) for r in rows]


def cross_validate(recipe, dataset, folds, seed=None):
    """Fit a fresh model per fold on the other k-1 folds and score the held-out fold.

    ``recipe`` needs ``fit_predict(train, test, seed) -> FoldOutput`` and a
    ``describe()`` dict. ``seed`` (default ``folds.seed``) is split into one
    child seed per fold.
    """
    seed = folds.seed if seed is None else seed
    binary = dataset.scheme.n_classes == 2
    accs, sizes, aucs, curves, notes = [], [], [], [], []
    for fold in range(folds.k):
        train = dataset.subset(folds.train_rows(fold))
        test = dataset.subset(folds.test_rows(fold))
        try:
            out = recipe.fit_predict(train, test, derive_seed(seed, "fold", fold))
        except Exception as exc:
            raise FoldError(fold + 1, exc) from exc
        accs.append(accuracy(out.labels, test.labels))
        sizes.append(int(test.n_rows))
        if binary:
            try:
                curve = roc_auc(out.scores, test.labels)
            except DegenerateLabels:
                curve = None
                notes.append(f"fold {fold + 1}: single class in held-out rows, AUC undefined and excluded")
            curves.append(curve)
            aucs.append(None if curve is None else curve.auc)
    defined = [a for a in aucs if a is not None]
    config = dict(recipe.describe())
    config.update(k=folds.k, fold_seed=folds.seed, seed=seed)
    return EvaluationReport(
        config=config,
        fold_accuracies=accs,
        mean_cv_score=float(np.mean(accs)),
        fold_sizes=sizes,
        fold_aucs=aucs,
        mean_auc=float(np.mean(defined)) if defined else None,
        roc_curves=curves,
        notes=notes,
    )
