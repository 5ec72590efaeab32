"""Scoring of prediction files against ground truth.

Conventions: 0/0 metric cells resolve to 0 and a warning is recorded;
macro-ROC averages per-class TPR on a shared 1001-point FPR grid so curves
from different classifiers stay comparable; AUC is trapezoidal on that grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError

ROC_GRID_POINTS = 1001


@dataclass(frozen=True)
class PredictionScores:
    """Per-sample class-score rows; class order fixes score column order."""

    sample_ids: tuple[str, ...]
    true_classes: np.ndarray  # (N,) int class indices
    scores: np.ndarray  # (N, C) floats
    classes: tuple[str, ...]

    def __post_init__(self):
        n = len(self.sample_ids)
        if n == 0:
            raise DataError("prediction scores are empty")
        if len(set(self.sample_ids)) != n:
            raise DataError("duplicate sample ids in prediction scores")
        if self.true_classes.shape != (n,):
            raise DataError("true_classes length mismatch")
        if self.scores.shape != (n, len(self.classes)):
            raise DataError("score matrix shape mismatch")
        if not np.all(np.isfinite(self.scores)):
            raise DataError("non-finite prediction scores")
        if np.any(self.true_classes < 0) or np.any(self.true_classes >= len(self.classes)):
            raise DataError("true class outside class list")

    @classmethod
    def load_tsv(cls, path, classes: Sequence[str] | None = None) -> "PredictionScores":
        """``sample_id<TAB>true_class<TAB>score_0..score_{C-1}`` with header.

        When ``classes`` is omitted the class order is the sorted set of
        observed true-class names, which must match the score column count.
        """
        sample_ids: list[str] = []
        true_names: list[str] = []
        rows: list[list[float]] = []
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if len(header) < 3 or header[0] != "sample_id" or header[1] != "true_class":
                raise DataError(f"{path}: bad scores header {header!r}")
            n_score_cols = len(header) - 2
            for lineno, raw in enumerate(fh, 2):
                line = raw.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != n_score_cols + 2:
                    raise DataError(f"{path}:{lineno}: wrong field count")
                sample_ids.append(parts[0])
                true_names.append(parts[1])
                rows.append([float(v) for v in parts[2:]])
        class_list = tuple(classes) if classes is not None else tuple(sorted(set(true_names)))
        if len(class_list) != n_score_cols:
            raise DataError(
                f"{path}: {n_score_cols} score columns but {len(class_list)} classes"
            )
        class_index = {c: i for i, c in enumerate(class_list)}
        try:
            true_idx = np.array([class_index[t] for t in true_names], dtype=int)
        except KeyError as exc:
            raise DataError(f"{path}: true class {exc} not in class list")
        return cls(
            sample_ids=tuple(sample_ids),
            true_classes=true_idx,
            scores=np.array(rows, dtype=np.float64),
            classes=class_list,
        )

    def write_tsv(self, path) -> None:
        c = len(self.classes)
        lines = ["sample_id\ttrue_class\t" + "\t".join(f"score_{i}" for i in range(c))]
        for sid, t, row in zip(self.sample_ids, self.true_classes, self.scores):
            lines.append(
                f"{sid}\t{self.classes[int(t)]}\t" + "\t".join(repr(float(v)) for v in row)
            )
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


def confusion_matrix(p: PredictionScores) -> np.ndarray:
    """C x C counts, row = true class, column = argmax-predicted class.

    Argmax ties break toward the lowest class index.
    """
    c = len(p.classes)
    cm = np.zeros((c, c), dtype=np.int64)
    predicted = np.argmax(p.scores, axis=1)  # first maximum wins
    for t, pred in zip(p.true_classes, predicted):
        cm[int(t), int(pred)] += 1
    return cm


def accuracy(cm: np.ndarray) -> float:
    total = int(cm.sum())
    if total == 0:
        raise DataError("empty confusion matrix")
    return float(np.trace(cm)) / total


@dataclass
class MetricWarnings:
    """Records every 0/0 cell that was resolved to 0."""

    entries: list[str] = field(default_factory=list)

    def flag(self, what: str) -> None:
        self.entries.append(what)


def _safe_div(num: float, den: float, what: str, warnings: MetricWarnings | None) -> float:
    if den == 0:
        if warnings is not None:
            warnings.flag(what)
        return 0.0
    return num / den


def per_class_prf(cm: np.ndarray, warnings: MetricWarnings | None = None):
    """Per-class precision, recall, F1 with the 0/0 -> 0 convention."""
    c = cm.shape[0]
    precision = np.zeros(c)
    recall = np.zeros(c)
    f1 = np.zeros(c)
    for k in range(c):
        tp = float(cm[k, k])
        precision[k] = _safe_div(tp, float(cm[:, k].sum()), f"precision[{k}] 0/0", warnings)
        recall[k] = _safe_div(tp, float(cm[k, :].sum()), f"recall[{k}] 0/0", warnings)
        f1[k] = _safe_div(
            2 * precision[k] * recall[k], precision[k] + recall[k], f"f1[{k}] 0/0", warnings
        )
    return precision, recall, f1


def macro_f1(cm: np.ndarray, warnings: MetricWarnings | None = None) -> float:
    if cm.sum() == 0:
        raise DataError("empty confusion matrix")
    _, _, f1 = per_class_prf(cm, warnings)
    return float(f1.mean())


@dataclass(frozen=True)
class SensitivitySpecificity:
    sensitivity: np.ndarray  # per class, one-vs-rest
    specificity: np.ndarray
    macro_sensitivity: float
    macro_specificity: float
    warnings: tuple[str, ...]


def sensitivity_specificity(cm: np.ndarray) -> SensitivitySpecificity:
    """One-vs-rest sensitivity/specificity per class plus unweighted macros."""
    if cm.sum() == 0:
        raise DataError("empty confusion matrix")
    c = cm.shape[0]
    warnings = MetricWarnings()
    sens = np.zeros(c)
    spec = np.zeros(c)
    total = float(cm.sum())
    for k in range(c):
        tp = float(cm[k, k])
        fn = float(cm[k, :].sum()) - tp
        fp = float(cm[:, k].sum()) - tp
        tn = total - tp - fn - fp
        sens[k] = _safe_div(tp, tp + fn, f"sensitivity[{k}] 0/0", warnings)
        spec[k] = _safe_div(tn, tn + fp, f"specificity[{k}] 0/0", warnings)
    return SensitivitySpecificity(
        sensitivity=sens,
        specificity=spec,
        macro_sensitivity=float(sens.mean()),
        macro_specificity=float(spec.mean()),
        warnings=tuple(warnings.entries),
    )


def _binary_roc_points(scores: np.ndarray, positive: np.ndarray):
    """Threshold-sweep ROC staircase for one class, (fpr, tpr) ascending.

    Predict positive when score >= threshold; thresholds are the unique
    scores, swept from high to low, framed by (0,0) and (1,1).
    """
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("degenerate single-class truth for ROC")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = positive[order]
    tps = np.cumsum(sorted_pos)
    fps = np.cumsum(~sorted_pos)
    # keep the last index of each tied-score run
    distinct = np.nonzero(np.diff(sorted_scores))[0]
    idx = np.concatenate([distinct, [len(scores) - 1]])
    tpr = np.concatenate([[0.0], tps[idx] / n_pos])
    fpr = np.concatenate([[0.0], fps[idx] / n_neg])
    return fpr, tpr


@dataclass(frozen=True)
class RocResult:
    fpr_grid: np.ndarray
    macro_tpr: np.ndarray
    auc: float
    per_class: dict[str, tuple[np.ndarray, np.ndarray]]  # raw staircase points


def macro_roc(p: PredictionScores, grid_points: int = ROC_GRID_POINTS) -> RocResult:
    """One-vs-rest ROC per class, macro-averaged pointwise on a shared FPR grid."""
    present = np.unique(p.true_classes)
    if len(present) < 2:
        raise DataError("macro ROC needs at least two classes in the truth")
    grid = np.linspace(0.0, 1.0, grid_points)
    tprs = []
    per_class = {}
    for k in present:
        fpr, tpr = _binary_roc_points(p.scores[:, k], p.true_classes == k)
        per_class[p.classes[int(k)]] = (fpr, tpr)
        tprs.append(np.interp(grid, fpr, tpr))
    macro_tpr = np.mean(tprs, axis=0)
    auc = float(np.trapezoid(macro_tpr, grid))
    return RocResult(fpr_grid=grid, macro_tpr=macro_tpr, auc=auc, per_class=per_class)


def _binary_pr_points(scores: np.ndarray, positive: np.ndarray):
    """(recall, precision) points by threshold sweep, recall ascending.

    The sweep stops once recall first reaches 1: later thresholds only add
    false positives and are not part of the curve.
    """
    n_pos = int(positive.sum())
    if n_pos == 0:
        raise DataError("degenerate truth without positives for PR")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = positive[order]
    tps = np.cumsum(sorted_pos)
    preds = np.arange(1, len(scores) + 1)
    distinct = np.nonzero(np.diff(sorted_scores))[0]
    idx = np.concatenate([distinct, [len(scores) - 1]])
    recall = tps[idx] / n_pos
    precision = tps[idx] / preds[idx]
    full = np.nonzero(recall >= 1.0)[0]
    if len(full):
        stop = full[0] + 1
        recall, precision = recall[:stop], precision[:stop]
    return recall, precision


@dataclass(frozen=True)
class PrResult:
    recall_grid: np.ndarray
    macro_precision: np.ndarray
    per_class: dict[str, tuple[np.ndarray, np.ndarray]]


def macro_pr(p: PredictionScores, grid_points: int = ROC_GRID_POINTS) -> PrResult:
    """One-vs-rest precision-recall, macro-averaged on a shared recall grid."""
    present = np.unique(p.true_classes)
    if len(present) < 2:
        raise DataError("macro PR needs at least two classes in the truth")
    grid = np.linspace(0.0, 1.0, grid_points)
    precisions = []
    per_class = {}
    for k in present:
        recall, precision = _binary_pr_points(p.scores[:, k], p.true_classes == k)
        per_class[p.classes[int(k)]] = (recall, precision)
        precisions.append(np.interp(grid, recall, precision))
    return PrResult(
        recall_grid=grid,
        macro_precision=np.mean(precisions, axis=0),
        per_class=per_class,
    )


def score_report(p: PredictionScores) -> dict:
    """All scalar metrics plus the macro curves, JSON-serializable."""
    cm = confusion_matrix(p)
    warnings = MetricWarnings()
    f1 = macro_f1(cm, warnings)
    ss = sensitivity_specificity(cm)
    report = {
        "classes": list(p.classes),
        "n_samples": len(p.sample_ids),
        "confusion_matrix": cm.tolist(),
        "accuracy": accuracy(cm),
        "macro_f1": f1,
        "per_class_sensitivity": ss.sensitivity.tolist(),
        "per_class_specificity": ss.specificity.tolist(),
        "macro_sensitivity": ss.macro_sensitivity,
        "macro_specificity": ss.macro_specificity,
        "warnings": list(warnings.entries) + list(ss.warnings),
    }
    try:
        report["macro_roc_auc"] = macro_roc(p).auc
    except DataError as exc:
        report["macro_roc_auc"] = None
        report["warnings"].append(str(exc))
    return report
