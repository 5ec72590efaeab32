import numpy as np
import pytest

from gig.errors import DataError
from gig.metrics import (
    PredictionScores,
    accuracy,
    confusion_matrix,
    macro_f1,
    macro_pr,
    macro_roc,
    score_report,
    sensitivity_specificity,
)


def scores_from(y_true, score_rows, classes=("c0", "c1")):
    return PredictionScores(
        sample_ids=tuple(f"s{i}" for i in range(len(y_true))),
        true_classes=np.array(y_true),
        scores=np.array(score_rows, dtype=np.float64),
        classes=tuple(classes),
    )


# the hand-tally fixture: y=[0,0,1,1], argmax preds=[0,1,1,1]
HAND = scores_from([0, 0, 1, 1], [[0.9, 0.1], [0.2, 0.8], [0.3, 0.7], [0.1, 0.9]])


def test_confusion_matrix_hand_tally():
    assert confusion_matrix(HAND).tolist() == [[1, 1], [0, 2]]


def test_confusion_matrix_perfect_and_single():
    perfect = scores_from([0, 1, 1], [[1, 0], [0, 1], [0, 1]])
    assert confusion_matrix(perfect).tolist() == [[1, 0], [0, 2]]
    single = scores_from([1], [[0.2, 0.8]])
    assert confusion_matrix(single).tolist() == [[0, 0], [0, 1]]


def test_argmax_tie_breaks_low_index():
    tied = scores_from([1], [[0.5, 0.5]])
    assert confusion_matrix(tied).tolist() == [[0, 0], [1, 0]]


def test_accuracy():
    cm = np.array([[1, 1], [0, 2]])
    assert accuracy(cm) == 0.75
    assert accuracy(np.diag([3, 4])) == 1.0
    assert accuracy(np.array([[0, 2], [3, 0]])) == 0.0
    with pytest.raises(DataError):
        accuracy(np.zeros((2, 2), dtype=int))


def test_macro_f1_hand_case():
    cm = np.array([[1, 1], [0, 2]])
    # class0: P=1, R=1/2, F1=2/3; class1: P=2/3, R=1, F1=4/5
    assert macro_f1(cm) == pytest.approx(11 / 15, abs=1e-12)


def test_macro_f1_perfect_and_majority_collapse():
    assert macro_f1(np.diag([5, 5])) == 1.0
    # predicting only class 0 on balanced data: F1 = [2/3, 0]
    collapse = np.array([[5, 0], [5, 0]])
    assert macro_f1(collapse) == pytest.approx(1 / 3, abs=1e-12)


def test_sensitivity_specificity_hand_case():
    result = sensitivity_specificity(np.array([[1, 1], [0, 2]]))
    assert result.sensitivity == pytest.approx([0.5, 1.0])
    assert result.specificity == pytest.approx([1.0, 0.5])
    assert result.macro_sensitivity == pytest.approx(0.75)
    assert result.macro_specificity == pytest.approx(0.75)


def test_sensitivity_absent_class_flagged():
    cm = np.array([[0, 0], [1, 3]])  # class 0 never true
    result = sensitivity_specificity(cm)
    assert result.sensitivity[0] == 0.0
    assert any("sensitivity[0]" in w for w in result.warnings)


def test_perfect_sensitivity_specificity():
    result = sensitivity_specificity(np.diag([4, 6]))
    assert result.macro_sensitivity == 1.0 and result.macro_specificity == 1.0


# ROC hand fixture: class-1 scores [0.1, 0.4, 0.35, 0.8] over y=[0,0,1,1]
ROC_FIXTURE = scores_from(
    [0, 0, 1, 1],
    [[0.9, 0.1], [0.6, 0.4], [0.65, 0.35], [0.2, 0.8]],
)


def test_macro_roc_hand_staircase():
    result = macro_roc(ROC_FIXTURE)
    fpr, tpr = result.per_class["c1"]
    assert fpr.tolist() == [0.0, 0.0, 0.5, 0.5, 1.0]
    assert tpr.tolist() == [0.0, 0.5, 0.5, 1.0, 1.0]
    assert result.auc == pytest.approx(0.75, abs=1e-3)


def test_macro_roc_perfect_separation():
    perfect = scores_from([0, 0, 1, 1], [[0.9, 0.1], [0.8, 0.2], [0.1, 0.9], [0.2, 0.8]])
    assert macro_roc(perfect).auc == pytest.approx(1.0, abs=1e-9)


def test_macro_roc_constant_scores_chance():
    constant = scores_from([0, 1, 0, 1], [[0.5, 0.5]] * 4)
    assert macro_roc(constant).auc == pytest.approx(0.5, abs=1e-9)


def test_macro_roc_monotone_transform_invariance():
    transformed = scores_from(
        [0, 0, 1, 1],
        np.exp(np.array([[0.9, 0.1], [0.6, 0.4], [0.65, 0.35], [0.2, 0.8]]) * 3.0),
    )
    assert macro_roc(transformed).auc == pytest.approx(macro_roc(ROC_FIXTURE).auc, abs=1e-12)


def test_macro_roc_degenerate_truth():
    with pytest.raises(DataError):
        macro_roc(scores_from([0, 0], [[0.5, 0.5], [0.4, 0.6]]))


def test_macro_pr_hand_points():
    result = macro_pr(ROC_FIXTURE)
    recall, precision = result.per_class["c1"]
    # sweep: t=0.8 -> (R=0.5, P=1); t=0.4 -> (0.5, 0.5); t=0.35 -> recall hits 1
    assert recall.tolist() == [0.5, 0.5, 1.0]
    assert precision.tolist() == [1.0, 0.5, 2 / 3]


def test_macro_pr_perfect_scores():
    perfect = scores_from([0, 0, 1, 1], [[0.9, 0.1], [0.8, 0.2], [0.1, 0.9], [0.2, 0.8]])
    result = macro_pr(perfect)
    for cls in ("c0", "c1"):
        recall, precision = result.per_class[cls]
        assert np.all(precision == 1.0)


def test_macro_pr_constant_scores_prevalence():
    constant = scores_from([0, 1, 1, 1], [[0.5, 0.5]] * 4)
    recall, precision = macro_pr(constant).per_class["c1"]
    assert precision == pytest.approx([0.75])  # class-1 prevalence
    recall0, precision0 = macro_pr(constant).per_class["c0"]
    assert precision0 == pytest.approx([0.25])


def test_permuting_classes_preserves_macros():
    flipped = scores_from(
        [1, 1, 0, 0],
        [[0.1, 0.9], [0.8, 0.2], [0.7, 0.3], [0.9, 0.1]],
        classes=("c1", "c0"),
    )
    original = scores_from([0, 0, 1, 1], [[0.9, 0.1], [0.2, 0.8], [0.3, 0.7], [0.1, 0.9]])
    cm_o, cm_f = confusion_matrix(original), confusion_matrix(flipped)
    assert cm_f.tolist() == cm_o[::-1, ::-1].tolist()
    assert macro_f1(cm_o) == pytest.approx(macro_f1(cm_f))
    so, sf = sensitivity_specificity(cm_o), sensitivity_specificity(cm_f)
    assert so.macro_sensitivity == pytest.approx(sf.macro_sensitivity)


def test_validation_errors():
    with pytest.raises(DataError):
        scores_from([], [])
    with pytest.raises(DataError):
        PredictionScores(
            sample_ids=("a", "a"),
            true_classes=np.array([0, 1]),
            scores=np.zeros((2, 2)),
            classes=("c0", "c1"),
        )
    with pytest.raises(DataError):
        scores_from([2], [[0.1, 0.9]])  # class index out of range


def test_tsv_round_trip(tmp_path):
    path = tmp_path / "scores.tsv"
    HAND.write_tsv(path)
    loaded = PredictionScores.load_tsv(path)
    assert loaded.classes == HAND.classes
    assert np.array_equal(loaded.true_classes, HAND.true_classes)
    assert np.allclose(loaded.scores, HAND.scores)


def test_score_report_end_to_end():
    report = score_report(HAND)
    assert report["accuracy"] == 0.75
    assert report["macro_f1"] == pytest.approx(11 / 15, abs=1e-12)
    assert report["confusion_matrix"] == [[1, 1], [0, 2]]
