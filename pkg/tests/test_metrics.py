import numpy as np
import pytest

from modefuse.errors import DegenerateRocError, DimensionError, EmptyEvaluationError
from modefuse.metrics import (
    ConfusionCounts,
    auc_pairwise,
    confusion,
    metric_set,
    positive_score,
    roc_and_auc,
)


class TestConfusion:
    def test_hand_count(self):
        c = confusion([-1, -1, 1, 1], [-1, 1, 1, 1], positive=-1)
        assert (c.tp, c.fn, c.tn, c.fp) == (1, 1, 2, 0)

    def test_identity_predictions(self):
        truth = [-1, 1, 1, -1, -1]
        c = confusion(truth, truth, positive=-1)
        assert c.fp == 0 and c.fn == 0
        assert c.tp + c.tn == 5

    def test_random_against_loop_oracle(self):
        rng = np.random.default_rng(0)
        truth = rng.choice([-1, 1], size=200)
        pred = rng.choice([-1, 1], size=200)
        c = confusion(truth, pred, positive=-1)
        tp = fp = tn = fn = 0
        for t, p in zip(truth, pred):
            if t == -1 and p == -1:
                tp += 1
            elif t != -1 and p == -1:
                fp += 1
            elif t != -1 and p != -1:
                tn += 1
            else:
                fn += 1
        assert (c.tp, c.fp, c.tn, c.fn) == (tp, fp, tn, fn)
        assert c.total == 200

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            confusion([1, -1], [1], positive=-1)


class TestMetricSet:
    def test_sensitivity_ratio(self):
        m = metric_set(ConfusionCounts(tp=50, fp=0, tn=0, fn=10))
        assert m.sensitivity == pytest.approx(50 / 60)

    def test_perfect_classifier(self):
        m = metric_set(ConfusionCounts(tp=1, fp=0, tn=1, fn=0))
        assert (m.accuracy, m.sensitivity, m.specificity, m.f1) == (1.0, 1.0, 1.0, 1.0)

    def test_no_positive_predictions(self):
        m = metric_set(ConfusionCounts(tp=0, fp=0, tn=3, fn=2))
        assert m.f1 == 0.0
        assert m.sensitivity == 0.0

    def test_zero_denominator_returns_undefined(self):
        m = metric_set(ConfusionCounts(tp=2, fp=0, tn=0, fn=1))
        assert m.specificity is None
        assert m.accuracy == pytest.approx(2 / 3)

    def test_empty_evaluation(self):
        with pytest.raises(EmptyEvaluationError):
            metric_set(ConfusionCounts(0, 0, 0, 0))

    def test_values_in_unit_interval(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            tp, fp, tn, fn = rng.integers(0, 20, size=4)
            if tp + fp + tn + fn == 0:
                continue
            m = metric_set(ConfusionCounts(int(tp), int(fp), int(tn), int(fn)))
            for v in (m.accuracy, m.sensitivity, m.specificity, m.f1):
                assert v is None or 0.0 <= v <= 1.0


class TestRocAuc:
    def test_perfect_separation(self):
        _, auc = roc_and_auc([-1, -1, 1, 1], [0.9, 0.8, 0.2, 0.1], positive=-1)
        assert auc == 1.0

    def test_all_scores_equal(self):
        _, auc = roc_and_auc([-1, 1, -1, 1], [0.5] * 4, positive=-1)
        assert auc == 0.5

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(4)
        truth = rng.choice([-1, 1], size=50)
        truth[:2] = [-1, 1]
        scores = rng.uniform(0, 1, size=50).round(1)  # force ties
        _, auc = roc_and_auc(truth, scores, positive=-1)
        assert auc == pytest.approx(auc_pairwise(truth, scores, positive=-1), abs=1e-9)

    def test_curve_shape(self):
        rng = np.random.default_rng(6)
        truth = np.concatenate([np.full(10, -1), np.full(10, 1)])
        scores = rng.uniform(0, 1, size=20)
        curve, _ = roc_and_auc(truth, scores, positive=-1)
        pts = curve.points
        assert pts[0].tolist() == [0.0, 0.0]
        assert pts[-1].tolist() == [1.0, 1.0]
        assert np.all(np.diff(pts[:, 0]) >= 0)
        assert np.all(np.diff(pts[:, 1]) >= 0)
        assert np.all(np.diff(curve.thresholds) < 0)

    def test_single_class_rejected(self):
        with pytest.raises(DegenerateRocError):
            roc_and_auc([1, 1, 1], [0.2, 0.4, 0.6], positive=-1)

    def test_label_swap_duality(self):
        rng = np.random.default_rng(8)
        truth = rng.choice([-1, 1], size=40)
        truth[:2] = [-1, 1]
        pred = rng.choice([-1, 1], size=40)
        scores = rng.uniform(0, 1, size=40)
        c_pos = confusion(truth, pred, positive=-1)
        c_neg = confusion(truth, pred, positive=1)
        m_pos, m_neg = metric_set(c_pos), metric_set(c_neg)
        assert m_pos.sensitivity == pytest.approx(m_neg.specificity)
        assert m_pos.specificity == pytest.approx(m_neg.sensitivity)
        _, auc_pos = roc_and_auc(truth, scores, positive=-1)
        _, auc_swapped = roc_and_auc(truth, scores, positive=1)
        assert auc_swapped == pytest.approx(1.0 - auc_pos, abs=1e-12)
        _, auc_negated = roc_and_auc(truth, 1.0 - scores, positive=1)
        assert auc_negated == pytest.approx(auc_pos, abs=1e-12)


def test_positive_score_orientation():
    assert positive_score(-1, 0.9, positive=-1) == 0.9
    assert positive_score(1, 0.9, positive=-1) == pytest.approx(0.1)
