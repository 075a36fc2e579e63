import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import balanced_accuracy_score, f1_score, mean_absolute_error

from screenbench.metrics import (
    COUNT_AS_WRONG,
    EXCLUDE,
    ConfusionMatrix,
    EmptyClass,
    LengthMismatch,
    MetricError,
    MetricReport,
    balanced_accuracy,
    build_report,
    f1_binary,
    mae,
    mae_with_invalid,
    multilabel_scores,
    per_class_recall,
    weighted_f1,
)

from oracles import ba_naive, f1_naive, mae_naive, weighted_f1_naive


def cm(counts, invalid=None, mode=COUNT_AS_WRONG):
    n = len(counts)
    return ConfusionMatrix(list(range(n)), np.array(counts), invalid, mode)


def test_ba_examples():
    assert balanced_accuracy(cm([[5, 0], [0, 5]])) == 1.0
    assert balanced_accuracy(cm([[10, 0], [10, 0]])) == 0.5
    assert balanced_accuracy(cm([[3, 1], [2, 4]])) == pytest.approx((3 / 4 + 4 / 6) / 2, abs=1e-15)


def test_empty_class():
    with pytest.raises(EmptyClass) as exc:
        balanced_accuracy(cm([[3, 1], [0, 0]]))
    assert exc.value.index == 1
    assert balanced_accuracy(cm([[3, 1], [0, 0]]), drop_empty=True) == 0.75


def test_f1_examples():
    assert f1_binary(cm([[5, 0], [0, 5]])) == 1.0
    assert f1_binary(cm([[5, 0], [3, 0]])) == 0.0
    assert f1_binary(cm([[3, 1], [2, 4]]), 1) == pytest.approx(2 * 0.8 * (4 / 6) / (0.8 + 4 / 6), abs=1e-15)
    with pytest.raises(MetricError):
        f1_binary(cm([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))


def test_weighted_f1_examples():
    assert weighted_f1(cm([[2, 0, 0], [0, 3, 0], [0, 0, 1]])) == 1.0
    assert weighted_f1(cm([[4, 0, 0], [0, 0, 0], [0, 0, 0]])) == 1.0
    c = [[2, 1, 0], [0, 3, 0], [1, 0, 3]]
    truths = [i for i, row in enumerate(c) for j, k in enumerate(row) for _ in range(k)]
    preds = [j for i, row in enumerate(c) for j, k in enumerate(row) for _ in range(k)]
    assert weighted_f1(cm(c)) == pytest.approx(weighted_f1_naive(truths, preds, [0, 1, 2]), abs=1e-12)


def test_mae_examples():
    assert mae([1, 2], [1, 2]) == 0.0
    assert mae([0, 4], [4, 0]) == 4.0
    assert mae([1, 2, 3], [2, 2, 1]) == 1.0
    with pytest.raises(LengthMismatch):
        mae([1], [1, 2])


def test_mae_with_invalid_modes():
    assert mae_with_invalid([0, 4, 2], [0, None, 2], (0, 4), EXCLUDE) == 0.0
    # invalid charged at the farthest end of the scale
    assert mae_with_invalid([0, 4, 1], [0, None, None], (0, 4), COUNT_AS_WRONG) == (0 + 4 + 3) / 3
    assert mae_with_invalid([1], [None], (0, 4), EXCLUDE) is None


def test_multilabel_examples():
    assert multilabel_scores([(1, 1)], [(0, 1)])["mean_credit"] == 0.5
    s = multilabel_scores([(0, 0), (1, 1)], [(0, 0), (1, 1)])
    assert s["mean_credit"] == 1.0 and s["micro_f1"] == 1.0
    s = multilabel_scores([(0, 0), (1, 1)], [(0, 1), (1, 0)])
    assert s["mean_credit"] == 0.5 and s["micro_f1"] == 0.5
    # groups (0,0): [1.0, 0.0], (1,0): [1.0]
    s = multilabel_scores([(0, 0), (0, 0), (1, 0)], [(0, 0), (1, 1), (1, 0)])
    assert s["grouped_balanced_credit"] == pytest.approx((0.5 + 1.0) / 2)
    with pytest.raises(LengthMismatch):
        multilabel_scores([(0, 0)], [])


def test_invalid_modes_in_matrix():
    truths, preds = [0, 0, 1, 1], [0, None, 1, 1]
    wrong = ConfusionMatrix.from_labels(truths, preds, [0, 1], COUNT_AS_WRONG)
    excl = ConfusionMatrix.from_labels(truths, preds, [0, 1], EXCLUDE)
    assert wrong.invalid_count == 1 and wrong.n == 4
    assert balanced_accuracy(wrong) == 0.75
    assert balanced_accuracy(excl) == 1.0
    assert int(wrong.counts.sum()) + wrong.invalid_count == 4


def test_report_all_invalid_is_floor():
    rep = build_report("binary", [0, 1, 1], [None, None, None], [0, 1])
    assert rep.invalid_rate == 1.0 and rep.balanced_accuracy == 0.0 and rep.f1 == 0.0
    rep = build_report("binary", [0, 1, 1], [None, None, None], [0, 1], EXCLUDE)
    assert rep.balanced_accuracy is None and rep.invalid_rate == 1.0


def test_report_rejects_non_finite():
    with pytest.raises(MetricError):
        MetricReport(float("nan"), 0.0, None, [], 0.0, 1)


def random_case(rng):
    k = rng.randint(2, 5)
    n = rng.randint(1, 200)
    truths = [rng.randrange(k) for _ in range(n)]
    preds = [rng.randrange(k) for _ in range(n)]
    return k, truths, preds


def test_oracle_equivalence_random():
    rng = random.Random(11)
    for _ in range(2000):
        k, truths, preds = random_case(rng)
        classes = list(range(k))
        m = ConfusionMatrix.from_labels(truths, preds, classes)
        assert abs(balanced_accuracy(m, drop_empty=True) - ba_naive(truths, preds, classes)) <= 1e-12
        assert abs(weighted_f1(m) - weighted_f1_naive(truths, preds, classes)) <= 1e-12
        assert abs(mae(truths, preds) - mae_naive(truths, preds)) <= 1e-12
        if k == 2:
            assert abs(f1_binary(m, 1) - f1_naive(truths, preds, 1)) <= 1e-12


def test_oracle_equivalence_with_invalid():
    rng = random.Random(12)
    for _ in range(1000):
        k, truths, preds = random_case(rng)
        preds = [None if rng.random() < 0.2 else p for p in preds]
        classes = list(range(k))
        m = ConfusionMatrix.from_labels(truths, preds, classes, COUNT_AS_WRONG)
        assert abs(balanced_accuracy(m, drop_empty=True) - ba_naive(truths, preds, classes)) <= 1e-12
        assert abs(weighted_f1(m) - weighted_f1_naive(truths, preds, classes)) <= 1e-12


# sklearn warns when a random draw holds a single label; the values still compare
@pytest.mark.filterwarnings("ignore::UserWarning")
def test_sklearn_cross_check():
    rng = random.Random(13)
    for _ in range(300):
        k, truths, preds = random_case(rng)
        classes = list(range(k))
        m = ConfusionMatrix.from_labels(truths, preds, classes)
        assert balanced_accuracy(m, drop_empty=True) == pytest.approx(
            balanced_accuracy_score(truths, preds), abs=1e-12)
        assert weighted_f1(m) == pytest.approx(
            f1_score(truths, preds, labels=classes, average="weighted", zero_division=0), abs=1e-12)
        assert mae(truths, preds) == pytest.approx(mean_absolute_error(truths, preds), abs=1e-12)
        if k == 2:
            assert f1_binary(m, 1) == pytest.approx(f1_score(truths, preds, pos_label=1, zero_division=0), abs=1e-12)


labels = st.integers(0, 3)


@settings(max_examples=200)
@given(st.lists(st.tuples(labels, labels), min_size=1, max_size=60), st.randoms(use_true_random=False))
def test_permutation_invariance(pairs, rnd):
    classes = [0, 1, 2, 3]
    truths, preds = zip(*pairs)
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    t2, p2 = zip(*shuffled)
    a = ConfusionMatrix.from_labels(truths, preds, classes)
    b = ConfusionMatrix.from_labels(t2, p2, classes)
    assert balanced_accuracy(a, drop_empty=True) == balanced_accuracy(b, drop_empty=True)
    assert weighted_f1(a) == weighted_f1(b)
    assert mae(truths, preds) == mae(t2, p2)


@settings(max_examples=200)
@given(st.lists(st.tuples(labels, labels), min_size=1, max_size=60), st.permutations([0, 1, 2, 3]))
def test_relabeling_equivariance(pairs, perm):
    classes = [0, 1, 2, 3]
    truths, preds = zip(*pairs)
    a = ConfusionMatrix.from_labels(truths, preds, classes)
    b = ConfusionMatrix.from_labels([perm[t] for t in truths], [perm[p] for p in preds], classes)
    ra, rb = per_class_recall(a), per_class_recall(b)
    for c in classes:
        assert ra[c] == rb[perm[c]]
    assert balanced_accuracy(a, drop_empty=True) == pytest.approx(balanced_accuracy(b, drop_empty=True), abs=1e-15)


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(0, 1), st.one_of(st.none(), st.integers(0, 1))), min_size=1, max_size=80))
def test_binary_bounds_and_sens_spec(pairs):
    truths, preds = zip(*pairs)
    m = ConfusionMatrix.from_labels(truths, preds, [0, 1])
    if m.support.min() == 0:
        return
    ba = balanced_accuracy(m)
    tn, tp = m.counts[0, 0], m.counts[1, 1]
    spec = tn / m.support[0]
    sens = tp / m.support[1]
    assert ba == pytest.approx((sens + spec) / 2, abs=1e-15)
    for v in (ba, f1_binary(m), weighted_f1(m)):
        assert 0.0 <= v <= 1.0 and math.isfinite(v)


@settings(max_examples=200)
@given(st.lists(st.tuples(st.tuples(st.integers(0, 1), st.integers(0, 1)),
                          st.tuples(st.integers(0, 1), st.integers(0, 1))), min_size=1, max_size=50))
def test_multilabel_bounds(pairs):
    truths, preds = zip(*pairs)
    s = multilabel_scores(truths, preds)
    assert all(0.0 <= v <= 1.0 for v in s.values())
    # naive credit
    credit = sum((t[0] == p[0]) + (t[1] == p[1]) for t, p in pairs) / (2 * len(pairs))
    assert s["mean_credit"] == pytest.approx(credit, abs=1e-12)


def test_report_fields():
    rep = build_report("severity", [0, 1, 2, 3], [0, 1, None, 3], [0, 1, 2, 3, 4])
    assert rep.n == 4 and rep.invalid_count == 1 and rep.invalid_rate == 0.25
    assert rep.mae is not None and rep.per_class_recall[4] is None
    d = rep.to_dict()
    assert set(d) >= {"balanced_accuracy", "f1", "mae", "per_class_recall", "invalid_rate", "n"}
