import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from screenbench.modality import (
    UNDEFINED,
    CombinedResolution,
    CorrectnessVector,
    DisagreementPartition,
    KeyMismatch,
    drs,
    emit_co_occurrence,
    format_score,
    mss,
    mss_combined_vs_agreement,
    partition,
    resolve,
)

from oracles import partition_naive


def vec(bits, name="x"):
    return CorrectnessVector((name,), dict(enumerate(bits)))


@pytest.mark.parametrize("a_only,b_only,expected", [(10, 13, "-13.04"), (21, 8, "44.83"), (5, 5, "0.00")])
def test_mss_values(a_only, b_only, expected):
    assert format_score(mss(DisagreementPartition(a_only, b_only, 40, 12))) == expected


@pytest.mark.parametrize("rc,ri,expected", [(12, 11, "4.35"), (8, 21, "-44.83"), (0, 0, UNDEFINED)])
def test_drs_values(rc, ri, expected):
    assert format_score(drs(CombinedResolution(rc, ri, 0, 0, 3))) == expected


@pytest.mark.parametrize("right,wrong,expected", [(5, 1, 66.666666), (4, 4, 0.0), (0, 3, -100.0)])
def test_combined_vs_agreement(right, wrong, expected):
    assert mss_combined_vs_agreement(CombinedResolution(1, 1, right, wrong, 0)) == pytest.approx(expected, abs=1e-4)


def test_undefined_is_not_zero():
    assert mss(DisagreementPartition(0, 0, 3, 3)) is None
    assert format_score(None) == "undefined"
    assert format_score(0.0) == "0.00"


def test_partition_trivial():
    a = vec([True, False, True])
    assert partition(a, a) == DisagreementPartition(0, 0, 2, 1)
    p = partition(vec([True] * 7), vec([False] * 7))
    assert p.a_only_correct == 7 and p.total == 7


def test_key_mismatch():
    with pytest.raises(KeyMismatch) as exc:
        partition(vec([True, True]), vec([True]))
    assert exc.value.ids == [1]
    with pytest.raises(KeyMismatch):
        emit_co_occurrence(vec([True]), vec([True]), vec([True, False]))


def test_invalid_counts_incorrect():
    v = CorrectnessVector.from_predictions(("r",), {1: "yes", 2: "no"}, {1: None, 2: "no"})
    assert v.bits == {1: False, 2: True}


def test_partition_against_loop_oracle():
    rng = random.Random(3)
    for _ in range(500):
        n = rng.randint(1, 60)
        a = [rng.random() < 0.6 for _ in range(n)]
        b = [rng.random() < 0.6 for _ in range(n)]
        p = partition(vec(a), vec(b))
        assert (p.a_only_correct, p.b_only_correct, p.both_correct, p.both_incorrect) == \
            partition_naive(dict(enumerate(a)), dict(enumerate(b)))


def test_co_occurrence_against_loop_oracle():
    rng = random.Random(4)
    for _ in range(200):
        n = rng.randint(1, 40)
        bits = [[rng.random() < 0.5 for _ in range(n)] for _ in range(3)]
        co = emit_co_occurrence(vec(bits[0]), vec(bits[1]), vec(bits[2]))
        assert len(co.cells) == 8 and sum(c[3] for c in co.cells) == n
        for cell in co.cells:
            expect = sum(1 for i in range(n) if (bits[0][i], bits[1][i], bits[2][i]) == cell[:3])
            assert cell[3] == expect
        pair = emit_co_occurrence(vec(bits[0]), vec(bits[1]))
        assert len(pair.cells) == 4 and sum(c[2] for c in pair.cells) == n


def test_co_occurrence_csv_tags():
    co = emit_co_occurrence(vec([True, False, True, False]), vec([True, False, False, True]), labels=("text", "audio"))
    lines = co.to_csv().splitlines()
    assert lines[0] == "text_correct,audio_correct,count,category,color"
    assert "1,1,1,both_right,green" in lines
    assert "0,0,1,both_wrong,red" in lines
    assert "1,0,1,split,blue" in lines


bits = st.lists(st.tuples(st.booleans(), st.booleans(), st.booleans()), min_size=1, max_size=80)


@settings(max_examples=300)
@given(bits)
def test_antisymmetry_and_range(rows):
    a = vec([r[0] for r in rows])
    b = vec([r[1] for r in rows])
    c = vec([r[2] for r in rows])
    ab, ba = mss(partition(a, b)), mss(partition(b, a))
    if ab is None:
        assert ba is None
    else:
        assert ab == -ba
    res = resolve(a, b, c)
    assert res.disagreements == partition(a, b).disagreements
    for v in (ab, drs(res), mss_combined_vs_agreement(res)):
        assert v is None or -100.0 <= v <= 100.0


@settings(max_examples=150)
@given(bits, st.integers(2, 5))
def test_scale_invariance(rows, m):
    def scores(rs):
        a, b, c = (vec([r[i] for r in rs]) for i in range(3))
        return mss(partition(a, b)), drs(resolve(a, b, c))

    s1 = scores(rows)
    s2 = scores([r for r in rows for _ in range(m)])
    for x, y in zip(s1, s2):
        assert (x is None and y is None) or x == pytest.approx(y, abs=1e-12)


@settings(max_examples=300)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=50))
def test_binary_correctness_disagreement_is_prediction_disagreement(rows):
    truths = {i: r[0] for i, r in enumerate(rows)}
    a = CorrectnessVector.from_predictions(("a",), truths, {i: r[1] for i, r in enumerate(rows)})
    b = CorrectnessVector.from_predictions(("b",), truths, {i: r[2] for i, r in enumerate(rows)})
    for i, r in enumerate(rows):
        assert (a.bits[i] != b.bits[i]) == (r[1] != r[2])


def test_multiclass_breaks_equivalence():
    # both wrong with different predictions: predictions disagree, correctness agrees
    truths = {0: 0}
    a = CorrectnessVector.from_predictions(("a",), truths, {0: 1})
    b = CorrectnessVector.from_predictions(("b",), truths, {0: 2})
    assert partition(a, b).disagreements == 0
