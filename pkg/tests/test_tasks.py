import pytest

from screenbench.corpus import ParticipantRecord
from screenbench.tasks import TASKS, get_task


def test_registry():
    assert set(TASKS) == {"dep_binary", "ptsd_binary", "dep_severity", "ptsd_severity", "multiclass"}
    with pytest.raises(KeyError):
        get_task("anxiety")


def test_binary_round_trip():
    t = get_task("dep_binary")
    assert t.classes == [0, 1]
    assert t.encode(t.parse("Yes").label) == 1
    assert t.label_text(0) == "No"


def test_truths():
    r = ParticipantRecord(1, phq_score=12, phq_binary=1, pclc_binary=0, ptsd_severity=20)
    assert get_task("dep_binary").truth(r) == 1
    assert get_task("ptsd_binary").truth(r) == 0
    assert get_task("dep_severity").truth_score(r) == 12
    assert get_task("dep_severity").truth(r) == 2
    assert get_task("multiclass").truth(r) == "depressed"


def test_severity_range_follows_scale():
    t = get_task("dep_severity")
    assert t.allowed_range() == (0, 4)
    assert not t.parse("7").valid
    assert t.parse("4").label == 4
