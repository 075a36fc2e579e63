import csv
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from screenbench.corpus import (
    KNOWN_MISLABELED_IDS,
    Correction,
    DatasetManifest,
    DuplicateParticipant,
    InvalidProfile,
    MalformedRow,
    MissingColumn,
    OutOfRange,
    ParticipantRecord,
    SeverityScale,
    apply_label_corrections,
    bits_to_multiclass,
    derive_multiclass_label,
    generate_synthetic_fixture,
    get_scale,
    load_manifest,
    load_severity_scales,
    map_severity,
    multiclass_to_bits,
    read_transcript,
    replay_corrections,
    summarize_distribution,
    write_manifest,
)

HEADER = "Participant_ID,PHQ_Score,PHQ_Binary,PCL-C,PTSD_Severity,Split,Transcript_Path,Audio_Path\n"


def write(tmp_path, body, header=HEADER, name="m.csv"):
    p = tmp_path / name
    p.write_text(header + body)
    return p


# -- loading -----------------------------------------------------------------

def test_load_generic_manifest(tmp_path):
    p = write(tmp_path, "300,12,1,0,30,train,,\n301,3,0,1,50,dev,t.csv,a.wav\n")
    m = load_manifest(p)
    assert [r.participant_id for r in m] == [300, 301]
    assert m.get(300).split == "train" and not m.get(300).has_transcript
    assert m.get(301).transcript_path == tmp_path / "t.csv"
    assert m.get(301).audio_path == tmp_path / "a.wav"
    assert m.correction_log == ()


def test_empty_file_is_missing_column(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(MissingColumn):
        load_manifest(p)


def test_missing_required_column(tmp_path):
    p = write(tmp_path, "300,12,1,0\n", header="Participant_ID,PHQ_Score,PHQ_Binary,PCL-C\n")
    with pytest.raises(MissingColumn) as exc:
        load_manifest(p)
    assert "PTSD_Severity" in str(exc.value)


def test_unparseable_score_is_malformed_row(tmp_path):
    p = write(tmp_path, "300,12,1,0,30,train,,\n301,abc,0,0,30,train,,\n")
    with pytest.raises(MalformedRow) as exc:
        load_manifest(p)
    assert exc.value.line_no == 3


@pytest.mark.parametrize("row", [
    "300,25,1,0,30,all,,",  # PHQ above 24
    "300,5,2,0,30,all,,",  # binary not 0/1
    "300,5,0,0,99,all,,",  # PCL above 85
    "300,5,0,0,30,nope,,",  # unknown split
])
def test_out_of_range_rows_rejected(tmp_path, row):
    with pytest.raises(MalformedRow):
        load_manifest(write(tmp_path, row + "\n"))


def test_duplicate_participant(tmp_path):
    with pytest.raises(DuplicateParticipant):
        load_manifest(write(tmp_path, "300,1,0,0,20,all,,\n300,2,0,0,20,all,,\n"))


def test_raw_ptsd_below_range_loads_unclamped(tmp_path):
    m = load_manifest(write(tmp_path, "683,1,0,0,10,all,,\n"))
    assert m.get(683).ptsd_severity == 10


def test_edaic_layout_resolves_media(tmp_path):
    (tmp_path / "402_P").mkdir()
    (tmp_path / "402_P" / "402_AUDIO.wav").write_bytes(b"RIFF")
    (tmp_path / "402_P" / "402_Transcript.csv").write_text("Text\nhello\n")
    p = write(tmp_path, "402,11,1,0,33\n403,2,0,0,20\n",
              header="Participant_ID,PHQ8_Score,PHQ8_Binary,PCL-C (PTSD),PTSD Severity\n")
    m = load_manifest(p, "edaic_csv", data_root=tmp_path)
    assert m.get(402).has_audio and m.get(402).has_transcript
    assert not m.get(403).has_audio
    assert read_transcript(m.get(402).transcript_path) == "hello"


def test_write_manifest_round_trip(tmp_path, small_manifest):
    out = tmp_path / "copy.csv"
    write_manifest(small_manifest, out)
    again = load_manifest(out)
    assert [(r.participant_id, r.phq_score, r.ptsd_severity) for r in again] == \
        [(r.participant_id, r.phq_score, r.ptsd_severity) for r in small_manifest]
    assert again.get(1).transcript_path.resolve() == small_manifest.get(1).transcript_path.resolve()


# -- corrections -------------------------------------------------------------

def rec(pid, phq, phq_bin, sev=20, pcl=None):
    return ParticipantRecord(pid, phq, phq_bin, int(sev > 44) if pcl is None else pcl, sev)


def test_correction_examples():
    m = DatasetManifest((rec(320, 10, 0), rec(683, 3, 0, sev=10), rec(5, 9, 0)))
    fixed = apply_label_corrections(m)
    assert fixed.get(320).phq_binary == 1
    assert fixed.get(683).ptsd_severity == 17
    assert fixed.get(5) == m.get(5)
    assert fixed.correction_log == (
        Correction(320, "phq_binary", 0, 1),
        Correction(683, "ptsd_severity", 10, 17),
    )


def test_corrections_idempotent(marginals_manifest):
    again = apply_label_corrections(marginals_manifest)
    assert again == marginals_manifest


def test_replay_reproduces_corrected(marginals_raw, marginals_manifest):
    assert replay_corrections(marginals_raw, marginals_manifest.correction_log) == marginals_manifest


records = st.builds(
    lambda pid, phq, b, sev: ParticipantRecord(pid, phq, b, int(sev > 44), sev),
    st.integers(1, 10**6), st.integers(0, 24), st.integers(0, 1), st.integers(0, 85),
)


@settings(max_examples=200)
@given(st.lists(records, max_size=30, unique_by=lambda r: r.participant_id))
def test_correction_predicate_holds(rs):
    fixed = apply_label_corrections(DatasetManifest(tuple(rs)))
    for r in fixed:
        # only 0 -> 1 flips are corrections, so a record labelled 1 below 10 stays
        if r.phq_score >= 10:
            assert r.phq_binary == 1
        assert 17 <= r.ptsd_severity <= 85
    assert replay_corrections(DatasetManifest(tuple(rs)), fixed.correction_log) == fixed


# -- scales ------------------------------------------------------------------

def test_map_severity_examples():
    assert map_severity(7, "depression_phq8") == 1
    assert map_severity(0, "depression_phq8") == 0
    assert map_severity(24, "depression_phq8") == 4
    assert map_severity(45, "ptsd_reference") == 2
    with pytest.raises(OutOfRange):
        map_severity(25, "depression_phq8")
    with pytest.raises(OutOfRange):
        map_severity(16, "ptsd_reference")


def test_scale_invariants():
    scales = load_severity_scales()
    assert {"depression_phq8", "ptsd_reference"} <= set(scales)
    for s in scales.values():
        width = sum(hi - lo + 1 for _, lo, hi in s.bins)
        assert width == s.hi - s.lo + 1
        assert s.labels == list(range(len(s.bins)))
        # monotone and total over the whole range
        labels = [map_severity(x, s) for x in range(s.lo, s.hi + 1)]
        assert labels == sorted(labels)
    assert get_scale("ptsd_reference").bins == ((0, 17, 29), (1, 30, 44), (2, 45, 85))
    assert (get_scale("depression_phq8").lo, get_scale("depression_phq8").hi) == (0, 24)


@pytest.mark.parametrize("bins", [
    ((0, 0, 4), (1, 6, 9)),  # gap
    ((0, 0, 4), (1, 4, 9)),  # overlap
    ((1, 0, 4),),  # labels must start at 0
])
def test_bad_scales_rejected(bins):
    with pytest.raises(ValueError):
        SeverityScale("bad", bins)


def test_multiclass_round_trip():
    for dep in (0, 1):
        for ptsd in (0, 1):
            r = ParticipantRecord(1, 15 if dep else 2, dep, ptsd, 50 if ptsd else 20)
            label = derive_multiclass_label(r)
            assert multiclass_to_bits(label) == (dep, ptsd)
            assert bits_to_multiclass(dep, ptsd) == label
    assert derive_multiclass_label(rec(1, 15, 1, sev=50)) == "depressed_and_ptsd"
    assert derive_multiclass_label(rec(1, 1, 0)) == "normal"


# -- distribution and fixtures -----------------------------------------------

def test_marginals_fixture_distribution(marginals_manifest):
    d = summarize_distribution(marginals_manifest)
    assert d.n == 275
    assert d.counts["phq_binary"] == {"neg": 189, "pos": 86}
    assert d.counts["pclc_binary"] == {"neg": 188, "pos": 87}
    assert d.counts["depression_severity"] == {"0": 122, "1": 67, "2": 43, "3": 33, "4": 10}
    assert d.counts["ptsd_severity"] == {"0": 137, "1": 51, "2": 87}
    assert sum(d.counts["multiclass"].values()) == 275
    assert {r.split for r in marginals_manifest} == {"train", "dev", "test"}
    assert sum(r.split == "train" for r in marginals_manifest) == 163


def test_marginals_fixture_raw_has_errors(marginals_raw):
    raw = {r.participant_id: r for r in marginals_raw}
    assert all(raw[i].phq_binary == 0 and raw[i].phq_score >= 10 for i in KNOWN_MISLABELED_IDS)
    assert raw[320].phq_score == 10
    assert raw[683].ptsd_severity == 10


def test_empty_distribution():
    d = summarize_distribution(DatasetManifest(()))
    assert d.n == 0
    assert all(v == 0 for table in d.counts.values() for v in table.values())
    rows = list(csv.reader(d.to_csv().splitlines()))
    assert rows[0] == ["label_system", "label", "count"]


def test_fixture_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    generate_synthetic_fixture(1, "paper_marginals", a)
    generate_synthetic_fixture(1, "paper_marginals", b)
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    assert files_a == files_b and len(files_a) == 1 + 2 * 275
    for rel in files_a:
        assert (a / rel).read_bytes() == (b / rel).read_bytes()


def test_fixture_media_valid(small_manifest):
    import wave

    r = small_manifest.get(1)
    with wave.open(str(r.audio_path)) as w:
        assert w.getframerate() == 16000 and w.getnframes() > 0
    assert read_transcript(r.transcript_path).strip()


def test_custom_profile(tmp_path):
    m = generate_synthetic_fixture(3, "custom", tmp_path, counts={"pos": 2, "neg": 3})
    assert len(m) == 5
    assert sum(r.phq_binary for r in m) == 2


@pytest.mark.parametrize("profile,kw", [
    ("nonsense", {}),
    ("custom", {}),
    ("custom", {"counts": {"pos": -1, "neg": 2}}),
    ("custom", {"counts": {"bogus": 1}}),
    ("uniform", {"n": 0}),
    ("uniform", {"inject_known_errors": True}),
])
def test_invalid_profiles(tmp_path, profile, kw):
    with pytest.raises(InvalidProfile):
        generate_synthetic_fixture(1, profile, tmp_path, **kw)
