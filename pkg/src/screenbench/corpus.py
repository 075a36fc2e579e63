"""Corpus ingestion, label correction, severity mapping and synthetic fixtures.

The manifest is an E-DAIC style label table: one row per interview with the
PHQ-8 total, its binary cut, the PCL-C binary and the PTSD severity score.
Transcripts and audio are referenced by path.
"""

from __future__ import annotations

import csv
import io
import random
import wave
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import yaml

PHQ_RANGE = (0, 24)
PHQ_THRESHOLD = 10
PCL_RANGE = (17, 85)
PCL_THRESHOLD = 44  # strictly greater than this is positive
SPLITS = ("train", "dev", "test", "all")

# Participants whose PHQ_Binary is 0 despite PHQ_Score >= 10 in the released labels.
KNOWN_MISLABELED_IDS = (
    320, 325, 335, 344, 352, 356, 380, 386, 409, 413,
    418, 422, 433, 459, 483, 633, 682, 691, 696, 709,
)
KNOWN_BELOW_RANGE_PTSD = {683: 10}

MULTICLASS_LABELS = ("normal", "depressed", "ptsd", "depressed_and_ptsd")
_BITS_TO_MULTICLASS = {
    (0, 0): "normal",
    (1, 0): "depressed",
    (0, 1): "ptsd",
    (1, 1): "depressed_and_ptsd",
}
_MULTICLASS_TO_BITS = {v: k for k, v in _BITS_TO_MULTICLASS.items()}

GENERIC_COLUMNS = (
    "Participant_ID", "PHQ_Score", "PHQ_Binary", "PCL-C", "PTSD_Severity",
    "Split", "Transcript_Path", "Audio_Path",
)
AUDIO_TEMPLATE = "{id}_AUDIO.wav"
TRANSCRIPT_TEMPLATE = "{id}_Transcript.csv"


class CorpusError(ValueError):
    pass


class MissingColumn(CorpusError):
    def __init__(self, name: str):
        super().__init__(f"missing required column: {name}")
        self.name = name


class MalformedRow(CorpusError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DuplicateParticipant(CorpusError):
    def __init__(self, participant_id: int):
        super().__init__(f"duplicate participant id {participant_id}")
        self.participant_id = participant_id


class OutOfRange(CorpusError):
    def __init__(self, score: int, scale: "SeverityScale"):
        super().__init__(f"score {score} outside {scale.name} range [{scale.lo}, {scale.hi}]")
        self.score = score
        self.scale = scale


class InvalidProfile(CorpusError):
    pass


@dataclass(frozen=True)
class ParticipantRecord:
    participant_id: int
    phq_score: int
    phq_binary: int
    pclc_binary: int
    ptsd_severity: int
    transcript_path: Path | None = None
    audio_path: Path | None = None
    split: str = "all"

    @property
    def has_transcript(self) -> bool:
        return self.transcript_path is not None

    @property
    def has_audio(self) -> bool:
        return self.audio_path is not None


@dataclass(frozen=True)
class Correction:
    participant_id: int
    field: str
    old: int
    new: int


@dataclass(frozen=True)
class DatasetManifest:
    records: tuple[ParticipantRecord, ...]
    source_note: str = ""
    correction_log: tuple[Correction, ...] = ()

    def __post_init__(self):
        seen: set[int] = set()
        for r in self.records:
            if r.participant_id in seen:
                raise DuplicateParticipant(r.participant_id)
            seen.add(r.participant_id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ParticipantRecord]:
        return iter(self.records)

    @cached_property
    def _by_id(self) -> dict[int, ParticipantRecord]:
        return {r.participant_id: r for r in self.records}

    def get(self, participant_id: int) -> ParticipantRecord:
        try:
            return self._by_id[participant_id]
        except KeyError:
            raise KeyError(f"no participant {participant_id} in the manifest") from None

    def in_split(self, split: str) -> list[ParticipantRecord]:
        if split == "all":
            return list(self.records)
        return [r for r in self.records if r.split == split]


@dataclass(frozen=True)
class SeverityScale:
    """Ordered inclusive integer bins mapping a score to an ordinal label."""

    name: str
    bins: tuple[tuple[int, int, int], ...]
    kind: str = "custom"

    def __post_init__(self):
        if not self.bins:
            raise ValueError(f"scale {self.name} has no bins")
        for i, (label, lo, hi) in enumerate(self.bins):
            if label != i:
                raise ValueError(f"scale {self.name}: labels must be 0..k-1 in order")
            if lo > hi:
                raise ValueError(f"scale {self.name}: empty bin {label}")
            if i and lo != self.bins[i - 1][2] + 1:
                raise ValueError(f"scale {self.name}: bins {i - 1} and {i} are not contiguous")

    @property
    def lo(self) -> int:
        return self.bins[0][1]

    @property
    def hi(self) -> int:
        return self.bins[-1][2]

    @property
    def labels(self) -> list[int]:
        return [b[0] for b in self.bins]


def load_severity_scales(path: str | Path | None = None) -> dict[str, SeverityScale]:
    """Read named scales from a YAML preset file (the bundled one by default)."""
    if path is None:
        text = resources.files("screenbench.data").joinpath("severity_scales.yaml").read_text()
    else:
        text = Path(path).read_text()
    raw = yaml.safe_load(text) or {}
    scales = {}
    for name, spec in raw.items():
        bins = tuple(tuple(int(v) for v in b) for b in spec["bins"])
        scales[name] = SeverityScale(name=name, bins=bins, kind=spec.get("kind", "custom"))
    return scales


@lru_cache(maxsize=None)
def _bundled_scales() -> dict[str, SeverityScale]:
    return load_severity_scales()


def get_scale(name: str) -> SeverityScale:
    try:
        return _bundled_scales()[name]
    except KeyError:
        raise KeyError(f"unknown severity scale {name!r}; known: {sorted(_bundled_scales())}") from None


def map_severity(score: int, scale: SeverityScale | str) -> int:
    if isinstance(scale, str):
        scale = get_scale(scale)
    for label, lo, hi in scale.bins:
        if lo <= score <= hi:
            return label
    raise OutOfRange(score, scale)


def derive_multiclass_label(r: ParticipantRecord) -> str:
    return _BITS_TO_MULTICLASS[(r.phq_binary, r.pclc_binary)]


def multiclass_to_bits(label: str) -> tuple[int, int]:
    """Inverse of :func:`derive_multiclass_label`: (depression, ptsd) bits."""
    return _MULTICLASS_TO_BITS[label]


def bits_to_multiclass(dep: int, ptsd: int) -> str:
    return _BITS_TO_MULTICLASS[(int(dep), int(ptsd))]


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

_EDAIC_ALIASES = {
    "Participant_ID": ("Participant_ID",),
    "PHQ_Score": ("PHQ_Score", "PHQ8_Score"),
    "PHQ_Binary": ("PHQ_Binary", "PHQ8_Binary"),
    "PCL-C": ("PCL-C", "PCL-C (PTSD)"),
    "PTSD_Severity": ("PTSD_Severity", "PTSD Severity"),
}
_GENERIC_REQUIRED = ("Participant_ID", "PHQ_Score", "PHQ_Binary", "PCL-C", "PTSD_Severity")


def _parse_int(value: str | None, column: str, line_no: int) -> int:
    text = (value or "").strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        f = float(text)
    except ValueError:
        raise MalformedRow(line_no, f"{column}={value!r} is not an integer") from None
    if not f.is_integer():
        raise MalformedRow(line_no, f"{column}={value!r} is not an integer")
    return int(f)


def _check_range(value: int, lo: int, hi: int, column: str, line_no: int) -> None:
    if not lo <= value <= hi:
        raise MalformedRow(line_no, f"{column}={value} outside [{lo}, {hi}]")


def _resolve_media(root: Path, pid: int, template: str) -> Path | None:
    name = template.format(id=pid)
    for candidate in (root / f"{pid}_P" / name, root / name):
        if candidate.exists():
            return candidate
    return None


def load_manifest(
    path: str | Path,
    layout: str = "generic_csv",
    data_root: str | Path | None = None,
) -> DatasetManifest:
    """Read a label manifest into uncorrected records.

    ``generic_csv`` uses the documented column names with optional explicit
    media paths (relative paths resolve against the manifest's directory).
    ``edaic_csv`` also accepts the native E-DAIC header spellings and finds
    media through ``{id}_AUDIO.wav`` / ``{id}_Transcript.csv`` under
    ``data_root`` (or ``data_root/{id}_P/``).
    """
    if layout not in ("generic_csv", "edaic_csv"):
        raise ValueError(f"unknown layout {layout!r}")
    path = Path(path)
    root = Path(data_root) if data_root is not None else path.parent
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        reader.fieldnames = header

        columns: dict[str, str] = {}
        for canonical in _GENERIC_REQUIRED:
            aliases = _EDAIC_ALIASES[canonical] if layout == "edaic_csv" else (canonical,)
            found = next((a for a in aliases if a in header), None)
            if found is None:
                raise MissingColumn(canonical)
            columns[canonical] = found

        records: list[ParticipantRecord] = []
        seen: set[int] = set()
        for row in reader:
            line_no = reader.line_num
            pid = _parse_int(row[columns["Participant_ID"]], "Participant_ID", line_no)
            if pid <= 0:
                raise MalformedRow(line_no, f"Participant_ID={pid} must be positive")
            if pid in seen:
                raise DuplicateParticipant(pid)
            seen.add(pid)
            phq = _parse_int(row[columns["PHQ_Score"]], "PHQ_Score", line_no)
            _check_range(phq, *PHQ_RANGE, "PHQ_Score", line_no)
            phq_bin = _parse_int(row[columns["PHQ_Binary"]], "PHQ_Binary", line_no)
            _check_range(phq_bin, 0, 1, "PHQ_Binary", line_no)
            pcl_bin = _parse_int(row[columns["PCL-C"]], "PCL-C", line_no)
            _check_range(pcl_bin, 0, 1, "PCL-C", line_no)
            sev = _parse_int(row[columns["PTSD_Severity"]], "PTSD_Severity", line_no)
            # raw scores below 17 are admitted here and clamped by the correction pass
            _check_range(sev, 0, PCL_RANGE[1], "PTSD_Severity", line_no)

            split = (row.get("Split") or "all").strip().lower() or "all"
            if split not in SPLITS:
                raise MalformedRow(line_no, f"Split={split!r} not one of {SPLITS}")

            transcript = _media_path(row.get("Transcript_Path"), path.parent)
            audio = _media_path(row.get("Audio_Path"), path.parent)
            if layout == "edaic_csv":
                transcript = transcript or _resolve_media(root, pid, TRANSCRIPT_TEMPLATE)
                audio = audio or _resolve_media(root, pid, AUDIO_TEMPLATE)

            records.append(ParticipantRecord(
                participant_id=pid, phq_score=phq, phq_binary=phq_bin,
                pclc_binary=pcl_bin, ptsd_severity=sev,
                transcript_path=transcript, audio_path=audio, split=split,
            ))
    return DatasetManifest(records=tuple(records), source_note=f"{layout}:{path}")


def _media_path(value: str | None, base: Path) -> Path | None:
    value = (value or "").strip()
    if not value:
        return None
    p = Path(value)
    return p if p.is_absolute() else base / p


def write_manifest(m: DatasetManifest, path: str | Path) -> None:
    """Write ``m`` in the generic layout; media paths are stored relative to ``path``'s directory when possible."""
    path = Path(path)
    base = path.parent

    def rel(p: Path | None) -> str:
        if p is None:
            return ""
        try:
            return Path(p).relative_to(base).as_posix()
        except ValueError:
            return str(p)

    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GENERIC_COLUMNS)
        for r in m.records:
            w.writerow([
                r.participant_id, r.phq_score, r.phq_binary, r.pclc_binary, r.ptsd_severity,
                r.split, rel(r.transcript_path), rel(r.audio_path),
            ])


def read_transcript(path: str | Path) -> str:
    """Return transcript text; CSV transcripts are reduced to their ``Text`` column, one turn per line."""
    path = Path(path)
    raw = path.read_text(encoding="utf-8")
    if path.suffix.lower() != ".csv":
        return raw
    reader = csv.DictReader(io.StringIO(raw))
    fields = {f.lower(): f for f in (reader.fieldnames or [])}
    col = fields.get("text") or fields.get("value")
    if col is None:
        return raw
    return "\n".join((row.get(col) or "").strip() for row in reader)


# ---------------------------------------------------------------------------
# Corrections
# ---------------------------------------------------------------------------

def apply_label_corrections(m: DatasetManifest) -> DatasetManifest:
    """Fix PHQ_Binary against the >=10 cut and clamp PTSD severity into [17, 85].

    Idempotent; each change is appended to the correction log.
    """
    log = list(m.correction_log)
    out = []
    for r in m.records:
        changes = {}
        if r.phq_score >= PHQ_THRESHOLD and r.phq_binary == 0:
            changes["phq_binary"] = 1
        if r.ptsd_severity < PCL_RANGE[0]:
            changes["ptsd_severity"] = PCL_RANGE[0]
        for name, new in changes.items():
            log.append(Correction(r.participant_id, name, getattr(r, name), new))
        out.append(replace(r, **changes) if changes else r)
    return replace(m, records=tuple(out), correction_log=tuple(log))


def replay_corrections(raw: DatasetManifest, log: Iterable[Correction]) -> DatasetManifest:
    """Apply a recorded correction log to uncorrected records."""
    by_id = {r.participant_id: r for r in raw.records}
    log = tuple(log)
    for c in log:
        r = by_id[c.participant_id]
        if getattr(r, c.field) != c.old:
            raise CorpusError(f"log entry {c} does not match record value {getattr(r, c.field)}")
        by_id[c.participant_id] = replace(r, **{c.field: c.new})
    records = tuple(by_id[r.participant_id] for r in raw.records)
    return replace(raw, records=records, correction_log=raw.correction_log + log)


# ---------------------------------------------------------------------------
# Distribution summary
# ---------------------------------------------------------------------------

@dataclass
class DistributionReport:
    counts: dict[str, dict[str, int]]
    n: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label_system", "label", "count"])
        for system, table in self.counts.items():
            for label, count in table.items():
                w.writerow([system, label, count])
        return buf.getvalue()


def summarize_distribution(
    m: DatasetManifest, ptsd_scale: SeverityScale | str = "ptsd_reference"
) -> DistributionReport:
    dep_scale = get_scale("depression_phq8")
    if isinstance(ptsd_scale, str):
        ptsd_scale = get_scale(ptsd_scale)
    counts = {
        "phq_binary": {"neg": 0, "pos": 0},
        "pclc_binary": {"neg": 0, "pos": 0},
        "depression_severity": {str(lbl): 0 for lbl in dep_scale.labels},
        "ptsd_severity": {str(lbl): 0 for lbl in ptsd_scale.labels},
        "multiclass": {lbl: 0 for lbl in MULTICLASS_LABELS},
    }
    for r in m.records:
        counts["phq_binary"]["pos" if r.phq_binary else "neg"] += 1
        counts["pclc_binary"]["pos" if r.pclc_binary else "neg"] += 1
        counts["depression_severity"][str(map_severity(r.phq_score, dep_scale))] += 1
        counts["ptsd_severity"][str(map_severity(r.ptsd_severity, ptsd_scale))] += 1
        counts["multiclass"][derive_multiclass_label(r)] += 1
    return DistributionReport(counts=counts, n=len(m))


# ---------------------------------------------------------------------------
# Synthetic fixtures
# ---------------------------------------------------------------------------

REFERENCE_DEPRESSION_SEVERITY = (122, 67, 43, 33, 10)
REFERENCE_PTSD_SEVERITY = (137, 51, 87)
REFERENCE_SPLITS = {"train": 163, "dev": 56, "test": 56}

_INTERVIEWER_TURNS = (
    "How are you doing today?",
    "Where are you from originally?",
    "How easy is it for you to get a good night's sleep?",
    "How have you been feeling lately?",
    "Have you ever been diagnosed with PTSD?",
    "Have you been diagnosed with depression?",
    "What's one of your most memorable experiences?",
    "How do you cope when you are upset?",
)
_ANSWERS = {
    "dep_neg": (
        "I'm doing pretty well, thanks for asking.",
        "I sleep fine most nights.",
        "I like spending time outside with friends.",
        "Things have been good at work lately.",
    ),
    "dep_pos": (
        "I've been feeling down most days.",
        "I can't really sleep, I'm tired all the time.",
        "I don't enjoy the things I used to.",
        "Sometimes I feel like nothing matters.",
    ),
    "ptsd_neg": (
        "I've never been through anything like that.",
        "I feel safe at home.",
    ),
    "ptsd_pos": (
        "I still get flashbacks from what happened.",
        "Loud noises make me jump, I'm always on edge.",
        "I avoid places that remind me of it.",
    ),
}


def _bin_scores(rng: random.Random, scale: SeverityScale, counts: Sequence[int]) -> list[list[int]]:
    return [
        [rng.randint(lo, hi) for _ in range(count)]
        for (_, lo, hi), count in zip(scale.bins, counts)
    ]


def _transcript_rows(rng: random.Random, dep: int, ptsd: int) -> list[list[str]]:
    rows = []
    t = 0.0
    dep_pool = _ANSWERS["dep_pos" if dep else "dep_neg"]
    ptsd_pool = _ANSWERS["ptsd_pos" if ptsd else "ptsd_neg"]
    for i in range(6):
        question = rng.choice(_INTERVIEWER_TURNS)
        answer = rng.choice(dep_pool if i % 2 == 0 else ptsd_pool)
        for text in (question, answer):
            rows.append([f"{t:.1f}", f"{t + 2.5:.1f}", text, "0.95"])
            t += 3.0
    return rows


def _write_silence(path: Path, seconds: float = 0.25, rate: int = 16000) -> None:
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(b"\x00\x00" * int(seconds * rate))


def _profile_counts(profile: str, n: int, counts: Mapping | None) -> tuple[list[int], list[int]]:
    """Per-bin counts (depression PHQ-8 bins, PTSD reference bins) for a profile."""
    if profile == "paper_marginals":
        return list(REFERENCE_DEPRESSION_SEVERITY), list(REFERENCE_PTSD_SEVERITY)
    if profile == "uniform":
        if n <= 0:
            raise InvalidProfile("uniform profile needs n > 0")
        return [len(range(i, n, 5)) for i in range(5)], [len(range(i, n, 3)) for i in range(3)]
    if profile == "custom":
        if not counts:
            raise InvalidProfile("custom profile needs counts")
        allowed = {"pos", "neg", "ptsd_pos", "ptsd_neg", "dep_severity", "ptsd_severity"}
        unknown = set(counts) - allowed
        if unknown:
            raise InvalidProfile(f"unknown count keys {sorted(unknown)}")
        values = [v for k, v in counts.items() if k in ("pos", "neg", "ptsd_pos", "ptsd_neg")]
        values += [x for k in ("dep_severity", "ptsd_severity") for x in counts.get(k, ())]
        if any(not isinstance(v, int) or v < 0 for v in values):
            raise InvalidProfile("counts must be non-negative integers")
        if "dep_severity" in counts:
            dep = list(counts["dep_severity"])
            if len(dep) != 5:
                raise InvalidProfile("dep_severity needs 5 bin counts")
        else:
            pos, neg = counts.get("pos", 0), counts.get("neg", 0)
            # negatives split over the two sub-threshold bins, positives over the rest
            dep = [neg - neg // 2, neg // 2, pos - 2 * (pos // 3), pos // 3, pos // 3]
        total = sum(dep)
        if "ptsd_severity" in counts:
            ptsd = list(counts["ptsd_severity"])
            if len(ptsd) != 3:
                raise InvalidProfile("ptsd_severity needs 3 bin counts")
        elif "ptsd_pos" in counts or "ptsd_neg" in counts:
            p_pos, p_neg = counts.get("ptsd_pos", 0), counts.get("ptsd_neg", 0)
            ptsd = [p_neg - p_neg // 2, p_neg // 2, p_pos]
        else:
            ptsd = [total, 0, 0]
        if sum(ptsd) != total:
            raise InvalidProfile(f"depression total {total} != PTSD total {sum(ptsd)}")
        if total == 0:
            raise InvalidProfile("profile yields no records")
        return dep, ptsd
    raise InvalidProfile(f"unknown profile {profile!r}")


def generate_synthetic_fixture(
    seed: int,
    profile: str,
    out_dir: str | Path,
    *,
    n: int = 40,
    counts: Mapping | None = None,
    inject_known_errors: bool = False,
) -> DatasetManifest:
    """Write a deterministic fixture corpus and return its (uncorrected) manifest.

    Label marginals match the profile exactly. With ``inject_known_errors``
    (paper_marginals only) the known mislabeled IDs carry PHQ_Binary=0 and
    participant 683 has a raw PTSD score of 10, as in the released labels.
    """
    dep_counts, ptsd_counts = _profile_counts(profile, n, counts)
    if inject_known_errors and profile != "paper_marginals":
        raise InvalidProfile("inject_known_errors requires the paper_marginals profile")
    total = sum(dep_counts)
    rng = random.Random(seed)
    dep_scale = get_scale("depression_phq8")
    ptsd_scale = get_scale("ptsd_reference")

    dep_bins = _bin_scores(rng, dep_scale, dep_counts)
    ptsd_bins = _bin_scores(rng, ptsd_scale, ptsd_counts)

    if profile == "paper_marginals":
        required = sorted(set(KNOWN_MISLABELED_IDS) | set(KNOWN_BELOW_RANGE_PTSD))
        others = [i for i in range(300, 719) if i not in required]
        ids = sorted(required + rng.sample(others, total - len(required)))
        # participant 320 sits exactly on the PHQ cut
        dep_bins[2][0] = PHQ_THRESHOLD
        positives = [s for b in dep_bins[2:] for s in b]
        negatives = [s for b in dep_bins[:2] for s in b]
        rng.shuffle(positives)
        at = positives.index(PHQ_THRESHOLD)
        positives[0], positives[at] = positives[at], positives[0]
        phq_by_id = {320: positives[0]}
        for pid, score in zip([i for i in KNOWN_MISLABELED_IDS if i != 320], positives[1:]):
            phq_by_id[pid] = score
        rest = positives[len(KNOWN_MISLABELED_IDS):] + negatives
        rng.shuffle(rest)
        for pid, score in zip([i for i in ids if i not in phq_by_id], rest):
            phq_by_id[pid] = score

        ptsd_low = list(ptsd_bins[0])
        ptsd_by_id = {683: ptsd_low.pop()}
        rest_ptsd = ptsd_low + [s for b in ptsd_bins[1:] for s in b]
        rng.shuffle(rest_ptsd)
        for pid, score in zip([i for i in ids if i != 683], rest_ptsd):
            ptsd_by_id[pid] = score
        split_labels = [s for s, k in REFERENCE_SPLITS.items() for _ in range(k)]
    else:
        ids = list(range(1, total + 1))
        phq_scores = [s for b in dep_bins for s in b]
        ptsd_scores = [s for b in ptsd_bins for s in b]
        rng.shuffle(phq_scores)
        rng.shuffle(ptsd_scores)
        phq_by_id = dict(zip(ids, phq_scores))
        ptsd_by_id = dict(zip(ids, ptsd_scores))
        split_labels = ["all"] * total
    rng.shuffle(split_labels)

    out = Path(out_dir)
    media = out / "media"
    media.mkdir(parents=True, exist_ok=True)
    records = []
    for pid, split in zip(ids, split_labels):
        phq = phq_by_id[pid]
        sev = ptsd_by_id[pid]
        phq_bin = int(phq >= PHQ_THRESHOLD)
        pcl_bin = int(sev > PCL_THRESHOLD)
        if inject_known_errors:
            if pid in KNOWN_MISLABELED_IDS:
                phq_bin = 0
            if pid in KNOWN_BELOW_RANGE_PTSD:
                sev = KNOWN_BELOW_RANGE_PTSD[pid]

        transcript = media / TRANSCRIPT_TEMPLATE.format(id=pid)
        with transcript.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["Start_Time", "End_Time", "Text", "Confidence"])
            w.writerows(_transcript_rows(rng, int(phq >= PHQ_THRESHOLD), pcl_bin))
        audio = media / AUDIO_TEMPLATE.format(id=pid)
        _write_silence(audio)
        records.append(ParticipantRecord(
            participant_id=pid, phq_score=phq, phq_binary=phq_bin, pclc_binary=pcl_bin,
            ptsd_severity=sev, transcript_path=transcript, audio_path=audio, split=split,
        ))

    manifest = DatasetManifest(records=tuple(records), source_note=f"synthetic:{profile}:seed={seed}")
    write_manifest(manifest, out / "manifest.csv")
    return load_manifest(out / "manifest.csv", layout="generic_csv")
