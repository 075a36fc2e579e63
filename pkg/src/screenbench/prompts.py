"""Prompt templates, zero-/few-shot rendering and few-shot exemplar selection.

Template files live in ``templates/<family>_<variant>.txt``. Placeholders are
``{input}``, ``{input_type}``, ``{illness}`` and ``{medium}``; the region
wrapped in ``[[ ... ]]`` carries the subject interview and is dropped when
the template body is reused as a few-shot instruction.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import (
    DatasetManifest,
    ParticipantRecord,
    multiclass_to_bits,
    read_transcript,
)
from .tasks import Task, get_task

MODALITIES = ("text", "audio", "audio_text")
PLACEHOLDERS = frozenset({"input", "input_type", "illness", "medium"})

INPUT_TYPE = {
    "text": "Transcription of the interview:",
    "audio": "Audio of the interview.",
    "audio_text": "Audio and transcription of the interview:",
}
MEDIUM = {"text": "transcript", "audio": "audio", "audio_text": "audio and transcript"}
SUBJECT_NOUN = {"text": "transcription", "audio": "audio", "audio_text": "audio and transcription"}
AUDIO_REFERENCE = "the attached audio recording"

_PLACEHOLDER_RE = re.compile(r"\{(" + "|".join(sorted(PLACEHOLDERS)) + r")\}")
_SUBJECT_RE = re.compile(r"\[\[(.*?)\]\]", re.DOTALL)
_ORDINALS = (
    "First", "Second", "Third", "Fourth", "Fifth", "Sixth", "Seventh",
    "Eighth", "Ninth", "Tenth", "Eleventh", "Twelfth",
)


class PromptError(ValueError):
    pass


class MissingMedia(PromptError):
    def __init__(self, modality: str, participant_id: int):
        super().__init__(f"participant {participant_id} lacks media for modality {modality!r}")
        self.modality = modality
        self.participant_id = participant_id


class EmptyExamples(PromptError):
    pass


class SubjectLeak(PromptError):
    def __init__(self, participant_id: int):
        super().__init__(f"subject {participant_id} appears among its own few-shot examples")
        self.participant_id = participant_id


class InsufficientPool(PromptError):
    pass


class InsufficientCandidates(PromptError):
    def __init__(self, found: int, k: int):
        super().__init__(f"found {found} near-miss candidates, need {k}")
        self.found = found
        self.k = k


@dataclass(frozen=True)
class PromptTemplate:
    task: str
    variant: str
    body: str
    allowed_labels: tuple[str, ...]

    def __post_init__(self):
        names = set(re.findall(r"\{(\w+)\}", self.body.replace("[[", "").replace("]]", "")))
        if not names <= PLACEHOLDERS:
            raise PromptError(f"{self.key}: unknown placeholders {sorted(names - PLACEHOLDERS)}")
        if not self.allowed_labels:
            raise PromptError(f"{self.key}: no allowed labels")

    @property
    def key(self) -> str:
        return f"{get_task(self.task).family}_{self.variant}"

    @property
    def placeholders(self) -> set[str]:
        return set(_PLACEHOLDER_RE.findall(self.body))

    def fill(self, values: Mapping[str, str], with_subject: bool = True) -> str:
        """Substitute placeholders in a single pass (values are never re-scanned)."""
        body = self.body
        body = _SUBJECT_RE.sub(lambda m: m.group(1) if with_subject else "", body)
        missing = self.placeholders_in(body) - set(values)
        if missing:
            raise PromptError(f"{self.key}: no value for {sorted(missing)}")
        return _PLACEHOLDER_RE.sub(lambda m: values[m.group(1)], body)

    @staticmethod
    def placeholders_in(text: str) -> set[str]:
        return set(_PLACEHOLDER_RE.findall(text))

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.body.encode()).hexdigest()


@dataclass(frozen=True)
class FewShotExample:
    participant_id: int
    content: str
    label_text: str


@dataclass(frozen=True)
class PromptIdentity:
    task: str
    variant: str
    modality: str
    participant_id: int
    shot_mode: str
    content_hash: str


@dataclass(frozen=True)
class RenderedPrompt:
    text: str
    attachments: tuple[Path, ...]
    identity: PromptIdentity
    example_ids: tuple[int, ...] = field(default=())


def template_root() -> Path:
    return Path(str(resources.files("screenbench").joinpath("templates")))


def load_template(task: str, variant: str, root: str | Path | None = None) -> PromptTemplate:
    t = get_task(task)
    if variant not in t.variants:
        raise PromptError(f"task {task} has no variant {variant}; known: {t.variants}")
    path = Path(root or template_root()) / f"{t.family}_{variant}.txt"
    if not path.exists():
        raise PromptError(f"template file missing: {path}")
    allowed = tuple(t.label_text(c) for c in t.classes)
    return PromptTemplate(task=task, variant=variant, body=path.read_text(encoding="utf-8"), allowed_labels=allowed)


def _content_hash(identity: Mapping, text: str, attachments: Sequence[Path], example_ids: Sequence[int]) -> str:
    payload = json.dumps(
        {
            **identity,
            "text": text,
            "attachments": [Path(a).name for a in attachments],
            "examples": list(example_ids),
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _subject_values(t: PromptTemplate, r: ParticipantRecord, modality: str, transcript: str | None):
    if modality not in MODALITIES:
        raise PromptError(f"unknown modality {modality!r}")
    needs_text = modality in ("text", "audio_text")
    needs_audio = modality in ("audio", "audio_text")
    if needs_audio and not r.has_audio:
        raise MissingMedia(modality, r.participant_id)
    if needs_text and transcript is None:
        if not r.has_transcript:
            raise MissingMedia(modality, r.participant_id)
        transcript = read_transcript(r.transcript_path)
    task = get_task(t.task)
    values = {
        "input": transcript if needs_text else AUDIO_REFERENCE,
        "input_type": INPUT_TYPE[modality],
        "medium": MEDIUM[modality],
        "illness": task.illness or "",
    }
    attachments = (Path(r.audio_path),) if needs_audio else ()
    return values, attachments


def _build(t, r, modality, shot_mode, text, attachments, example_ids) -> RenderedPrompt:
    ident = {
        "task": t.task, "variant": t.variant, "modality": modality,
        "participant_id": r.participant_id, "shot_mode": shot_mode,
        "template": t.sha256,
    }
    h = _content_hash(ident, text, attachments, example_ids)
    return RenderedPrompt(
        text=text,
        attachments=tuple(attachments),
        identity=PromptIdentity(t.task, t.variant, modality, r.participant_id, shot_mode, h),
        example_ids=tuple(example_ids),
    )


def render_zero_shot(
    t: PromptTemplate, r: ParticipantRecord, modality: str, transcript: str | None = None
) -> RenderedPrompt:
    """Render ``t`` for one interview. ``transcript`` overrides reading ``r.transcript_path``."""
    values, attachments = _subject_values(t, r, modality, transcript)
    return _build(t, r, modality, "zero_shot", t.fill(values), attachments, ())


def few_shot_count_line(n: int) -> str:
    if n == 1:
        return "Here is 1 sample from these interviews and its label. Use it as a reference:"
    return f"Here are {n} samples from these interviews and their labels. Use them as a reference:"


def _ordinal(i: int) -> str:
    if i < len(_ORDINALS):
        return _ORDINALS[i]
    n = i + 1
    suffix = "th" if 10 <= n % 100 <= 20 else {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")
    return f"{n}{suffix}"


def render_few_shot(
    t: PromptTemplate,
    r: ParticipantRecord,
    modality: str,
    examples: Sequence[FewShotExample],
    *,
    allow_subject: bool = False,
    transcript: str | None = None,
) -> RenderedPrompt:
    """Task instruction, count line, numbered exemplar pairs, then the subject.

    Exemplars are always transcripts, whatever the subject's modality.
    """
    if not examples:
        raise EmptyExamples("few-shot rendering needs at least one example")
    if not allow_subject and any(e.participant_id == r.participant_id for e in examples):
        raise SubjectLeak(r.participant_id)
    for e in examples:
        if e.label_text not in t.allowed_labels:
            raise PromptError(f"example label {e.label_text!r} not in {t.allowed_labels}")
    values, attachments = _subject_values(t, r, modality, transcript)
    instruction = t.fill(values, with_subject=False).rstrip()
    parts = [instruction, few_shot_count_line(len(examples))]
    for i, e in enumerate(examples):
        ordinal = _ordinal(i)
        parts.append(f"{ordinal} sample transcription: {e.content}")
        parts.append(f"{ordinal} sample label: {e.label_text}")
    parts.append(f"Label the following {SUBJECT_NOUN[modality]}: '{values['input']}'.")
    text = "\n\n".join(parts)
    return _build(t, r, modality, "few_shot", text, attachments, [e.participant_id for e in examples])


# ---------------------------------------------------------------------------
# Exemplar selection
# ---------------------------------------------------------------------------

def _example(task: Task, r: ParticipantRecord, value) -> FewShotExample:
    return FewShotExample(r.participant_id, read_transcript(r.transcript_path), task.label_text(value))


def select_few_shot_binary(
    m: DatasetManifest,
    task: str,
    pool: str = "all",
    seed: int = 0,
    order: str = "negative_first",
) -> list[FewShotExample]:
    """Two positives and one negative drawn from ``pool``; negative first by default."""
    t = get_task(task)
    if t.kind != "binary":
        raise PromptError(f"{task} is not a binary task")
    records = sorted((r for r in m.in_split(pool) if r.has_transcript), key=lambda r: r.participant_id)
    pos = [r for r in records if t.truth(r) == 1]
    neg = [r for r in records if t.truth(r) == 0]
    if len(pos) < 2 or len(neg) < 1:
        raise InsufficientPool(f"need 2 positive and 1 negative, pool has {len(pos)}/{len(neg)}")
    rng = random.Random(seed)
    chosen_neg = rng.sample(neg, 1)
    chosen_pos = rng.sample(pos, 2)
    if order == "negative_first":
        picked = chosen_neg + chosen_pos
    elif order == "positive_first":
        picked = chosen_pos + chosen_neg
    else:
        raise ValueError(f"unknown order {order!r}")
    return [_example(t, r, t.truth(r)) for r in picked]


def _is_near_miss(task: Task, truth, pred) -> bool:
    if task.kind == "severity":
        return abs(int(pred) - int(truth)) == 1
    if task.kind == "multiclass":
        a, b = multiclass_to_bits(truth), multiclass_to_bits(pred)
        return sum(x != y for x, y in zip(a, b)) == 1
    raise PromptError(f"near-miss selection is undefined for {task.kind} tasks")


def near_miss_candidates(zs_run: Iterable[Mapping], task: str) -> list[int]:
    """Participant ids whose zero-shot prediction was one label off, sorted.

    Rows need ``participant_id``, ``truth`` and ``pred`` (``None`` or ``""``
    for an invalid parse, which never qualifies).
    """
    t = get_task(task)
    ids = []
    for row in zs_run:
        pred = row.get("pred")
        if pred is None or pred == "":
            continue
        truth = row["truth"]
        if t.kind == "severity":
            truth, pred = int(truth), int(pred)
        if _is_near_miss(t, truth, pred):
            ids.append(int(row["participant_id"]))
    return sorted(set(ids))


def select_few_shot_near_miss(
    zs_run: Iterable[Mapping],
    task: str,
    k: int,
    seed: int,
    manifest: DatasetManifest,
    exclude_split: str | None = "test",
) -> list[FewShotExample]:
    """Pick ``k`` exemplars among zero-shot near misses, labelled with their truth."""
    t = get_task(task)
    rows = list(zs_run)
    candidates = near_miss_candidates(rows, task)
    if exclude_split:
        candidates = [i for i in candidates if manifest.get(i).split != exclude_split]
    candidates = [i for i in candidates if manifest.get(i).has_transcript]
    if len(candidates) < k:
        raise InsufficientCandidates(len(candidates), k)
    rng = random.Random(seed)
    rng.shuffle(candidates)
    truths = {int(r["participant_id"]): r["truth"] for r in rows}
    out = []
    for pid in candidates[:k]:
        truth = truths[pid]
        value = int(truth) if t.kind == "severity" else truth
        out.append(_example(t, manifest.get(pid), value))
    return out
