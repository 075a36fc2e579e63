"""Task registry: label spaces, ground truth and parser dispatch per task."""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import (
    MULTICLASS_LABELS,
    ParticipantRecord,
    SeverityScale,
    derive_multiclass_label,
    get_scale,
    map_severity,
)
from .parsers import Label, ParseOutcome, parse_binary, parse_multiclass, parse_severity

MULTICLASS_TEXT = {
    "normal": "Normal",
    "depressed": "Depressed",
    "ptsd": "PTSD",
    "depressed_and_ptsd": "Depressed and PTSD",
}


@dataclass(frozen=True)
class Task:
    name: str
    kind: str  # binary | severity | multiclass
    family: str  # template family on disk
    variants: tuple[str, ...]
    illness: str | None = None
    default_scale: str | None = None

    @property
    def classes(self) -> list:
        """Class values used in confusion matrices, in canonical order."""
        if self.kind == "binary":
            return [0, 1]
        if self.kind == "severity":
            return get_scale(self.default_scale).labels
        return list(MULTICLASS_LABELS)

    def allowed_range(self, scale: SeverityScale | None = None) -> tuple[int, int]:
        labels = (scale or get_scale(self.default_scale)).labels
        return labels[0], labels[-1]

    def parse(self, raw: str) -> ParseOutcome:
        if self.kind == "binary":
            return parse_binary(raw)
        if self.kind == "severity":
            return parse_severity(raw, self.allowed_range())
        return parse_multiclass(raw)

    def encode(self, label: Label):
        """Parser label -> class value (``"yes"`` -> 1 for binary tasks)."""
        if self.kind == "binary":
            return 1 if label == "yes" else 0
        return label

    def label_text(self, value) -> str:
        """Class value -> the answer string a model is asked to produce."""
        if self.kind == "binary":
            return "Yes" if value == 1 else "No"
        if self.kind == "severity":
            return str(value)
        return MULTICLASS_TEXT[value]

    def truth_score(self, r: ParticipantRecord) -> int | None:
        """Raw score behind a severity truth, kept so it can be re-binned later."""
        if self.name == "dep_severity":
            return r.phq_score
        if self.name == "ptsd_severity":
            return r.ptsd_severity
        return None

    def truth(self, r: ParticipantRecord, scale: SeverityScale | str | None = None):
        if self.name == "dep_binary":
            return r.phq_binary
        if self.name == "ptsd_binary":
            return r.pclc_binary
        if self.kind == "severity":
            return map_severity(self.truth_score(r), scale or self.default_scale)
        return derive_multiclass_label(r)


TASKS: dict[str, Task] = {
    t.name: t
    for t in (
        Task("dep_binary", "binary", "binary", ("P1", "P2", "P3"), illness="depression"),
        Task("ptsd_binary", "binary", "binary", ("P1", "P2", "P3"), illness="PTSD"),
        Task("dep_severity", "severity", "dep_severity", ("P1", "P2"), default_scale="depression_phq8"),
        Task("ptsd_severity", "severity", "ptsd_severity", ("P1", "P2"), default_scale="ptsd_reference"),
        Task("multiclass", "multiclass", "multiclass", ("P1", "P2")),
    )
}


def get_task(name: str) -> Task:
    try:
        return TASKS[name]
    except KeyError:
        raise KeyError(f"unknown task {name!r}; known: {sorted(TASKS)}") from None
