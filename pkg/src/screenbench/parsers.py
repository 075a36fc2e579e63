"""Strict extraction of task labels from raw model text.

Invalid outputs are values, not exceptions: every parser is total over
arbitrary strings and returns a :class:`ParseOutcome`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

Label = Union[str, int]

VALID = "valid"
INVALID = "invalid"
REASONS = (
    "both_tokens", "no_token", "multiple_numbers", "out_of_range",
    "no_category", "ambiguous_category",
)

# letters only: digits, underscore and punctuation all delimit words
_LETTER = r"[^\W\d_]"
_YES_NO = re.compile(rf"(?<!{_LETTER})(yes|no)(?!{_LETTER})", re.IGNORECASE)
_INTEGER = re.compile(r"-?[0-9]+")
# beyond this many digits a literal is out of range for any severity scale
_MAX_DIGITS = 18

# longest phrase first so "Depressed and PTSD" is never split into two hits
_CATEGORIES = (
    ("depressed_and_ptsd", re.compile(rf"(?<!{_LETTER})depressed\s+and\s+ptsd(?!{_LETTER})", re.IGNORECASE)),
    ("depressed", re.compile(rf"(?<!{_LETTER})depressed(?!{_LETTER})", re.IGNORECASE)),
    ("normal", re.compile(rf"(?<!{_LETTER})normal(?!{_LETTER})", re.IGNORECASE)),
    ("ptsd", re.compile(rf"(?<!{_LETTER})ptsd(?!{_LETTER})", re.IGNORECASE)),
)


@dataclass(frozen=True)
class ParseOutcome:
    status: str
    label: Label | None = None
    reason: str | None = None
    matched_span: tuple[int, int] | None = None

    @property
    def valid(self) -> bool:
        return self.status == VALID

    @classmethod
    def ok(cls, label: Label, span: tuple[int, int]) -> "ParseOutcome":
        return cls(VALID, label=label, matched_span=span)

    @classmethod
    def bad(cls, reason: str) -> "ParseOutcome":
        return cls(INVALID, reason=reason)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "label": self.label,
            "reason": self.reason,
            "matched_span": list(self.matched_span) if self.matched_span else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ParseOutcome":
        span = d.get("matched_span")
        return cls(d["status"], d.get("label"), d.get("reason"), tuple(span) if span else None)


def canonical_phrase(text: str) -> str:
    """Case-fold and collapse whitespace, e.g. ``'Depressed \\n and PTSD'`` -> ``'depressed and ptsd'``."""
    return " ".join(text.casefold().split())


def parse_binary(raw: str) -> ParseOutcome:
    kinds: dict[str, tuple[int, int]] = {}
    for m in _YES_NO.finditer(raw):
        kinds.setdefault(m.group(1).casefold(), m.span())
    if len(kinds) == 2:
        return ParseOutcome.bad("both_tokens")
    if not kinds:
        return ParseOutcome.bad("no_token")
    (label, span), = kinds.items()
    return ParseOutcome.ok(label, span)


def parse_severity(raw: str, allowed_range: tuple[int, int]) -> ParseOutcome:
    lo, hi = allowed_range
    if lo > hi:
        raise ValueError(f"empty range {allowed_range}")
    hits = list(_INTEGER.finditer(raw))
    if not hits:
        return ParseOutcome.bad("no_token")
    if len(hits) > 1:
        return ParseOutcome.bad("multiple_numbers")
    m = hits[0]
    literal = m.group(0)
    if len(literal.lstrip("-").lstrip("0")) > _MAX_DIGITS:
        return ParseOutcome.bad("out_of_range")
    value = int(literal)
    if not lo <= value <= hi:
        return ParseOutcome.bad("out_of_range")
    return ParseOutcome.ok(value, m.span())


def parse_multiclass(raw: str) -> ParseOutcome:
    masked = raw
    found: dict[str, tuple[int, int]] = {}
    for label, pattern in _CATEGORIES:
        for m in pattern.finditer(masked):
            found.setdefault(label, m.span())
            # blank out the hit so shorter phrases cannot re-match inside it
            start, end = m.span()
            masked = masked[:start] + " " * (end - start) + masked[end:]
    if not found:
        return ParseOutcome.bad("no_category")
    if len(found) > 1:
        return ParseOutcome.bad("ambiguous_category")
    (label, span), = found.items()
    return ParseOutcome.ok(label, span)


def canonicalize(task_kind: str, text: str) -> Label | None:
    """Map a matched substring back to its canonical label (used for soundness checks)."""
    phrase = canonical_phrase(text)
    if task_kind == "binary":
        return phrase if phrase in ("yes", "no") else None
    if task_kind == "severity":
        try:
            return int(phrase)
        except ValueError:
            return None
    if task_kind == "multiclass":
        return {
            "depressed and ptsd": "depressed_and_ptsd",
            "depressed": "depressed",
            "normal": "normal",
            "ptsd": "ptsd",
        }.get(phrase)
    raise ValueError(f"unknown task kind {task_kind!r}")
