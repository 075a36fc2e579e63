"""Cross-modality correctness analysis: co-occurrence counts, MSS and DRS.

Scores are percentages in [-100, 100]. A zero denominator yields ``None``,
serialized as ``undefined``; 0 is a real (tie) value.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping

UNDEFINED = "undefined"

TAG_COLORS = {
    "both_wrong": "red",
    "both_right": "green",
    "split": "blue",
    "all_agree": "green",
    "combined_flips_agreement": "red",
    "resolves_disagreement": "blue",
}


class KeyMismatch(ValueError):
    def __init__(self, ids):
        ids = sorted(ids)
        super().__init__(f"correctness vectors cover different participants: {ids[:10]}")
        self.ids = ids


@dataclass(frozen=True)
class CorrectnessVector:
    run_identity: tuple
    bits: Mapping[int, bool]

    @classmethod
    def from_predictions(cls, run_identity: tuple, truths: Mapping[int, object], preds: Mapping[int, object]):
        """Invalid predictions (``None``) count as incorrect."""
        return cls(run_identity, {pid: preds.get(pid) is not None and preds[pid] == truths[pid] for pid in truths})


@dataclass(frozen=True)
class DisagreementPartition:
    a_only_correct: int
    b_only_correct: int
    both_correct: int
    both_incorrect: int

    @property
    def total(self) -> int:
        return self.a_only_correct + self.b_only_correct + self.both_correct + self.both_incorrect

    @property
    def disagreements(self) -> int:
        return self.a_only_correct + self.b_only_correct


@dataclass(frozen=True)
class CombinedResolution:
    resolved_correctly: int
    resolved_incorrectly: int
    flipped_agreement_right: int
    flipped_agreement_wrong: int
    confirmed_agreement: int

    @property
    def disagreements(self) -> int:
        return self.resolved_correctly + self.resolved_incorrectly


def _check_keys(*vectors: CorrectnessVector) -> None:
    keys = [set(v.bits) for v in vectors]
    union = set().union(*keys)
    inter = set.intersection(*keys)
    if union != inter:
        raise KeyMismatch(union - inter)


def partition(a: CorrectnessVector, b: CorrectnessVector) -> DisagreementPartition:
    _check_keys(a, b)
    a_only = b_only = both = neither = 0
    for pid, ca in a.bits.items():
        cb = b.bits[pid]
        if ca and cb:
            both += 1
        elif ca:
            a_only += 1
        elif cb:
            b_only += 1
        else:
            neither += 1
    return DisagreementPartition(a_only, b_only, both, neither)


def resolve(a: CorrectnessVector, b: CorrectnessVector, combined: CorrectnessVector) -> CombinedResolution:
    """How the combined modality behaves on the A/B disagreement and agreement sets."""
    _check_keys(a, b, combined)
    rc = ri = far = faw = conf = 0
    for pid, ca in a.bits.items():
        cb, cc = b.bits[pid], combined.bits[pid]
        if ca != cb:
            if cc:
                rc += 1
            else:
                ri += 1
        elif ca and not cc:
            faw += 1
        elif not ca and cc:
            far += 1
        else:
            conf += 1
    res = CombinedResolution(rc, ri, far, faw, conf)
    assert res.disagreements == partition(a, b).disagreements
    return res


def _signed_share(wins: int, losses: int) -> float | None:
    if wins + losses == 0:
        return None
    return (wins - losses) / (wins + losses) * 100.0


def mss(p: DisagreementPartition) -> float | None:
    """Modal superiority of A over B: net share of correctness disagreements A wins."""
    return _signed_share(p.a_only_correct, p.b_only_correct)


def drs(c: CombinedResolution) -> float | None:
    """Net share of A/B disagreements the combined modality settles correctly."""
    return _signed_share(c.resolved_correctly, c.resolved_incorrectly)


def mss_combined_vs_agreement(c: CombinedResolution) -> float | None:
    """Combined modality against the joint A/B verdict, on agreement cases it overturns."""
    return _signed_share(c.flipped_agreement_right, c.flipped_agreement_wrong)


def format_score(value: float | None, digits: int = 2) -> str:
    return UNDEFINED if value is None else f"{value:.{digits}f}"


@dataclass
class CoOccurrence:
    """Plot-ready correctness counts; ``cells`` rows are (a_ok, b_ok, combined_ok|None, count, tag)."""

    labels: tuple[str, ...]
    cells: list[tuple]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = [f"{self.labels[0]}_correct", f"{self.labels[1]}_correct"]
        if len(self.labels) == 3:
            header.append(f"{self.labels[2]}_correct")
        w.writerow(header + ["count", "category", "color"])
        for cell in self.cells:
            flags = [int(x) for x in cell[:len(self.labels)]]
            w.writerow(flags + [cell[-2], cell[-1], TAG_COLORS[cell[-1]]])
        return buf.getvalue()


def emit_co_occurrence(
    a: CorrectnessVector,
    b: CorrectnessVector,
    combined: CorrectnessVector | None = None,
    labels: tuple[str, ...] = ("a", "b", "combined"),
) -> CoOccurrence:
    """2x2 (or 2x2x2 with ``combined``) correctness counts with colour categories.

    Pairwise: red both wrong, green both right, blue split. Three-way: green
    when all three agree, red when the combined modality departs from an A/B
    agreement, blue on A/B disagreements.
    """
    vectors = [a, b] + ([combined] if combined is not None else [])
    _check_keys(*vectors)
    k = len(vectors)
    tally: dict[tuple[bool, ...], int] = {}
    for pid in sorted(a.bits):
        key = tuple(bool(v.bits[pid]) for v in vectors)
        tally[key] = tally.get(key, 0) + 1

    cells = []
    for key in _all_keys(k):
        count = tally.get(key, 0)
        if k == 2:
            tag = "both_right" if all(key) else "both_wrong" if not any(key) else "split"
        else:
            ka, kb, kc = key
            if ka != kb:
                tag = "resolves_disagreement"
            elif kc == ka:
                tag = "all_agree"
            else:
                tag = "combined_flips_agreement"
        cells.append(key + (count, tag))
    return CoOccurrence(labels=tuple(labels[:k]), cells=cells)


def _all_keys(k: int) -> list[tuple[bool, ...]]:
    keys = [()]
    for _ in range(k):
        keys = [prefix + (flag,) for prefix in keys for flag in (True, False)]
    return keys
