"""Deterministic offline model: answers correctly, wrongly or malformed by seeded draw."""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Mapping

from ..tasks import get_task


@dataclass(frozen=True)
class MockBehavior:
    accuracy_by_modality: Mapping[str, float] = field(default_factory=dict)
    accuracy: float = 1.0  # fallback for modalities not listed
    invalid_rate: float = 0.0
    verbosity: str = "terse"  # terse | verbose
    seed: int = 0

    def __post_init__(self):
        for acc in [self.accuracy, *self.accuracy_by_modality.values()]:
            if not 0 <= acc <= 1 or acc + self.invalid_rate > 1 + 1e-12:
                raise ValueError(f"accuracy {acc} with invalid_rate {self.invalid_rate} is not a distribution")
        if self.verbosity not in ("terse", "verbose"):
            raise ValueError(f"unknown verbosity {self.verbosity!r}")

    @classmethod
    def from_dict(cls, d: Mapping) -> "MockBehavior":
        d = dict(d)
        acc = d.pop("accuracy", 1.0)
        if isinstance(acc, Mapping):
            d["accuracy_by_modality"] = dict(acc)
            acc = d.pop("default_accuracy", 1.0 - d.get("invalid_rate", 0.0))
        return cls(accuracy=acc, **d)

    def accuracy_for(self, modality: str) -> float:
        return self.accuracy_by_modality.get(modality, self.accuracy)


_MALFORMED = {
    "binary": (
        "Yes and no, the evidence is mixed.",
        "I cannot determine this from the interview.",
        "There is no clear answer, but yes, some signs are present.",
    ),
    "severity": (
        "Somewhere between {lo} and {hi}.",
        "{over}",
        "It could be {lo} or {hi}, hard to say.",
        "Unclear from the interview.",
    ),
    "multiclass": (
        "Normal, or possibly PTSD.",
        "I cannot tell from this interview.",
        "Depressed or PTSD, the signs overlap.",
    ),
}


def _rng(seed: int, key: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{key}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def mock_text(task_name: str, modality: str, truth, key: str, behavior: MockBehavior) -> tuple[str, str]:
    """Return (raw_text, outcome) where outcome is correct, wrong or malformed."""
    task = get_task(task_name)
    rng = _rng(behavior.seed, key)
    u = rng.random()
    acc = behavior.accuracy_for(modality)
    if u < acc:
        outcome, value = "correct", truth
    elif u < acc + behavior.invalid_rate:
        outcome = "malformed"
        lo, hi = (0, 0)
        if task.kind == "severity":
            lo, hi = task.allowed_range()
        text = rng.choice(_MALFORMED[task.kind]).format(lo=lo, hi=hi, over=hi + 3)
        return text, outcome
    else:
        outcome = "wrong"
        value = rng.choice([c for c in task.classes if c != truth])
    label = task.label_text(value)
    if behavior.verbosity == "verbose":
        return f"Based on the interview, my answer is {label}.", outcome
    return label, outcome


def mock_infer(req, behavior: MockBehavior):
    """Answer ``req`` offline; needs ``req.truth`` from the harness channel."""
    from .client import InferenceResponse

    ident = req.prompt.identity
    text, outcome = mock_text(ident.task, ident.modality, req.truth, req.idempotency_key, behavior)
    return InferenceResponse(raw_text=text, latency_ms=0.0, retries_used=0, from_cache=False,
                             provider_meta={"mock_outcome": outcome})
