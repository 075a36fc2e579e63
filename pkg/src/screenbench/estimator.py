"""A scikit-learn style wrapper: one prompt cell as a classifier over interviews."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .corpus import DatasetManifest, ParticipantRecord, read_transcript
from .metrics import COUNT_AS_WRONG, SCORING_MODES, build_report
from .prompts import (
    MODALITIES,
    load_template,
    render_few_shot,
    render_zero_shot,
    select_few_shot_binary,
    select_few_shot_near_miss,
)
from .providers import InferenceClient, InferenceRequest, ProviderConfig, ResponseCache
from .tasks import get_task


def _records(X) -> list[ParticipantRecord]:
    if isinstance(X, DatasetManifest):
        X = X.records
    X = list(X)
    if not X:
        raise ValueError("X is empty")
    for r in X:
        if not isinstance(r, ParticipantRecord):
            raise TypeError(f"X must hold ParticipantRecord objects, got {type(r).__name__}")
    return X


class PromptClassifier(ClassifierMixin, BaseEstimator):
    """Predict a task label for each interview by prompting a provider.

    ``fit`` only chooses few-shot exemplars (nothing is trained). For binary
    tasks it draws two positives and one negative from ``X``; for severity
    and multiclass tasks it runs a zero-shot pass over ``X`` and keeps ``k``
    near misses. ``predict`` returns an object array with ``None`` wherever
    the response failed strict parsing.
    """

    def __init__(
        self,
        task: str = "dep_binary",
        variant: str = "P1",
        modality: str = "text",
        provider: ProviderConfig | dict | None = None,
        shot_mode: str = "zero_shot",
        k: int = 3,
        seed: int = 0,
        cache_dir: str | None = None,
        transport=None,
        scoring_mode: str = COUNT_AS_WRONG,
    ):
        self.task = task
        self.variant = variant
        self.modality = modality
        self.provider = provider
        self.shot_mode = shot_mode
        self.k = k
        self.seed = seed
        self.cache_dir = cache_dir
        self.transport = transport
        self.scoring_mode = scoring_mode

    def _provider(self) -> ProviderConfig:
        p = self.provider
        if p is None:
            p = {"name": "mock", "kind": "mock", "model_name": "mock", "supports_audio": True,
                 "requests_per_minute": 10**9}
        return p if isinstance(p, ProviderConfig) else ProviderConfig.from_dict(p)

    def _check_params(self) -> None:
        get_task(self.task)
        load_template(self.task, self.variant)
        if self.modality not in MODALITIES:
            raise ValueError(f"unknown modality {self.modality!r}")
        if self.shot_mode not in ("zero_shot", "few_shot"):
            raise ValueError(f"unknown shot_mode {self.shot_mode!r}")
        if self.scoring_mode not in SCORING_MODES:
            raise ValueError(f"unknown scoring_mode {self.scoring_mode!r}")

    def _client(self) -> InferenceClient:
        if not hasattr(self, "client_"):
            cache = ResponseCache(self.cache_dir) if self.cache_dir else None
            self.client_ = InferenceClient(self._provider(), cache=cache, transport=self.transport)
        return self.client_

    def fit(self, X, y=None):
        self._check_params()
        records = _records(X)
        task = get_task(self.task)
        truths = [task.truth(r) for r in records]
        if y is not None:
            y = list(y)
            if len(y) != len(records):
                raise ValueError(f"X has {len(records)} records but y has {len(y)} labels")
            if [str(a) for a in y] != [str(b) for b in truths]:
                raise ValueError("y disagrees with the labels carried by the records")
        self.provider_ = self._provider()
        self.classes_ = np.array(task.classes, dtype=object)
        self.examples_ = []
        if self.shot_mode == "few_shot":
            manifest = DatasetManifest(tuple(records))
            if task.kind == "binary":
                self.examples_ = select_few_shot_binary(manifest, self.task, seed=self.seed)
            else:
                preds = self._infer(records, examples=[])
                rows = [{"participant_id": r.participant_id, "truth": t, "pred": p}
                        for r, t, p in zip(records, truths, preds)]
                self.examples_ = select_few_shot_near_miss(rows, self.task, self.k, self.seed, manifest,
                                                           exclude_split=None)
        self.n_fitted_ = len(records)
        return self

    def _infer(self, records, examples) -> list:
        task = get_task(self.task)
        template = load_template(self.task, self.variant)
        client = self._client()
        provider = self._provider()
        out, outcomes = [], []
        for r in records:
            transcript = None
            if self.modality in ("text", "audio_text") and r.has_transcript:
                transcript = read_transcript(r.transcript_path)
            if examples:
                prompt = render_few_shot(template, r, self.modality, examples, allow_subject=True,
                                         transcript=transcript)
            else:
                prompt = render_zero_shot(template, r, self.modality, transcript=transcript)
            resp = client.infer(InferenceRequest(prompt=prompt, provider=provider, truth=task.truth(r)))
            outcome = task.parse(resp.raw_text)
            outcomes.append(outcome)
            out.append(task.encode(outcome.label) if outcome.valid else None)
        self.last_outcomes_ = outcomes
        return out

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "classes_"):
            raise AttributeError("PromptClassifier is not fitted; call fit first")
        preds = self._infer(_records(X), self.examples_)
        return np.array(preds, dtype=object)

    def score(self, X, y=None, sample_weight=None) -> float:
        """Balanced accuracy under ``scoring_mode``."""
        if sample_weight is not None:
            raise ValueError("sample_weight is not supported")
        records = _records(X)
        task = get_task(self.task)
        truths = list(y) if y is not None else [task.truth(r) for r in records]
        rep = build_report(task.kind, truths, list(self.predict(records)), task.classes, self.scoring_mode)
        return rep.balanced_accuracy if rep.balanced_accuracy is not None else 0.0
