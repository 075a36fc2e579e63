"""Expand an experiment grid into an ordered request list."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..corpus import DatasetManifest, apply_label_corrections, load_manifest
from .config import ExperimentConfig


@dataclass(frozen=True, order=True)
class PlannedRequest:
    task: str
    variant: str
    modality: str
    participant_id: int
    provider: str
    shot_mode: str

    @property
    def key(self) -> str:
        return f"{self.task}|{self.variant}|{self.modality}|{self.participant_id}|{self.provider}|{self.shot_mode}"

    @property
    def cell(self) -> tuple[str, str, str, str, str]:
        return (self.task, self.variant, self.modality, self.provider, self.shot_mode)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Plan:
    requests: list[PlannedRequest]
    exclusions: list[tuple[PlannedRequest, str]] = field(default_factory=list)
    manifest: DatasetManifest | None = None

    def __len__(self) -> int:
        return len(self.requests) + len(self.exclusions)


def _missing_media(record, modality: str) -> str | None:
    if modality in ("text", "audio_text") and not record.has_transcript:
        return "missing transcript"
    if modality in ("audio", "audio_text") and not record.has_audio:
        return "missing audio"
    return None


def plan(config: ExperimentConfig, manifest: DatasetManifest | None = None) -> Plan:
    """Requests ordered by (task, variant, modality, participant, provider).

    Interviews lacking the media a modality needs are listed as exclusions
    rather than requests. The manifest is label-corrected before planning.
    """
    config.validate()
    if manifest is None:
        manifest = load_manifest(config.manifest_path, config.manifest_layout)
    manifest = apply_label_corrections(manifest)
    records = sorted(manifest.records, key=lambda r: r.participant_id)
    requests, exclusions = [], []
    for task in config.tasks:
        for variant in config.variants_for(task):
            for modality in config.modalities:
                for r in records:
                    for provider in config.providers:
                        req = PlannedRequest(task, variant, modality, r.participant_id, provider.name, config.shot_mode)
                        reason = _missing_media(r, modality)
                        if reason:
                            exclusions.append((req, reason))
                        else:
                            requests.append(req)
    return Plan(requests=requests, exclusions=exclusions, manifest=manifest)
