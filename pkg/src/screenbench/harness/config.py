"""Experiment configuration (YAML) and its validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..corpus import get_scale
from ..metrics import COUNT_AS_WRONG, SCORING_MODES
from ..prompts import MODALITIES, PromptError, load_template
from ..providers.config import ConfigError, ProviderConfig, load_provider_configs
from ..tasks import TASKS, get_task

SHOT_MODES = ("zero_shot", "few_shot")
AUDIO_MODALITIES = ("audio", "audio_text")


class ConfigInvalid(ValueError):
    pass


@dataclass
class ExperimentConfig:
    manifest_path: Path
    providers: list[ProviderConfig]
    tasks: list[str]
    output_dir: Path
    modalities: list[str] = field(default_factory=lambda: ["text"])
    variants: dict[str, list[str]] = field(default_factory=dict)
    shot_mode: str = "zero_shot"
    few_shot: dict[str, Any] = field(default_factory=dict)
    severity_scales: dict[str, list[str]] = field(default_factory=dict)
    scoring_mode: str = COUNT_AS_WRONG
    seed: int = 0
    manifest_layout: str = "generic_csv"
    template_dir: Path | None = None
    cache_dir: Path | None = None
    reprompt_invalid: int = 0

    def variants_for(self, task: str) -> list[str]:
        return list(self.variants.get(task) or get_task(task).variants)

    def scales_for(self, task: str) -> list[str]:
        t = get_task(task)
        if t.kind != "severity":
            return []
        return list(self.severity_scales.get(task) or [t.default_scale])

    @property
    def resolved_cache_dir(self) -> Path:
        return Path(self.cache_dir) if self.cache_dir else Path(self.output_dir) / "cache"

    def validate(self) -> None:
        if not self.tasks:
            raise ConfigInvalid("no tasks configured")
        if not self.providers:
            raise ConfigInvalid("no providers configured")
        if not self.modalities:
            raise ConfigInvalid("no modalities configured")
        names = [p.name for p in self.providers]
        if len(set(names)) != len(names):
            raise ConfigInvalid(f"duplicate provider names {names}")
        for task in self.tasks:
            if task not in TASKS:
                raise ConfigInvalid(f"unknown task {task!r}")
            for variant in self.variants_for(task):
                try:
                    load_template(task, variant, self.template_dir)
                except PromptError as exc:
                    raise ConfigInvalid(str(exc)) from None
            for scale in self.scales_for(task):
                try:
                    s = get_scale(scale)
                except KeyError as exc:
                    raise ConfigInvalid(str(exc)) from None
                if s.labels != get_scale(get_task(task).default_scale).labels:
                    raise ConfigInvalid(f"scale {scale} has labels {s.labels}, not usable for {task}")
        for m in self.modalities:
            if m not in MODALITIES:
                raise ConfigInvalid(f"unknown modality {m!r}")
            if m in AUDIO_MODALITIES:
                for p in self.providers:
                    if not p.supports_audio:
                        raise ConfigInvalid(f"provider {p.name} does not support audio but modality {m} is requested")
        if self.shot_mode not in SHOT_MODES:
            raise ConfigInvalid(f"unknown shot_mode {self.shot_mode!r}")
        if self.shot_mode == "few_shot":
            needs_zs = [t for t in self.tasks if get_task(t).kind != "binary"]
            if needs_zs and not self.few_shot.get("zero_shot_run"):
                raise ConfigInvalid(f"few-shot for {needs_zs} needs few_shot.zero_shot_run")
        if self.scoring_mode not in SCORING_MODES:
            raise ConfigInvalid(f"unknown scoring_mode {self.scoring_mode!r}")
        if self.reprompt_invalid < 0:
            raise ConfigInvalid("reprompt_invalid must be >= 0")

    def snapshot(self) -> dict:
        """JSON-ready view used to decide whether a run directory may be resumed."""
        return {
            "manifest_path": str(self.manifest_path),
            "manifest_layout": self.manifest_layout,
            "providers": [p.to_dict() for p in self.providers],
            "tasks": list(self.tasks),
            "variants": {t: self.variants_for(t) for t in self.tasks},
            "modalities": list(self.modalities),
            "shot_mode": self.shot_mode,
            "few_shot": {k: str(v) if isinstance(v, Path) else v for k, v in sorted(self.few_shot.items())},
            "severity_scales": {t: self.scales_for(t) for t in self.tasks if self.scales_for(t)},
            "scoring_mode": self.scoring_mode,
            "seed": self.seed,
            "reprompt_invalid": self.reprompt_invalid,
            "prompt_role": "user",
        }

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        d = dict(d)
        base = Path(base_dir) if base_dir else Path(".")

        def path(value):
            if value is None:
                return None
            p = Path(value)
            return p if p.is_absolute() else base / p

        providers_raw = d.pop("providers", [])
        provider_file = d.pop("provider_file", None)
        try:
            providers = _load_providers(providers_raw, provider_file and path(provider_file))
        except ConfigError as exc:
            raise ConfigInvalid(str(exc)) from None

        few_shot = dict(d.pop("few_shot", {}) or {})
        if few_shot.get("zero_shot_run"):
            few_shot["zero_shot_run"] = str(path(few_shot["zero_shot_run"]))
        known = set(cls.__dataclass_fields__) - {"providers", "few_shot"}
        unknown = set(d) - known
        if unknown:
            raise ConfigInvalid(f"unknown config keys {sorted(unknown)}")
        try:
            cfg = cls(
                manifest_path=path(d.pop("manifest_path")),
                output_dir=path(d.pop("output_dir")),
                template_dir=path(d.pop("template_dir", None)),
                cache_dir=path(d.pop("cache_dir", None)),
                providers=providers,
                few_shot=few_shot,
                **d,
            )
        except KeyError as exc:
            raise ConfigInvalid(f"missing config key {exc.args[0]!r}") from None
        return cfg


def _load_providers(raw: list, provider_file: Path | None) -> list[ProviderConfig]:
    if provider_file:
        available = load_provider_configs(provider_file)
        chosen = raw or list(available)
        try:
            return [available[name] for name in chosen]
        except KeyError as exc:
            raise ConfigInvalid(f"provider {exc.args[0]!r} not in {provider_file}") from None
    return [ProviderConfig.from_dict(p) for p in raw]


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    raw = yaml.safe_load(path.read_text()) or {}
    return ExperimentConfig.from_dict(raw, base_dir=path.parent)
