"""Provider configuration blocks and their YAML file format."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

KINDS = ("openai_compatible", "gemini_compatible", "mock")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProviderConfig:
    name: str
    kind: str
    model_name: str
    base_url: str = ""
    api_key_env: str = ""
    supports_audio: bool = False
    max_concurrent: int = 1
    requests_per_minute: int = 60
    temperature: float = 0.0
    request_timeout_s: float = 120.0
    max_attempts: int = 5
    backoff_base_s: float = 1.0
    mock: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"provider {self.name}: kind must be one of {KINDS}")
        if self.kind != "mock" and not self.base_url:
            raise ConfigError(f"provider {self.name}: base_url is required")
        if self.max_concurrent < 1 or self.requests_per_minute < 1:
            raise ConfigError(f"provider {self.name}: max_concurrent and requests_per_minute must be positive")
        if self.temperature < 0 or self.request_timeout_s <= 0:
            raise ConfigError(f"provider {self.name}: bad temperature or timeout")
        if self.max_attempts < 1 or self.backoff_base_s < 0:
            raise ConfigError(f"provider {self.name}: bad retry settings")
        if self.kind == "mock":
            from .mock import MockBehavior

            try:
                MockBehavior.from_dict(self.mock)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"provider {self.name}: bad mock settings: {exc}") from None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ProviderConfig":
        if any(k in d for k in ("api_key", "key", "token")):
            raise ConfigError("API keys must come from the environment via api_key_env")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"provider {d.get('name')}: unknown fields {sorted(unknown)}")
        return cls(**d)


def load_provider_configs(path: str | Path) -> dict[str, ProviderConfig]:
    """Read ``providers:`` blocks (or a bare list) from a YAML file, keyed by name."""
    raw = yaml.safe_load(Path(path).read_text()) or {}
    blocks = raw.get("providers", raw) if isinstance(raw, dict) else raw
    if isinstance(blocks, dict):
        blocks = [{"name": name, **spec} for name, spec in blocks.items()]
    out: dict[str, ProviderConfig] = {}
    for block in blocks:
        cfg = ProviderConfig.from_dict(block)
        if cfg.name in out:
            raise ConfigError(f"duplicate provider {cfg.name}")
        out[cfg.name] = cfg
    return out
