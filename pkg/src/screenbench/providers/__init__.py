"""Inference providers: HTTP chat APIs, the offline mock, caching and transcription."""

from .cache import ResponseCache
from .client import (
    AuthError,
    HttpTransport,
    InferenceClient,
    InferenceRequest,
    InferenceResponse,
    MockTransport,
    ProviderError,
    RateLimitedExhausted,
    TimeoutExhausted,
    TransportError,
    TransportResponse,
    TransportTimeout,
    UnsupportedModality,
    infer,
)
from .config import ConfigError, ProviderConfig, load_provider_configs
from .gate import AdmissionGate
from .mock import MockBehavior, mock_infer
from .transcribe import (
    AdapterUnavailable,
    Transcriber,
    TranscriptionAdapter,
    TranscriptionFailed,
    transcribe,
)

__all__ = [
    "AdapterUnavailable", "AdmissionGate", "AuthError", "ConfigError", "HttpTransport",
    "InferenceClient", "InferenceRequest", "InferenceResponse", "MockBehavior", "MockTransport",
    "ProviderConfig", "ProviderError", "RateLimitedExhausted", "ResponseCache", "TimeoutExhausted",
    "Transcriber", "TranscriptionAdapter", "TranscriptionFailed", "TransportError",
    "TransportResponse", "TransportTimeout", "UnsupportedModality", "infer",
    "load_provider_configs", "mock_infer", "transcribe",
]
