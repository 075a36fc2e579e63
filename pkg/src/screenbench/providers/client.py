"""Inference over chat-completion style APIs with caching, retries and admission control."""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import os
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Protocol

import httpx

from ..prompts import RenderedPrompt
from .cache import ResponseCache
from .config import ProviderConfig
from .gate import AdmissionGate
from .mock import MockBehavior, mock_text

log = logging.getLogger(__name__)

AUDIO_MODALITIES = ("audio", "audio_text")


class ProviderError(RuntimeError):
    pass


class AuthError(ProviderError):
    pass


class RateLimitedExhausted(ProviderError):
    pass


class TimeoutExhausted(ProviderError):
    pass


class UnsupportedModality(ProviderError):
    pass


class TransportError(ProviderError):
    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class TransportTimeout(Exception):
    """Raised by transports when a single attempt times out."""


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass(frozen=True)
class InferenceRequest:
    prompt: RenderedPrompt
    provider: ProviderConfig
    truth: Any = None  # only read by the mock provider
    salt: str = ""  # distinguishes deliberate re-asks of the same prompt
    idempotency_key: str = field(init=False)

    def __post_init__(self):
        payload = {
            "provider": self.provider.name,
            "model": self.provider.model_name,
            "content_hash": self.prompt.identity.content_hash,
            "attachments": [file_sha256(a) for a in self.prompt.attachments],
            "temperature": self.provider.temperature,
        }
        if self.salt:
            payload["salt"] = self.salt
        key = hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()
        object.__setattr__(self, "idempotency_key", key)


@dataclass
class InferenceResponse:
    raw_text: str
    latency_ms: float
    retries_used: int
    from_cache: bool
    provider_meta: dict = field(default_factory=dict)


@dataclass
class TransportResponse:
    status: int
    text: str = ""
    meta: dict = field(default_factory=dict)


class Transport(Protocol):
    def send(self, req: InferenceRequest) -> TransportResponse: ...


# ---------------------------------------------------------------------------
# Transports
# ---------------------------------------------------------------------------

def _audio_b64(path: Path) -> str:
    return base64.b64encode(Path(path).read_bytes()).decode("ascii")


def build_http_request(req: InferenceRequest, api_key: str) -> tuple[str, dict, dict]:
    """(url, headers, json body) in the provider kind's public chat schema."""
    p = req.provider
    prompt = req.prompt
    base = p.base_url.rstrip("/")
    if p.kind == "openai_compatible":
        if prompt.attachments:
            content: Any = [{"type": "text", "text": prompt.text}]
            for a in prompt.attachments:
                content.append({"type": "input_audio", "input_audio": {"data": _audio_b64(a), "format": "wav"}})
        else:
            content = prompt.text
        body = {
            "model": p.model_name,
            "temperature": p.temperature,
            "messages": [{"role": "user", "content": content}],
        }
        return f"{base}/chat/completions", {"Authorization": f"Bearer {api_key}"}, body
    if p.kind == "gemini_compatible":
        parts: list[dict] = [{"text": prompt.text}]
        for a in prompt.attachments:
            parts.append({"inline_data": {"mime_type": "audio/wav", "data": _audio_b64(a)}})
        body = {
            "contents": [{"role": "user", "parts": parts}],
            "generationConfig": {"temperature": p.temperature},
        }
        return f"{base}/models/{p.model_name}:generateContent", {"x-goog-api-key": api_key}, body
    raise ValueError(f"no HTTP schema for provider kind {p.kind!r}")


def extract_text(kind: str, payload: dict) -> str:
    try:
        if kind == "openai_compatible":
            content = payload["choices"][0]["message"]["content"]
            if isinstance(content, list):
                return "".join(part.get("text", "") for part in content)
            return content
        if kind == "gemini_compatible":
            parts = payload["candidates"][0]["content"]["parts"]
            return "".join(part.get("text", "") for part in parts)
    except (KeyError, IndexError, TypeError) as exc:
        raise TransportError(f"unexpected response shape: {exc!r}") from None
    raise ValueError(f"no HTTP schema for provider kind {kind!r}")


class HttpTransport:
    """Real network transport; pass an ``httpx`` transport to intercept traffic in tests."""

    def __init__(self, transport: httpx.BaseTransport | None = None):
        self._transport = transport
        self._clients: dict[float, httpx.Client] = {}
        self._lock = threading.Lock()

    def _client(self, timeout: float) -> httpx.Client:
        with self._lock:
            if timeout not in self._clients:
                self._clients[timeout] = httpx.Client(timeout=timeout, transport=self._transport)
            return self._clients[timeout]

    def send(self, req: InferenceRequest) -> TransportResponse:
        p = req.provider
        api_key = os.environ.get(p.api_key_env, "") if p.api_key_env else ""
        if p.api_key_env and not api_key:
            raise AuthError(f"environment variable {p.api_key_env} is not set")
        url, headers, body = build_http_request(req, api_key)
        try:
            r = self._client(p.request_timeout_s).post(url, headers=headers, json=body)
        except httpx.TimeoutException as exc:
            raise TransportTimeout(str(exc)) from exc
        except httpx.HTTPError as exc:
            return TransportResponse(status=0, text=f"{type(exc).__name__}: {exc}")
        if r.status_code != 200:
            return TransportResponse(status=r.status_code, text=r.text[:500])
        try:
            payload = r.json()
        except ValueError:
            raise TransportError("response body is not JSON") from None
        return TransportResponse(status=200, text=extract_text(p.kind, payload), meta={"http_status": 200})


class MockTransport:
    """Offline transport backed by :func:`mock_text`; counts every served call."""

    def __init__(self, behavior: MockBehavior | None = None):
        self.behavior = behavior
        self.calls = 0
        self._lock = threading.Lock()

    def send(self, req: InferenceRequest) -> TransportResponse:
        behavior = self.behavior or MockBehavior.from_dict(req.provider.mock)
        ident = req.prompt.identity
        text, outcome = mock_text(ident.task, ident.modality, req.truth, req.idempotency_key, behavior)
        with self._lock:
            self.calls += 1
        return TransportResponse(status=200, text=text, meta={"mock_outcome": outcome})


# ---------------------------------------------------------------------------
# Client
# ---------------------------------------------------------------------------

class InferenceClient:
    """One client per provider: cache lookup, admission, retry with backoff."""

    def __init__(
        self,
        provider: ProviderConfig,
        cache: ResponseCache | None = None,
        transport: Transport | None = None,
        gate: AdmissionGate | None = None,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.provider = provider
        self.cache = cache
        if transport is None:
            transport = MockTransport() if provider.kind == "mock" else HttpTransport()
        self.transport = transport
        self.gate = gate or AdmissionGate(provider.max_concurrent, provider.requests_per_minute, clock, sleep)
        self.clock = clock
        self.sleep = sleep
        self._jitter = random.Random()

    def backoff(self, attempt: int) -> float:
        base = self.provider.backoff_base_s * 2 ** attempt
        return base + self._jitter.uniform(0, self.provider.backoff_base_s)

    def infer(self, req: InferenceRequest) -> InferenceResponse:
        if req.prompt.identity.modality in AUDIO_MODALITIES and not self.provider.supports_audio:
            raise UnsupportedModality(f"provider {self.provider.name} does not accept audio")
        key = req.idempotency_key
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                text, meta = hit
                return InferenceResponse(text, 0.0, 0, True, meta)
        for a in req.prompt.attachments:
            if not Path(a).exists():
                raise TransportError(f"attachment missing: {a}")

        last_kind, last_detail = "transport", ""
        start = self.clock()
        for attempt in range(self.provider.max_attempts):
            if attempt:
                self.sleep(self.backoff(attempt - 1))
            self.gate.acquire()
            try:
                resp = self.transport.send(req)
            except TransportTimeout as exc:
                last_kind, last_detail = "timeout", str(exc)
                continue
            finally:
                self.gate.release()
            if resp.status == 200:
                latency = (self.clock() - start) * 1000.0
                meta = {"provider": self.provider.name, "model": self.provider.model_name, **resp.meta}
                if self.cache is not None:
                    self.cache.put(key, resp.text, meta)
                return InferenceResponse(resp.text, latency, attempt, False, meta)
            if resp.status in (401, 403):
                raise AuthError(f"HTTP {resp.status}: {resp.text}")
            if resp.status == 429:
                last_kind, last_detail = "rate", resp.text
            elif resp.status >= 500 or resp.status == 0:
                last_kind, last_detail = "transport", f"HTTP {resp.status}: {resp.text}"
            else:
                raise TransportError(f"HTTP {resp.status}: {resp.text}")
            log.debug("attempt %d for %s failed: %s", attempt + 1, key[:12], last_detail)

        attempts = self.provider.max_attempts
        if last_kind == "rate":
            raise RateLimitedExhausted(f"still rate limited after {attempts} attempts")
        if last_kind == "timeout":
            raise TimeoutExhausted(f"timed out on all {attempts} attempts: {last_detail}")
        raise TransportError(f"failed after {attempts} attempts: {last_detail}")


def infer(req: InferenceRequest, cache: ResponseCache | None = None, transport: Transport | None = None) -> InferenceResponse:
    """One-off convenience wrapper around :class:`InferenceClient`."""
    return InferenceClient(req.provider, cache=cache, transport=transport).infer(req)
