"""Shared test doubles: simulated time, scripted transports, provider configs."""

from __future__ import annotations

import threading

from screenbench.providers import ProviderConfig
from screenbench.providers.client import TransportResponse


class SimClock:
    """Monotonic fake time; ``sleep`` advances it instantly."""

    def __init__(self, start: float = 0.0):
        self.now = start
        self.sleeps: list[float] = []
        self._lock = threading.Lock()

    def __call__(self) -> float:
        return self.now

    def sleep(self, seconds: float) -> None:
        with self._lock:
            self.sleeps.append(seconds)
            self.now += max(seconds, 0.0)


class ScriptedTransport:
    """Replays a list of (status, text) pairs, then keeps returning the last one."""

    def __init__(self, script):
        self.script = list(script)
        self.calls = 0

    def send(self, req):
        item = self.script[min(self.calls, len(self.script) - 1)]
        self.calls += 1
        if isinstance(item, Exception):
            raise item
        status, text = item
        return TransportResponse(status=status, text=text)


class CrashAfter:
    """Wraps a transport and raises ``KeyboardInterrupt`` on call ``limit + 1``."""

    def __init__(self, inner, limit: int):
        self.inner = inner
        self.limit = limit
        self.calls = 0

    def send(self, req):
        if self.calls >= self.limit:
            raise KeyboardInterrupt("simulated crash")
        self.calls += 1
        return self.inner.send(req)


def mock_provider(name: str = "mock", **mock) -> ProviderConfig:
    return ProviderConfig(
        name=name, kind="mock", model_name=f"{name}-model", supports_audio=True,
        max_concurrent=4, requests_per_minute=10**6, mock=mock,
    )


ACCEPTANCE: dict[int, str] = {}


class criterion:
    """Context manager recording one PASS/FAIL line per acceptance criterion."""

    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        verdict = "PASS" if exc_type is None else "FAIL"
        line = f"criterion {self.number} {verdict}: {self.title}"
        if self.detail:
            line += f" ({self.detail})"
        if exc_type is not None:
            line += f" -- {exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        ACCEPTANCE[self.number] = line
        print(line)
        return False
