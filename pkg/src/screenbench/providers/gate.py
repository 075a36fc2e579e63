"""Per-provider admission control: a concurrency cap plus a sliding-window rate limit."""

from __future__ import annotations

import threading
import time
from collections import deque
from typing import Callable


class AdmissionGate:
    """Blocks until a request may be dispatched.

    At most ``requests_per_minute`` dispatches fall in any ``window`` seconds
    and at most ``max_concurrent`` are in flight. ``clock`` and ``sleep`` are
    injectable so tests can run on simulated time.
    """

    def __init__(
        self,
        max_concurrent: int,
        requests_per_minute: int,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
        window: float = 60.0,
    ):
        self.limit = requests_per_minute
        self.window = window
        self.clock = clock
        self.sleep = sleep
        self._slots = threading.BoundedSemaphore(max_concurrent)
        self._lock = threading.Lock()
        self._recent: deque[float] = deque()
        self.dispatch_times: list[float] = []

    def acquire(self) -> float:
        self._slots.acquire()
        with self._lock:
            while True:
                now = self.clock()
                while self._recent and self._recent[0] <= now - self.window:
                    self._recent.popleft()
                if len(self._recent) < self.limit:
                    self._recent.append(now)
                    self.dispatch_times.append(now)
                    return now
                self.sleep(self._recent[0] + self.window - now)

    def release(self) -> None:
        self._slots.release()

    def __enter__(self):
        self.acquire()
        return self

    def __exit__(self, *exc):
        self.release()
