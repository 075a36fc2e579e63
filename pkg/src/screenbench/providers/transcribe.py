"""Pluggable speech-to-text adapters. Recognition itself happens elsewhere."""

from __future__ import annotations

import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from ..corpus import read_transcript
from .client import file_sha256


class TranscriptionError(RuntimeError):
    pass


class AdapterUnavailable(TranscriptionError):
    pass


class TranscriptionFailed(TranscriptionError):
    pass


@dataclass(frozen=True)
class TranscriptionAdapter:
    """``kind`` is external_command, http_endpoint or precomputed_file.

    external_command: ``command`` argv with ``{audio}`` substituted; stdout is the transcript.
    http_endpoint: the WAV bytes are POSTed to ``url``; the response body is the transcript.
    precomputed_file: ``transcript_dir / name_template.format(stem=..., id=...)``.
    """

    kind: str
    command: tuple[str, ...] = ()
    url: str = ""
    transcript_dir: Path | None = None
    name_template: str = "{stem}.txt"
    timeout_s: float = 600.0


class Transcriber:
    def __init__(self, adapter: TranscriptionAdapter, cache_dir: str | Path | None = None):
        if adapter.kind not in ("external_command", "http_endpoint", "precomputed_file"):
            raise AdapterUnavailable(f"unknown adapter kind {adapter.kind!r}")
        self.adapter = adapter
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self._memory: dict[str, str] = {}
        self._lock = threading.Lock()

    def transcribe(self, audio_path: str | Path) -> str:
        audio_path = Path(audio_path)
        if not audio_path.exists():
            raise TranscriptionFailed(f"audio file missing: {audio_path}")
        digest = file_sha256(audio_path)
        cached = self._cached(digest)
        if cached is not None:
            return cached
        text = self._run(audio_path)
        with self._lock:
            self._memory[digest] = text
            if self.cache_dir is not None:
                self.cache_dir.mkdir(parents=True, exist_ok=True)
                (self.cache_dir / f"{digest}.txt").write_bytes(text.encode("utf-8"))
        return text

    def _cached(self, digest: str) -> str | None:
        with self._lock:
            if digest in self._memory:
                return self._memory[digest]
        if self.cache_dir is not None:
            p = self.cache_dir / f"{digest}.txt"
            if p.exists():
                return p.read_bytes().decode("utf-8")
        return None

    def _run(self, audio_path: Path) -> str:
        a = self.adapter
        if a.kind == "precomputed_file":
            if a.transcript_dir is None:
                raise AdapterUnavailable("precomputed_file adapter needs transcript_dir")
            stem = audio_path.stem
            pid = stem.split("_")[0]
            path = Path(a.transcript_dir) / a.name_template.format(stem=stem, id=pid)
            if not path.exists():
                raise TranscriptionFailed(f"no precomputed transcript at {path}")
            return read_transcript(path)
        if a.kind == "external_command":
            if not a.command:
                raise AdapterUnavailable("external_command adapter needs a command")
            argv = [part.replace("{audio}", str(audio_path)) for part in a.command]
            try:
                done = subprocess.run(argv, capture_output=True, timeout=a.timeout_s)
            except FileNotFoundError as exc:
                raise AdapterUnavailable(str(exc)) from exc
            except subprocess.TimeoutExpired as exc:
                raise TranscriptionFailed(f"command timed out after {a.timeout_s}s") from exc
            if done.returncode != 0:
                raise TranscriptionFailed(done.stderr.decode("utf-8", "replace").strip() or f"exit {done.returncode}")
            return done.stdout.decode("utf-8")
        try:
            r = httpx.post(a.url, content=audio_path.read_bytes(),
                           headers={"Content-Type": "audio/wav"}, timeout=a.timeout_s)
        except httpx.ConnectError as exc:
            raise AdapterUnavailable(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise TranscriptionFailed(str(exc)) from exc
        if r.status_code != 200:
            raise TranscriptionFailed(f"HTTP {r.status_code}: {r.text[:200]}")
        return r.text


def transcribe(audio_path: str | Path, adapter: TranscriptionAdapter, cache_dir: str | Path | None = None) -> str:
    return Transcriber(adapter, cache_dir).transcribe(audio_path)
