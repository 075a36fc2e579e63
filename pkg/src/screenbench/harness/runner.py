"""Execute a plan: render, infer, parse and append one record per request."""

from __future__ import annotations

import csv
import datetime as dt
import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Mapping

from .. import __version__
from ..corpus import DatasetManifest, ParticipantRecord, read_transcript
from ..parsers import ParseOutcome
from ..prompts import (
    FewShotExample,
    PromptError,
    load_template,
    render_few_shot,
    render_zero_shot,
    select_few_shot_binary,
    select_few_shot_near_miss,
)
from ..providers import (
    AdmissionGate,
    InferenceClient,
    InferenceRequest,
    ProviderError,
    ResponseCache,
)
from ..providers.client import Transport
from ..tasks import get_task
from .config import ExperimentConfig
from .plan import Plan, PlannedRequest, plan as make_plan

log = logging.getLogger(__name__)

RUN_MANIFEST = "run.manifest"
RECORDS = "records.jsonl"
PREDICTIONS = "predictions.csv"
EXCLUSIONS = "exclusions.csv"

PREDICTION_COLUMNS = (
    "participant_id", "task", "variant", "modality", "provider", "shot_mode",
    "truth", "truth_score", "pred", "parse_status", "reason", "error",
)


class RunError(RuntimeError):
    pass


class RunExists(RunError):
    pass


class HashMismatch(RunError):
    pass


@dataclass
class RunRecord:
    request: PlannedRequest
    idempotency_key: str
    raw_text: str | None
    parse: ParseOutcome | None
    truth: object
    truth_score: int | None
    pred: object
    latency_ms: float = 0.0
    from_cache: bool = False
    retries: int = 0
    attempts: int = 1
    error: dict | None = None
    example_ids: tuple[int, ...] = ()
    transcript_source: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_json(self) -> str:
        d = asdict(self)
        d["request"] = self.request.to_dict()
        d["parse"] = self.parse.to_dict() if self.parse else None
        d["example_ids"] = list(self.example_ids)
        return json.dumps(d, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        d = json.loads(line)
        d["request"] = PlannedRequest(**d["request"])
        d["parse"] = ParseOutcome.from_dict(d["parse"]) if d["parse"] else None
        d["example_ids"] = tuple(d["example_ids"])
        return cls(**d)

    def prediction_row(self) -> dict:
        r = self.request
        status = "error" if self.error else self.parse.status
        reason = self.error["type"] if self.error else (self.parse.reason or "")
        return {
            "participant_id": r.participant_id, "task": r.task, "variant": r.variant,
            "modality": r.modality, "provider": r.provider, "shot_mode": r.shot_mode,
            "truth": self.truth, "truth_score": "" if self.truth_score is None else self.truth_score,
            "pred": "" if self.pred is None else self.pred,
            "parse_status": status, "reason": reason,
            "error": self.error["detail"] if self.error else "",
        }


@dataclass
class RunResult:
    run_dir: Path
    status: str
    records: list[RunRecord]
    exclusions: list[tuple[PlannedRequest, str]] = field(default_factory=list)
    new_calls: int = 0

    @property
    def errors(self) -> list[RunRecord]:
        return [r for r in self.records if not r.ok]


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


def template_hashes(config: ExperimentConfig) -> dict[str, str]:
    return {
        f"{task}:{v}": load_template(task, v, config.template_dir).sha256
        for task in config.tasks
        for v in config.variants_for(task)
    }


def read_records(run_dir: str | Path) -> list[RunRecord]:
    """Records in file order; a torn final line (crash mid-write) is skipped."""
    path = Path(run_dir) / RECORDS
    if not path.exists():
        return []
    out = []
    lines = path.read_text(encoding="utf-8").splitlines()
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            out.append(RunRecord.from_json(line))
        except (json.JSONDecodeError, KeyError, TypeError):
            if i == len(lines) - 1:
                log.warning("skipping truncated last record in %s", path)
                continue
            raise
    return out


def latest_records(records: list[RunRecord]) -> dict[PlannedRequest, RunRecord]:
    latest: dict[PlannedRequest, RunRecord] = {}
    for rec in records:
        latest[rec.request] = rec
    return latest


def read_predictions(path: str | Path) -> list[dict]:
    p = Path(path)
    if p.is_dir():
        p = p / PREDICTIONS
    with open(p, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_predictions(run_dir: Path, records: Mapping[PlannedRequest, RunRecord]) -> Path:
    path = run_dir / PREDICTIONS
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=PREDICTION_COLUMNS, lineterminator="\n")
        w.writeheader()
        for req in sorted(records):
            w.writerow(records[req].prediction_row())
    os.replace(tmp, path)
    return path


def _write_json(path: Path, payload: dict) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def read_run_manifest(run_dir: str | Path) -> dict:
    return json.loads((Path(run_dir) / RUN_MANIFEST).read_text(encoding="utf-8"))


class _Executor:
    def __init__(self, config, the_plan, transports, clock, sleep):
        self.config = config
        self.plan = the_plan
        self.manifest: DatasetManifest = the_plan.manifest
        self.providers = {p.name: p for p in config.providers}
        cache = ResponseCache(config.resolved_cache_dir)
        self.clients = {}
        for name, p in self.providers.items():
            gate = AdmissionGate(p.max_concurrent, p.requests_per_minute, clock, sleep)
            self.clients[name] = InferenceClient(
                p, cache=cache, transport=(transports or {}).get(name), gate=gate, clock=clock, sleep=sleep
            )
        self._transcripts: dict[int, str] = {}
        self._examples: dict[tuple, list[FewShotExample]] = {}
        self._lock = threading.Lock()

    def transcript(self, r: ParticipantRecord) -> str | None:
        if not r.has_transcript:
            return None
        with self._lock:
            if r.participant_id not in self._transcripts:
                self._transcripts[r.participant_id] = read_transcript(r.transcript_path)
            return self._transcripts[r.participant_id]

    def examples(self, req: PlannedRequest) -> list[FewShotExample]:
        task = get_task(req.task)
        fs = self.config.few_shot
        key = (req.task,) if task.kind == "binary" else req.cell
        with self._lock:
            if key not in self._examples:
                if task.kind == "binary":
                    ex = select_few_shot_binary(
                        self.manifest, req.task, pool=fs.get("pool", "all"),
                        seed=self.config.seed, order=fs.get("order", "negative_first"),
                    )
                else:
                    rows = [
                        row for row in read_predictions(fs["zero_shot_run"])
                        if row["task"] == req.task and row["variant"] == req.variant
                        and row["modality"] == req.modality and row["provider"] == req.provider
                        and row["shot_mode"] == "zero_shot" and row["parse_status"] != "error"
                    ]
                    ex = select_few_shot_near_miss(
                        rows, req.task, int(fs.get("k", 3)), self.config.seed, self.manifest,
                        exclude_split=fs.get("exclude_split", "test"),
                    )
                self._examples[key] = ex
            return self._examples[key]

    def run_one(self, req: PlannedRequest) -> RunRecord:
        task = get_task(req.task)
        r = self.manifest.get(req.participant_id)
        truth = task.truth(r)
        base = dict(request=req, truth=truth, truth_score=task.truth_score(r))
        transcript = self.transcript(r) if req.modality in ("text", "audio_text") else None
        source = str(r.transcript_path) if transcript is not None else None
        try:
            t = load_template(req.task, req.variant, self.config.template_dir)
            if req.shot_mode == "few_shot":
                prompt = render_few_shot(
                    t, r, req.modality, self.examples(req),
                    allow_subject=bool(self.config.few_shot.get("allow_subject", True)),
                    transcript=transcript,
                )
            else:
                prompt = render_zero_shot(t, r, req.modality, transcript=transcript)
        except PromptError as exc:
            return RunRecord(**base, idempotency_key="", raw_text=None, parse=None, pred=None,
                             error={"type": type(exc).__name__, "detail": str(exc)}, transcript_source=source)
        client = self.clients[req.provider]
        provider = self.providers[req.provider]
        attempts, latency, retries, from_cache = 0, 0.0, 0, False
        salt = ""
        while True:
            attempts += 1
            ireq = InferenceRequest(prompt=prompt, provider=provider, truth=truth, salt=salt)
            try:
                resp = client.infer(ireq)
            except ProviderError as exc:
                return RunRecord(**base, idempotency_key=ireq.idempotency_key, raw_text=None, parse=None,
                                 pred=None, attempts=attempts,
                                 error={"type": type(exc).__name__, "detail": str(exc)},
                                 example_ids=prompt.example_ids, transcript_source=source)
            latency += resp.latency_ms
            retries += resp.retries_used
            from_cache = resp.from_cache
            outcome = task.parse(resp.raw_text)
            if outcome.valid or attempts > self.config.reprompt_invalid:
                break
            salt = f"reprompt-{attempts}"
        pred = task.encode(outcome.label) if outcome.valid else None
        return RunRecord(**base, idempotency_key=ireq.idempotency_key, raw_text=resp.raw_text, parse=outcome,
                         pred=pred, latency_ms=latency, from_cache=from_cache, retries=retries,
                         attempts=attempts, example_ids=prompt.example_ids, transcript_source=source)


def execute(
    config: ExperimentConfig,
    the_plan: Plan | None = None,
    *,
    resume: bool = False,
    transports: Mapping[str, Transport] | None = None,
    clock: Callable[[], float] = time.monotonic,
    sleep: Callable[[float], None] = time.sleep,
    max_workers: int | None = None,
) -> RunResult:
    """Run every planned request not already answered in ``config.output_dir``.

    Records are appended by a single writer as requests finish, so a crash
    loses at most the in-flight requests; ``resume=True`` skips any request
    with a successful record. Provider errors are recorded and the run ends
    ``partial``; anything else propagates.
    """
    the_plan = the_plan or make_plan(config)
    run_dir = Path(config.output_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = run_dir / RUN_MANIFEST
    snapshot = config.snapshot()
    hashes = template_hashes(config)

    if manifest_path.exists():
        if not resume:
            raise RunExists(f"{run_dir} already holds a run; pass resume=True to continue it")
        previous = read_run_manifest(run_dir)
        if previous["config"] != snapshot:
            raise HashMismatch("configuration differs from the run being resumed")
        if previous["template_hashes"] != hashes:
            raise HashMismatch("prompt templates changed since the run started")
        started = previous["started_at"]
    else:
        started = _now()

    meta = {
        "config": snapshot,
        "template_hashes": hashes,
        "code_version": __version__,
        "started_at": started,
        "finished_at": None,
        "status": "running",
        "planned": len(the_plan),
        "exclusions": len(the_plan.exclusions),
    }
    ex = _Executor(config, the_plan, transports, clock, sleep)
    _write_json(manifest_path, meta)
    with open(run_dir / EXCLUSIONS, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["participant_id", "task", "variant", "modality", "provider", "shot_mode", "reason"])
        for req, reason in the_plan.exclusions:
            w.writerow([req.participant_id, req.task, req.variant, req.modality, req.provider, req.shot_mode, reason])

    done = {req for req, rec in latest_records(read_records(run_dir)).items() if rec.ok}
    todo = [req for req in the_plan.requests if req not in done]
    workers = max_workers or max(1, sum(p.max_concurrent for p in config.providers))
    new_calls = 0

    with open(run_dir / RECORDS, "a", encoding="utf-8") as out:
        pool = ThreadPoolExecutor(max_workers=workers)
        try:
            futures = [pool.submit(ex.run_one, req) for req in todo]
            for fut in as_completed(futures):
                rec = fut.result()
                out.write(rec.to_json() + "\n")
                out.flush()
                new_calls += 1
        except BaseException:
            pool.shutdown(wait=True, cancel_futures=True)
            raise
        pool.shutdown(wait=True)

    planned = set(the_plan.requests)
    latest = {k: v for k, v in latest_records(read_records(run_dir)).items() if k in planned}
    missing = planned - set(latest)
    failed = [r for r in latest.values() if not r.ok]
    status = "complete" if not missing and not failed else "partial"
    write_predictions(run_dir, latest)
    meta.update(status=status, finished_at=_now(), records=len(latest), errors=len(failed))
    _write_json(manifest_path, meta)
    return RunResult(run_dir, status, [latest[k] for k in sorted(latest)], the_plan.exclusions, new_calls)
