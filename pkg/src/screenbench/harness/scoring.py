"""Recompute metrics from a run's predictions.csv."""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..corpus import MULTICLASS_LABELS, get_scale, map_severity, multiclass_to_bits
from ..metrics import COUNT_AS_WRONG, EXCLUDE, SCORING_MODES, MetricReport, build_report, multilabel_scores
from ..tasks import get_task
from .runner import read_predictions, read_run_manifest

CELL_FIELDS = ("task", "variant", "modality", "provider", "shot_mode")


class NoRecords(ValueError):
    pass


@dataclass(frozen=True, order=True)
class ScoreKey:
    task: str
    variant: str
    modality: str
    provider: str
    shot_mode: str
    view: str = ""  # severity scale name, or "derived" binary task name for multiclass

    @property
    def slug(self) -> str:
        parts = [self.task, self.variant, self.modality, self.provider, self.shot_mode]
        if self.view:
            parts.append(self.view)
        return "__".join(parts)

    def with_shot(self, shot_mode: str) -> "ScoreKey":
        return ScoreKey(self.task, self.variant, self.modality, self.provider, shot_mode, self.view)


@dataclass
class ScoreSet:
    reports: dict[ScoreKey, dict[str, MetricReport]] = field(default_factory=dict)
    primary_mode: str = COUNT_AS_WRONG

    def get(self, key: ScoreKey, mode: str | None = None) -> MetricReport:
        return self.reports[key][mode or self.primary_mode]

    def keys(self) -> list[ScoreKey]:
        return sorted(self.reports)

    def summary_rows(self) -> list[dict]:
        rows = []
        for key in self.keys():
            for mode in SCORING_MODES:
                rep = self.reports[key][mode]
                rows.append({
                    **{f: getattr(key, f) for f in CELL_FIELDS}, "view": key.view, "scoring_mode": mode,
                    "balanced_accuracy": rep.balanced_accuracy, "f1": rep.f1, "mae": rep.mae,
                    "invalid_rate": rep.invalid_rate, "n": rep.n,
                })
        return rows

    def summary_csv(self) -> str:
        buf = io.StringIO()
        cols = [*CELL_FIELDS, "view", "scoring_mode", "balanced_accuracy", "f1", "mae", "invalid_rate", "n"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in self.summary_rows():
            w.writerow({k: "" if v is None else v for k, v in row.items()})
        return buf.getvalue()


def _pred(task_kind: str, raw: str):
    if raw == "":
        return None
    return raw if task_kind == "multiclass" else int(raw)


def _multiclass_bundle(truths: Sequence[str], preds: Sequence[str | None], mode: str) -> dict:
    tb, pb = [], []
    for y, p in zip(truths, preds):
        bits = multiclass_to_bits(y)
        if p is None:
            if mode == EXCLUDE:
                continue
            p_bits = (1 - bits[0], 1 - bits[1])  # invalid earns no credit on either disorder
        else:
            p_bits = multiclass_to_bits(p)
        tb.append(bits)
        pb.append(p_bits)
    return multilabel_scores(tb, pb) if tb else {}


def score_rows(
    rows: Iterable[Mapping[str, str]],
    severity_scales: Mapping[str, Sequence[str]] | None = None,
    primary_mode: str = COUNT_AS_WRONG,
) -> ScoreSet:
    """Group prediction rows by cell and score each under both invalid-handling modes.

    Rows whose request failed at the transport level (``parse_status ==
    "error"``) carry no model output and are left out; their count goes in
    ``extras["errors"]``.
    """
    groups: dict[tuple, list[Mapping[str, str]]] = defaultdict(list)
    for row in rows:
        groups[tuple(row.get(f) or "" for f in CELL_FIELDS)].append(row)
    if not groups:
        raise NoRecords("no prediction rows to score")
    scales = dict(severity_scales or {})
    out = ScoreSet(primary_mode=primary_mode)

    for cell, members in sorted(groups.items()):
        members = sorted(members, key=lambda r: int(r["participant_id"]))
        task = get_task(cell[0])
        usable = [r for r in members if r.get("parse_status") != "error"]
        errors = len(members) - len(usable)
        if not usable:
            continue
        preds = [_pred(task.kind, r["pred"]) for r in usable]

        def add(view: str, kind: str, truths, preds_, classes, extras=None, positive=1):
            per_mode = {}
            for mode in SCORING_MODES:
                rep = build_report(kind, truths, preds_, classes, mode, positive_class=positive)
                rep.extras = {"errors": errors, **(extras(mode) if extras else {})}
                per_mode[mode] = rep
            out.reports[ScoreKey(*cell, view)] = per_mode

        if task.kind == "binary":
            add("", "binary", [int(r["truth"]) for r in usable], preds, [0, 1])
        elif task.kind == "severity":
            for name in scales.get(task.name) or [task.default_scale]:
                scale = get_scale(name)
                truths = [
                    map_severity(int(r["truth_score"]), scale) if r.get("truth_score", "") != "" else int(r["truth"])
                    for r in usable
                ]
                view = "" if name == task.default_scale and len(scales.get(task.name) or []) <= 1 else name
                add(view, "severity", truths, preds, scale.labels, lambda mode, n=name: {"scale": n})
        else:
            truths = [r["truth"] for r in usable]
            add("", "multiclass", truths, preds, list(MULTICLASS_LABELS),
                lambda mode: {"multilabel": _multiclass_bundle(truths, preds, mode)})
            for bit, derived in ((0, "dep_binary"), (1, "ptsd_binary")):
                tb = [multiclass_to_bits(y)[bit] for y in truths]
                pbits = [None if p is None else multiclass_to_bits(p)[bit] for p in preds]
                add(f"derived_{derived}", "binary", tb, pbits, [0, 1])
    return out


def write_metrics(scores: ScoreSet, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for key in scores.keys():
        payload = {
            "cell": {**{f: getattr(key, f) for f in CELL_FIELDS}, "view": key.view},
            "primary_mode": scores.primary_mode,
            "reports": {mode: rep.to_dict() for mode, rep in scores.reports[key].items()},
        }
        p = out_dir / f"{key.slug}.json"
        p.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(p)
    summary = out_dir / "summary.csv"
    summary.write_text(scores.summary_csv(), encoding="utf-8")
    written.append(summary)
    return written


def load_metrics(metrics_dir: str | Path) -> ScoreSet:
    metrics_dir = Path(metrics_dir)
    out = ScoreSet()
    for p in sorted(metrics_dir.glob("*.json")):
        d = json.loads(p.read_text(encoding="utf-8"))
        key = ScoreKey(**d["cell"])
        out.primary_mode = d["primary_mode"]
        out.reports[key] = {m: MetricReport(**r) for m, r in d["reports"].items()}
    return out


def score(run_dir: str | Path, severity_scales: Mapping[str, Sequence[str]] | None = None,
          primary_mode: str | None = None) -> ScoreSet:
    """Score a finished run from its predictions.csv and write ``metrics/``."""
    run_dir = Path(run_dir)
    cfg = read_run_manifest(run_dir)["config"]
    scores = score_rows(
        read_predictions(run_dir),
        severity_scales if severity_scales is not None else cfg.get("severity_scales"),
        primary_mode or cfg.get("scoring_mode", COUNT_AS_WRONG),
    )
    write_metrics(scores, run_dir / "metrics")
    return scores


__all__ = [
    "NoRecords", "ScoreKey", "ScoreSet", "load_metrics", "score", "score_rows", "write_metrics",
]
