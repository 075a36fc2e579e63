"""Render score sets as per-task tables (markdown, CSV, JSON)."""

from __future__ import annotations

import csv
import io
import json
import logging
from collections import defaultdict
from pathlib import Path
from typing import Iterable

from ..prompts import MODALITIES
from .scoring import CELL_FIELDS, ScoreKey, ScoreSet

log = logging.getLogger(__name__)

FORMAT_ALIASES = {
    "md": "md", "markdown": "md", "markdown_table": "md",
    "csv": "csv",
    "json": "json", "structured": "json",
}
MODALITY_TITLES = {"text": "Text", "audio": "Audio", "audio_text": "Audio + Text"}


def _pct(v: float | None) -> str:
    return "n/a" if v is None else f"{v * 100:.1f}"


def _num(v: float | None) -> str:
    return "n/a" if v is None else f"{v:.2f}"


def _signed(v: float, digits: int) -> str:
    return f"{v:+.{digits}f}"


def _table_groups(scores: ScoreSet) -> dict[tuple[str, str, str], list[ScoreKey]]:
    groups: dict[tuple[str, str, str], list[ScoreKey]] = defaultdict(list)
    for key in scores.keys():
        groups[(key.task, key.view, key.shot_mode)].append(key)
    return dict(sorted(groups.items()))


def best_rows(scores: ScoreSet, keys: Iterable[ScoreKey], mode: str | None = None) -> dict[str, ScoreKey]:
    """Winner per variant: highest BA, then highest F1, then provider name."""
    by_variant: dict[str, list[ScoreKey]] = defaultdict(list)
    for k in keys:
        by_variant[k.variant].append(k)
    out = {}
    for variant, ks in by_variant.items():
        def rank(k):
            rep = scores.get(k, mode)
            ba = rep.balanced_accuracy if rep.balanced_accuracy is not None else float("-inf")
            f1 = rep.f1 if rep.f1 is not None else float("-inf")
            mod = MODALITIES.index(k.modality) if k.modality in MODALITIES else len(MODALITIES)
            return (-ba, -f1, k.provider, mod, k.modality)
        out[variant] = min(ks, key=rank)
    return out


def _delta(scores: ScoreSet, reference: ScoreSet | None, key: ScoreKey, mode: str | None):
    if reference is None or key.shot_mode == "zero_shot":
        return None
    ref_key = key.with_shot("zero_shot")
    if ref_key not in reference.reports:
        return None
    return reference.get(ref_key, mode or scores.primary_mode)


def table_rows(scores: ScoreSet, reference: ScoreSet | None = None, mode: str | None = None) -> list[dict]:
    """Long-format rows, one per scored cell, with deltas against ``reference`` when given."""
    rows = []
    for (task, view, shot), keys in _table_groups(scores).items():
        winners = set(best_rows(scores, keys, mode).values())
        for k in keys:
            rep = scores.get(k, mode)
            ref = _delta(scores, reference, k, mode)
            row = {
                **{f: getattr(k, f) for f in CELL_FIELDS}, "view": k.view,
                "scoring_mode": mode or scores.primary_mode,
                "balanced_accuracy": rep.balanced_accuracy, "f1": rep.f1, "mae": rep.mae,
                "invalid_rate": rep.invalid_rate, "n": rep.n, "best": k in winners,
                "delta_balanced_accuracy": None, "delta_f1": None, "delta_mae": None,
            }
            if ref is not None:
                for name in ("balanced_accuracy", "f1", "mae"):
                    a, b = getattr(rep, name), getattr(ref, name)
                    row[f"delta_{name}"] = None if a is None or b is None else a - b
            rows.append(row)
    return rows


def markdown(scores: ScoreSet, reference: ScoreSet | None = None, mode: str | None = None) -> str:
    rows = table_rows(scores, reference, mode)
    index = {(r["task"], r["view"], r["shot_mode"], r["variant"], r["modality"], r["provider"]): r for r in rows}
    out = []
    for (task, view, shot), keys in _table_groups(scores).items():
        variants = sorted({k.variant for k in keys})
        severity = any(scores.get(k, mode).mae is not None for k in keys)
        title = task + (f" [{view}]" if view else "") + f" ({shot.replace('_', '-')})"
        out.append(f"## {title}\n")
        header = ["Modality", "Model"]
        for v in variants:
            header += [f"{v} BA", f"{v} F1"] + ([f"{v} MAE"] if severity else [])
        out.append("| " + " | ".join(header) + " |")
        out.append("|" + "|".join(["---"] * len(header)) + "|")
        modalities = sorted({k.modality for k in keys},
                            key=lambda m: MODALITIES.index(m) if m in MODALITIES else len(MODALITIES))
        for m in modalities:
            for provider in sorted({k.provider for k in keys if k.modality == m}):
                cells = [MODALITY_TITLES.get(m, m), provider]
                for v in variants:
                    r = index.get((task, view, shot, v, m, provider))
                    if r is None:
                        cells += ["-", "-"] + (["-"] if severity else [])
                        continue
                    vals = [
                        (_pct(r["balanced_accuracy"]), r["delta_balanced_accuracy"], 1, 100.0),
                        (_num(r["f1"]), r["delta_f1"], 2, 1.0),
                    ]
                    if severity:
                        vals.append((_num(r["mae"]), r["delta_mae"], 2, 1.0))
                    for text, delta, digits, scale in vals:
                        if delta is not None:
                            text = f"{text} ({_signed(delta * scale, digits)})"
                        if r["best"]:
                            text = f"**{text}**"
                        cells.append(text)
                out.append("| " + " | ".join(cells) + " |")
        out.append("")
    return "\n".join(out)


def csv_text(scores: ScoreSet, reference: ScoreSet | None = None, mode: str | None = None) -> str:
    rows = table_rows(scores, reference, mode)
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: "" if v is None else v for k, v in r.items()})
    return buf.getvalue()


def report(
    scores: ScoreSet,
    formats: Iterable[str],
    out_dir: str | Path,
    reference: ScoreSet | None = None,
    mode: str | None = None,
) -> list[Path]:
    """Write the requested formats to ``out_dir``; an empty format list writes nothing."""
    wanted = []
    for f in formats:
        f = f.strip().lower()
        if not f:
            continue
        if f not in FORMAT_ALIASES:
            raise ValueError(f"unknown report format {f!r}; choose from {sorted(FORMAT_ALIASES)}")
        if FORMAT_ALIASES[f] not in wanted:
            wanted.append(FORMAT_ALIASES[f])
    if not wanted:
        log.warning("no report formats requested; nothing written")
        return []
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for f in wanted:
        if f == "md":
            p = out_dir / "report.md"
            p.write_text(markdown(scores, reference, mode), encoding="utf-8")
        elif f == "csv":
            p = out_dir / "report.csv"
            p.write_text(csv_text(scores, reference, mode), encoding="utf-8")
        else:
            p = out_dir / "report.json"
            payload = {"scoring_mode": mode or scores.primary_mode, "rows": table_rows(scores, reference, mode)}
            p.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(p)
    return written
