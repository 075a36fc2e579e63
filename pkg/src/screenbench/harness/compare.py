"""Modality comparison over finished runs."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping

from ..modality import (
    CorrectnessVector,
    drs,
    emit_co_occurrence,
    format_score,
    mss,
    mss_combined_vs_agreement,
    partition,
    resolve,
)
from .runner import read_predictions
from .scoring import CELL_FIELDS


class SelectionError(ValueError):
    pass


def select_cell(rows: Iterable[Mapping[str, str]], **selector: str | None) -> list[Mapping[str, str]]:
    """Rows of exactly one (task, variant, modality, provider, shot_mode) cell.

    ``selector`` narrows by any of those fields; it must leave a single cell.
    """
    wanted = {k: v for k, v in selector.items() if v}
    unknown = set(wanted) - set(CELL_FIELDS)
    if unknown:
        raise SelectionError(f"unknown selector fields {sorted(unknown)}")
    picked = [r for r in rows if all(r.get(k) == v for k, v in wanted.items())]
    cells = {tuple(r.get(f, "") for f in CELL_FIELDS) for r in picked}
    if not cells:
        raise SelectionError(f"no predictions match {wanted}")
    if len(cells) > 1:
        raise SelectionError(f"{len(cells)} cells match {wanted}; narrow the selection: {sorted(cells)}")
    return picked


def correctness(rows: Iterable[Mapping[str, str]]) -> CorrectnessVector:
    """Per-participant correctness; invalid parses and failed requests count as incorrect."""
    rows = list(rows)
    cell = tuple(rows[0].get(f, "") for f in CELL_FIELDS) if rows else ()
    truths = {int(r["participant_id"]): r["truth"] for r in rows}
    preds = {int(r["participant_id"]): (r["pred"] if r.get("pred", "") != "" else None) for r in rows}
    return CorrectnessVector.from_predictions(cell, truths, preds)


def compare(
    a: CorrectnessVector, b: CorrectnessVector, combined: CorrectnessVector | None = None,
    labels: tuple[str, ...] = ("a", "b", "combined"),
) -> dict:
    p = partition(a, b)
    out = {
        "labels": list(labels[: 3 if combined is not None else 2]),
        "partition": {
            "a_only_correct": p.a_only_correct, "b_only_correct": p.b_only_correct,
            "both_correct": p.both_correct, "both_incorrect": p.both_incorrect,
        },
        "mss_a_vs_b": format_score(mss(p)),
    }
    if combined is not None:
        c = resolve(a, b, combined)
        out["resolution"] = {
            "resolved_correctly": c.resolved_correctly, "resolved_incorrectly": c.resolved_incorrectly,
            "flipped_agreement_right": c.flipped_agreement_right,
            "flipped_agreement_wrong": c.flipped_agreement_wrong,
            "confirmed_agreement": c.confirmed_agreement,
        }
        out["drs"] = format_score(drs(c))
        out["mss_combined_vs_agreement"] = format_score(mss_combined_vs_agreement(c))
        out["mss_combined_vs_a"] = format_score(mss(partition(combined, a)))
        out["mss_combined_vs_b"] = format_score(mss(partition(combined, b)))
    return out


def compare_runs(
    run_a: str | Path,
    run_b: str | Path,
    run_combined: str | Path | None = None,
    out_dir: str | Path | None = None,
    modalities: tuple[str | None, ...] = (),
    **selector: str | None,
) -> dict:
    """Load one cell from each run, compare, optionally write JSON and CSV.

    ``selector`` applies to every run; ``modalities`` picks the modality per
    run (a, b, combined) when a single run directory holds several.
    """
    vecs, labels = [], []
    runs = [run_a, run_b] + ([run_combined] if run_combined else [])
    for i, run in enumerate(runs):
        sel = dict(selector)
        if i < len(modalities) and modalities[i]:
            sel["modality"] = modalities[i]
        rows = select_cell(read_predictions(run), **sel)
        vecs.append(correctness(rows))
        labels.append(rows[0].get("modality") or Path(run).name)
    if len(set(labels)) < len(labels):
        labels = [f"{lab}_{i}" for i, lab in enumerate(labels)]
    combined = vecs[2] if len(vecs) == 3 else None
    result = compare(vecs[0], vecs[1], combined, labels=tuple(labels))
    co = emit_co_occurrence(vecs[0], vecs[1], combined, labels=tuple(labels))
    result["co_occurrence_csv"] = co.to_csv()
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "co_occurrence.csv").write_text(co.to_csv(), encoding="utf-8")
        summary = {k: v for k, v in result.items() if k != "co_occurrence_csv"}
        (out_dir / "modality_scores.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                                      encoding="utf-8")
    return result
