"""Command line entry point: ``screenbench <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .corpus import (
    apply_label_corrections,
    generate_synthetic_fixture,
    load_manifest,
    summarize_distribution,
    write_manifest,
)
from .harness import compare_runs, execute, load_config, load_metrics, plan, report, score, score_rows
from .harness.runner import read_predictions, read_run_manifest
from .metrics import SCORING_MODES
from .parsers import parse_severity
from .prompts import load_template, render_few_shot, render_zero_shot, select_few_shot_binary
from .tasks import TASKS, get_task

EXIT_PARTIAL = 3


def _cmd_ingest(args) -> int:
    m = load_manifest(args.manifest, args.layout, data_root=args.data_root)
    fixed = apply_label_corrections(m)
    for c in fixed.correction_log:
        print(f"corrected {c.participant_id} {c.field}: {c.old} -> {c.new}", file=sys.stderr)
    dist = summarize_distribution(fixed, args.ptsd_scale)
    if args.summary:
        Path(args.summary).write_text(dist.to_csv(), encoding="utf-8")
    else:
        sys.stdout.write(dist.to_csv())
    if args.write_corrected:
        write_manifest(fixed, args.write_corrected)
    return 0


def _cmd_synth(args) -> int:
    m = generate_synthetic_fixture(args.seed, args.profile, Path(args.out), n=args.n,
                                   inject_known_errors=args.inject_known_errors)
    print(f"wrote {len(m)} records to {Path(args.out) / 'manifest.csv'}")
    return 0


def _cmd_render(args) -> int:
    m = apply_label_corrections(load_manifest(args.manifest, args.layout))
    t = load_template(args.task, args.variant)
    ids = args.participant or [r.participant_id for r in m.records]
    examples = []
    if args.few_shot:
        examples = select_few_shot_binary(m, args.task, seed=args.seed)
    chunks = []
    for pid in ids:
        r = m.get(pid)
        if examples:
            p = render_few_shot(t, r, args.modality, examples, allow_subject=True)
        else:
            p = render_zero_shot(t, r, args.modality)
        lines = [f"### participant {pid} ({p.identity.content_hash[:12]})", p.text]
        lines += [f"[attachment] {a}" for a in p.attachments]
        chunks.append("\n".join(lines) + "\n")
    text = "\n".join(chunks)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_parse(args) -> int:
    task = get_task(args.task)
    parse = task.parse
    if args.range:
        if task.kind != "severity":
            raise ValueError("--range only applies to severity tasks")
        lo, hi = (int(x) for x in args.range.split(","))
        parse = lambda raw: parse_severity(raw, (lo, hi))  # noqa: E731
    if args.text is not None:
        lines = [args.text]
    elif args.input:
        with open(args.input, encoding="utf-8") as fh:
            lines = [line.rstrip("\n") for line in fh]
    else:
        lines = [line.rstrip("\n") for line in sys.stdin]
    for line in lines:
        print(json.dumps(parse(line).to_dict(), sort_keys=True))
    return 0


def _cmd_metrics(args) -> int:
    scores = score_rows(read_predictions(args.predictions), primary_mode=args.mode)
    for key in scores.keys():
        rep = scores.get(key)
        print(json.dumps({"cell": key.slug, **rep.to_dict()}, sort_keys=True))
    if args.out:
        from .harness import write_metrics

        write_metrics(scores, args.out)
    return 0


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.reprompt_invalid is not None:
        cfg.reprompt_invalid = args.reprompt_invalid
    the_plan = plan(cfg)
    for req, reason in the_plan.exclusions:
        logging.getLogger("screenbench").info("excluded %s: %s", req.key, reason)
    result = execute(cfg, the_plan, resume=args.resume)
    print(f"{result.status}: {len(result.records)} records, {len(result.exclusions)} exclusions, "
          f"{len(result.errors)} errors, {result.new_calls} new requests -> {result.run_dir}")
    return 0 if result.status == "complete" else EXIT_PARTIAL


def _cmd_score(args) -> int:
    scores = score(args.run_dir, primary_mode=args.mode)
    print(f"scored {len(scores.reports)} cells -> {Path(args.run_dir) / 'metrics'}")
    return 0


def _cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    metrics_dir = run_dir / "metrics"
    scores = load_metrics(metrics_dir) if metrics_dir.exists() else score(run_dir)
    reference = None
    ref_dir = args.reference
    if ref_dir is None:
        ref_dir = read_run_manifest(run_dir)["config"].get("few_shot", {}).get("zero_shot_run")
    if ref_dir:
        ref = Path(ref_dir)
        reference = load_metrics(ref / "metrics") if (ref / "metrics").exists() else score(ref)
    formats = [f for f in args.formats.split(",")] if args.formats else []
    for p in report(scores, formats, run_dir / "reports", reference=reference, mode=args.mode):
        print(p)
    return 0


def _cmd_compare(args) -> int:
    result = compare_runs(
        args.run_a, args.run_b, args.run_combined, out_dir=args.out,
        modalities=(args.modality_a, args.modality_b, args.modality_combined),
        task=args.task, variant=args.variant, provider=args.provider, shot_mode=args.shot_mode,
    )
    csv_text = result.pop("co_occurrence_csv")
    print(json.dumps(result, indent=2, sort_keys=True))
    if not args.out:
        sys.stdout.write(csv_text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="screenbench", description="Benchmark prompted models on interview screening tasks.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="load a manifest, apply label corrections, print label counts")
    s.add_argument("--manifest", required=True)
    s.add_argument("--layout", default="generic_csv", choices=["generic_csv", "edaic_csv"])
    s.add_argument("--data-root")
    s.add_argument("--ptsd-scale", default="ptsd_reference")
    s.add_argument("--summary", help="write the distribution CSV here instead of stdout")
    s.add_argument("--write-corrected", help="write the corrected manifest CSV here")
    s.set_defaults(func=_cmd_ingest)

    s = sub.add_parser("synth-fixtures", help="generate a synthetic corpus with media stubs")
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--profile", default="paper_marginals", choices=["paper_marginals", "uniform"])
    s.add_argument("--n", type=int, default=40)
    s.add_argument("--inject-known-errors", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_synth)

    s = sub.add_parser("render-prompts", help="print rendered prompts")
    s.add_argument("--manifest", required=True)
    s.add_argument("--layout", default="generic_csv", choices=["generic_csv", "edaic_csv"])
    s.add_argument("--task", required=True, choices=sorted(TASKS))
    s.add_argument("--variant", default="P1")
    s.add_argument("--modality", default="text", choices=["text", "audio", "audio_text"])
    s.add_argument("--id", dest="participant", type=int, action="append", help="repeatable; default all")
    s.add_argument("--out", help="write prompts here instead of stdout")
    s.add_argument("--few-shot", action="store_true", help="binary tasks only")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=_cmd_render)

    s = sub.add_parser("parse", help="parse raw model responses, one per line")
    s.add_argument("--task", required=True, choices=sorted(TASKS))
    s.add_argument("--range", help="lo,hi override for severity tasks")
    s.add_argument("--text", help="a single response (newlines allowed)")
    s.add_argument("--input", help="file of responses, one per line (default stdin)")
    s.set_defaults(func=_cmd_parse)

    s = sub.add_parser("metrics", help="score a predictions CSV")
    s.add_argument("predictions")
    s.add_argument("--mode", default=SCORING_MODES[0], choices=SCORING_MODES)
    s.add_argument("--out", help="directory for per-cell JSON and summary.csv")
    s.set_defaults(func=_cmd_metrics)

    s = sub.add_parser("run", help="execute an experiment config")
    s.add_argument("--config", required=True)
    s.add_argument("--resume", action="store_true")
    s.add_argument("--reprompt-invalid", type=int, metavar="N")
    s.set_defaults(func=_cmd_run)

    s = sub.add_parser("score", help="recompute metrics from a run's predictions.csv")
    s.add_argument("run_dir")
    s.add_argument("--mode", choices=SCORING_MODES)
    s.set_defaults(func=_cmd_score)

    s = sub.add_parser("report", help="render report tables for a scored run")
    s.add_argument("run_dir")
    s.add_argument("--formats", default="md,csv")
    s.add_argument("--reference", help="zero-shot run directory for few-shot deltas")
    s.add_argument("--mode", choices=SCORING_MODES)
    s.set_defaults(func=_cmd_report)

    s = sub.add_parser("compare-modalities", help="MSS, DRS and co-occurrence counts across runs")
    s.add_argument("--run-a", required=True)
    s.add_argument("--run-b", required=True)
    s.add_argument("--run-combined")
    s.add_argument("--task")
    s.add_argument("--variant")
    s.add_argument("--provider")
    s.add_argument("--shot-mode")
    s.add_argument("--modality-a")
    s.add_argument("--modality-b")
    s.add_argument("--modality-combined")
    s.add_argument("--out", help="directory for modality_scores.json and co_occurrence.csv")
    s.set_defaults(func=_cmd_compare)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError, RuntimeError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
