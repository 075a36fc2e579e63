"""Experiment orchestration: plan, execute with resume, score and report."""

from .compare import SelectionError, compare, compare_runs, correctness, select_cell
from .config import ConfigInvalid, ExperimentConfig, load_config
from .plan import Plan, PlannedRequest, plan
from .reporting import best_rows, markdown, report, table_rows
from .runner import (
    HashMismatch,
    RunError,
    RunExists,
    RunRecord,
    RunResult,
    execute,
    read_predictions,
    read_records,
    read_run_manifest,
)
from .scoring import NoRecords, ScoreKey, ScoreSet, load_metrics, score, score_rows, write_metrics

__all__ = [
    "ConfigInvalid", "ExperimentConfig", "HashMismatch", "NoRecords", "Plan", "PlannedRequest",
    "RunError", "RunExists", "RunRecord", "RunResult", "ScoreKey", "ScoreSet", "SelectionError",
    "best_rows", "compare", "compare_runs", "correctness", "execute", "load_config", "load_metrics",
    "markdown", "plan", "read_predictions", "read_records", "read_run_manifest", "report", "score",
    "score_rows", "select_cell", "table_rows", "write_metrics",
]
