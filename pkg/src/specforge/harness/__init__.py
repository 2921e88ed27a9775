"""Evaluation harness: runs, failure classification, metrics and reports."""

from .classify import (API_REFERENCE, DOMAIN_CATEGORIES, DOMAIN_PATTERN, FORMAT, INFRA, SEMANTIC, SYNTAX,
                       TRANSLATION_LOGIC, TYPE_SORT, FailureClass, classify_failure)
from .metrics import pass_at_1, percent, signed_percent
from .run import METHODS, EvalContext, EvalReport, TaskRecord, aggregate, run_eval
from .report import FORMATS, RunDiff, SyscallDiff, diff_runs, render_report

__all__ = [
    "API_REFERENCE", "DOMAIN_CATEGORIES", "DOMAIN_PATTERN", "EvalContext", "EvalReport", "FORMAT", "FORMATS",
    "FailureClass", "INFRA", "METHODS", "RunDiff", "SEMANTIC", "SYNTAX", "SyscallDiff", "TRANSLATION_LOGIC",
    "TYPE_SORT", "TaskRecord", "aggregate", "classify_failure", "diff_runs", "pass_at_1", "percent",
    "render_report", "run_eval", "signed_percent",
]
