"""Equivalence checking: SMT backend, differential oracle, task judging."""

from .core import (COUNTEREXAMPLE, SPEC_FAULTED, VERIFIED, VerifyOutcome, Witness, check_equiv,
                   differential_check, iter_points, replay, resolve_spec, sample_points)
from .judge import BACKENDS, BackendDisagreement, TaskVerdict, Verifier, judge_task, oracle_pattern
from .smt import EquivQuery, SolverConfig, SolverResult, build_query, emit_smtlib, parse_model, run_solver

__all__ = [
    "BACKENDS", "BackendDisagreement", "COUNTEREXAMPLE", "EquivQuery", "SPEC_FAULTED", "SolverConfig",
    "SolverResult", "TaskVerdict", "VERIFIED", "Verifier", "VerifyOutcome", "Witness", "build_query",
    "check_equiv", "differential_check", "emit_smtlib", "judge_task", "oracle_pattern", "parse_model",
    "iter_points", "replay", "resolve_spec", "run_solver", "sample_points",
]
