"""Command-line entry point: ``specforge <command>``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (ConfigError, DomainError, InfrastructureError, ProviderError, SpecFault, UnknownHelper,
                     UnsupportedConstruct)
from .kernel import load_config

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _bench(args, validate: bool = False):
    from .taskgen import build_benchmark, load_corpus
    return build_benchmark(load_corpus(args.corpus), load_config(args.config), seed=args.seed, validate=validate)


def cmd_gen_tasks(args) -> int:
    from .taskgen import GenerationError, task_counts, write_tasks
    try:
        bench = _bench(args, validate=not args.no_validate)
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    path = write_tasks(bench, args.output)
    counts = ", ".join(f"{k} {v}" for k, v in task_counts(bench.tasks).items())
    print(f"wrote {len(bench.tasks)} tasks to {path} ({counts})")
    return EXIT_OK


def cmd_assemble_prompt(args) -> int:
    from .harness import EvalContext
    from .promptkit import TargetTask, assemble_prompt
    bench = _bench(args)
    task = next((t for t in bench.tasks if t.id == args.task), None)
    if task is None:
        raise ConfigError(f"unknown task {args.task!r}")
    ctx = EvalContext.build(bench, args.prompt_dir)
    bundle = assemble_prompt(TargetTask(task.id, task.syscall, task.description, task.impl_c), ctx.components,
                             not args.no_guide, args.k_shot)
    _emit(bundle.text, args.output)
    if args.output:
        sizes = bundle.sizes()
        total = sum(s["approx_tokens"] for s in sizes.values())
        print(f"wrote {args.output}: ~{total} tokens (approximate, chars/4)")
    return EXIT_OK


def cmd_run(args) -> int:
    from .harness import EvalContext, render_report, run_eval
    from .promptkit import ModelConfig, load_registry, resolve_model
    from .verifier import Verifier
    from .verifier.smt import SolverConfig
    registry = load_registry(args.registry)
    if args.mock:
        model = ModelConfig("scripted", args.model, schedule=args.mock)
    else:
        model = resolve_model(args.model, registry, temperature=args.temperature, max_tokens=args.max_tokens)
    bench = _bench(args)
    tasks = bench.tasks[:args.limit] if args.limit else bench.tasks
    ctx = EvalContext.build(bench, args.prompt_dir)
    verifier = Verifier(SolverConfig.from_string(args.solver, timeout=args.timeout), backend=args.backend,
                        seed=args.seed)
    report = run_eval(ctx, model, args.method, model_id=args.model, verifier=verifier, jobs=args.jobs,
                      seed=args.seed, run_root=args.runs_dir, partial=args.partial,
                      single_variant=args.single_variant, k_shot=args.k_shot, tasks=tasks)
    sys.stdout.write(render_report(report, "md"))
    print(f"\nrun directory: {args.runs_dir}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .cfront import frontend
    from .speclang import check_spec, parse_spec
    from .symex import execute
    from .verifier import COUNTEREXAMPLE, VERIFIED, Verifier, build_query, emit_smtlib
    from .verifier.smt import SolverConfig
    config = load_config(args.config)
    b = execute(frontend(_read(args.impl), config), config)
    try:
        fn = parse_spec(_read(args.spec))
        if args.dump_smt:
            Path(args.dump_smt).write_text(emit_smtlib(build_query(b, check_spec(fn, config))), encoding="utf-8")
    except SpecFault as fault:
        print(f"SpecFaulted: {fault}")
        return EXIT_FAIL
    v = Verifier(SolverConfig.from_string(args.solver, timeout=args.timeout), backend=args.backend,
                 samples=args.samples, seed=args.seed, prefilter=0)
    out = v.check(b, fn)
    if args.json:
        print(json.dumps(out.to_dict(), indent=2, sort_keys=True))
    else:
        print(out.verdict)
        if out.verdict == COUNTEREXAMPLE:
            w = out.witness.to_dict()
            print(f"  args: {w['args']}")
            print(f"  impl: status {w['impl']['status']}, changed {w['impl']['changed']}")
            print(f"  spec: ok={w['spec']['ok']}, changed {w['spec']['changed']}")
            print(f"  differing cells: {', '.join(w['differing_cells']) or '(none; success bits differ)'}")
        elif out.fault is not None:
            print(f"  {out.fault}")
    return EXIT_OK if out.verdict == VERIFIED else EXIT_FAIL


def cmd_lint(args) -> int:
    from .speclang import findings_to_json, lint_spec, parse_spec
    try:
        findings = lint_spec(parse_spec(_read(args.spec)))
    except SpecFault as fault:
        print(f"{args.spec}: {fault}")
        return EXIT_FAIL
    if args.json:
        print(findings_to_json(findings))
    else:
        for f in findings:
            print(f"{args.spec}:{f.line}:{f.col}: [{f.category}] {f.severity}: {f.message}")
    return EXIT_FAIL if any(f.severity == "error" for f in findings) else EXIT_OK


def cmd_report(args) -> int:
    from .harness import EvalReport, render_report
    report = EvalReport.load(args.run)
    other = EvalReport.load(args.against) if args.against else None
    _emit(render_report(report, args.format, other), args.output)
    return EXIT_OK


def cmd_diff(args) -> int:
    from .harness import EvalReport, diff_runs
    d = diff_runs(EvalReport.load(args.run_a), EvalReport.load(args.run_b))
    sys.stdout.write(d.render())
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", help="corpus directory (default: shipped corpus)")
    p.add_argument("--config", help="kernel config file (default: built-in sizes)")
    p.add_argument("--seed", type=int, default=1, help="bug-injection seed")


def _solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", default="z3", help="solver command line; the script path is appended")
    p.add_argument("--timeout", type=float, default=30.0, help="seconds per solver query")
    p.add_argument("--backend", choices=("smt", "diff", "both"), default="smt")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="specforge", description="Push-button spec verification workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-tasks", help="generate the benchmark task set")
    _common(p)
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--no-validate", action="store_true", help="skip the divergence gate")
    p.set_defaults(func=cmd_gen_tasks)

    p = sub.add_parser("assemble-prompt", help="render the prompt for one task")
    _common(p)
    p.add_argument("--task", required=True, help="task id, e.g. sys_dup.Correct")
    p.add_argument("--no-guide", action="store_true", help="baseline prompt without the translation guide")
    p.add_argument("--prompt-dir", help="directory with system.txt, programming_model.md and guide.json")
    p.add_argument("--k-shot", type=int, default=2)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_assemble_prompt)

    p = sub.add_parser("run", help="evaluate a model over the task set")
    _common(p)
    _solver(p)
    p.add_argument("--model", required=True, help="model id from the registry")
    p.add_argument("--method", choices=("baseline", "bodhi"), required=True)
    p.add_argument("--mock", metavar="SCHEDULE", help="answer from a JSONL schedule instead of a provider")
    p.add_argument("--registry", help="model registry JSON (default: shipped)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--limit", type=int, default=0, help="evaluate only the first N tasks")
    p.add_argument("--runs-dir", default="runs")
    p.add_argument("--partial", action="store_true", help="record provider failures instead of aborting")
    p.add_argument("--single-variant", action="store_true", help="judge against the task's own variant only")
    p.add_argument("--temperature", type=float)
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--prompt-dir")
    p.add_argument("--k-shot", type=int, default=2)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="check one implementation against one spec")
    _solver(p)
    p.add_argument("impl")
    p.add_argument("spec")
    p.add_argument("--config")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--dump-smt", metavar="FILE", help="write the SMT-LIB query")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lint", help="lint a spec file")
    p.add_argument("spec")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("report", help="render a run report")
    p.add_argument("run", help="run directory or report.json")
    p.add_argument("--format", choices=("md", "json", "csv"), default="md")
    p.add_argument("--against", help="baseline run to add a delta row")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("diff", help="per-task transitions between two runs")
    p.add_argument("run_a")
    p.add_argument("run_b")
    p.set_defaults(func=cmd_diff)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnknownHelper, UnsupportedConstruct, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ProviderError, InfrastructureError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
