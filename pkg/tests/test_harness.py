import json
import sys
from fractions import Fraction

import pytest

from specforge.errors import InfrastructureError, ProviderError
from specforge.harness import (EvalContext, EvalReport, FailureClass, TaskRecord, aggregate, classify_failure,
                               diff_runs, pass_at_1, percent, render_report, run_eval, signed_percent)
from specforge.harness.schedules import fault_mix, response_for
from specforge.promptkit import ModelConfig, fenced
from specforge.promptkit.providers import Scripted
from specforge.verifier import SolverConfig, Verifier


@pytest.fixture(scope="module")
def ctx(bench):
    return EvalContext.build(bench)


@pytest.fixture(scope="module")
def six(bench):
    return bench.tasks[:6]


def fast():
    return Verifier(backend="diff", samples=2000)


def scripted(rows):
    return Scripted(ModelConfig("scripted", "script"), rows)


@pytest.mark.parametrize("kw,want", [
    (dict(format_failed=True), "FormatError"),
    (dict(fault_kind="ParseError"), "SyntaxError/TypeSort"),
    (dict(fault_kind="TypeSortError"), "SyntaxError/TypeSort"),
    (dict(fault_kind="DomainError"), "SyntaxError/TypeSort"),
    (dict(fault_kind="ApiReferenceError"), "SyntaxError/ApiReference"),
    (dict(category="IPC"), "SemanticError/DomainPattern"),
    (dict(category="page-reclaim"), "SemanticError/DomainPattern"),
    (dict(category="file"), "SemanticError/TranslationLogic"),
    (dict(category="process"), "SemanticError/TranslationLogic"),
    (dict(infrastructure=True, format_failed=True), "Infrastructure"),
])
def test_classify(kw, want):
    assert str(classify_failure(**kw)) == want


def test_failure_class_validation():
    assert FailureClass("FormatError").bucket == "SyntaxError"
    assert FailureClass.from_dict(FailureClass("SyntaxError", "TypeSort").to_dict()) == \
        FailureClass("SyntaxError", "TypeSort")
    for bad in (("SyntaxError",), ("SyntaxError", "DomainPattern"), ("FormatError", "TypeSort"), ("Oops",)):
        with pytest.raises(ValueError):
            FailureClass(*bad)
    with pytest.raises(ValueError):
        classify_failure(fault_kind="Mystery")


@pytest.mark.parametrize("p,t,want", [
    (123, 245, "50.20"), (237, 245, "96.73"), (1, 3, "33.33"), (2, 3, "66.67"), (1, 800, "0.13"),
    (0, 0, "0.00"), (47, 47, "100.00"), (0, 5, "0.00"),
])
def test_percent(p, t, want):
    assert percent(pass_at_1(p, t)) == want


def test_pass_at_1_exact():
    assert pass_at_1(123, 245) == Fraction(123, 245)
    assert signed_percent(Fraction(114, 245)) == "+46.53"
    assert signed_percent(Fraction(-1, 3)) == "-33.33"
    assert signed_percent(Fraction(0)) == "0.00"
    with pytest.raises(ValueError):
        pass_at_1(3, 2)


def rec(tid, passed, failure=None, variant="Correct", syscall="s"):
    return TaskRecord(tid, syscall, "file", variant, "bodhi", "m", None, passed, failure=failure)


def test_task_record_invariant():
    with pytest.raises(ValueError):
        rec("a", True, FailureClass("FormatError"))
    with pytest.raises(ValueError):
        rec("a", False)
    r = TaskRecord("a", "s", "file", "Correct", "bodhi", "m", "x", False, (("Correct", "Counterexample"),),
                   FailureClass("SemanticError", "TranslationLogic"), "d", (3,), (("prompts", "p.txt"),))
    assert TaskRecord.from_dict(json.loads(json.dumps(r.to_dict()))) == r


def test_aggregate_excludes_infrastructure():
    recs = [rec("a", True), rec("b", False, FailureClass("FormatError")),
            rec("c", False, FailureClass("Infrastructure")),
            rec("d", False, FailureClass("SyntaxError", "ApiReference"), variant="MemoryLeak")]
    agg = aggregate(recs)
    assert agg["overall"] == {"passes": 1, "total": 3, "pass_at_1": "1/3", "percent": "33.33"}
    assert list(agg["by_variant"]) == ["MemoryLeak", "Correct"]
    assert agg["buckets"] == {"pass": 1, "syntax": 2, "semantic": 0, "infrastructure": 1}
    assert agg["failures"]["SyntaxError"] == {"TypeSort": 0, "ApiReference": 1}


def test_scripted_run_classes(ctx, six, bench):
    rows, expected = fault_mix(bench)
    sched = {r["task_id"]: r["response_text"] for r in rows}
    rep = run_eval(ctx, ModelConfig("scripted", "s"), "bodhi", provider=scripted(sched), verifier=fast(),
                   tasks=six)
    got = [str(r.failure) if r.failure else "pass" for r in rep.records]
    assert got == ["pass", "pass", "FormatError", "SyntaxError/TypeSort", "SyntaxError/ApiReference",
                   "SemanticError/DomainPattern"]
    assert rep.records[2].spec_text is None
    assert rep.pass_at_1 == Fraction(1, 3)


def test_partial_provider_failure(ctx, six):
    sched = {t.id: fenced(ctx.oracle_spec(t.id)) for t in six[1:]}
    model = ModelConfig("scripted", "s")
    with pytest.raises(ProviderError):
        run_eval(ctx, model, "baseline", provider=scripted(sched), verifier=fast(), tasks=six)
    rep = run_eval(ctx, model, "baseline", provider=scripted(sched), verifier=fast(), tasks=six, partial=True)
    assert str(rep.records[0].failure) == "Infrastructure"
    assert rep.aggregates["overall"]["total"] == 5 and rep.pass_at_1 == 1
    assert rep.manifest["partial"] is True


def test_partial_solver_failure(ctx, six):
    sched = {t.id: fenced(ctx.oracle_spec(t.id)) for t in six}
    broken = Verifier(SolverConfig((sys.executable, "-c", "print('unknown')")), prefilter=0)
    model = ModelConfig("scripted", "s")
    with pytest.raises(InfrastructureError):
        run_eval(ctx, model, "bodhi", provider=scripted(sched), verifier=broken, tasks=six[:1])
    rep = run_eval(ctx, model, "bodhi", provider=scripted(sched), verifier=broken, tasks=six[:1], partial=True)
    assert str(rep.records[0].failure) == "Infrastructure" and rep.records[0].detail.startswith("solver")


def test_run_dir_artifacts(ctx, six, tmp_path):
    sched = {t.id: fenced(ctx.oracle_spec(t.id)) for t in six}
    rep = run_eval(ctx, ModelConfig("scripted", "s"), "bodhi", model_id="demo", provider=scripted(sched),
                   verifier=fast(), tasks=six, run_root=tmp_path)
    (run_dir,) = tmp_path.iterdir()
    assert run_dir.name.startswith("bodhi-demo-")
    for sub in ("prompts", "completions", "verdicts"):
        assert len(list((run_dir / sub).iterdir())) == 6
    assert EvalReport.load(run_dir) == rep
    assert set(json.loads((run_dir / "timings.json").read_text())) == {t.id for t in six}
    verdict = json.loads((run_dir / "verdicts" / f"{six[1].id}.json").read_text())
    assert verdict["pass"] and verdict["details"]


def test_report_formats(ctx, six):
    rows = {t.id: fenced(ctx.oracle_spec(t.id)) if i % 2 else "no code" for i, t in enumerate(six)}
    rep = run_eval(ctx, ModelConfig("scripted", "s"), "bodhi", provider=scripted(rows), verifier=fast(), tasks=six)
    md = render_report(rep, "md")
    assert "| Run | IncorrectPointerOp |" in md and "50.00" in md
    csv_text = render_report(rep, "csv")
    assert len(csv_text.strip().splitlines()) == 7
    assert EvalReport.from_dict(json.loads(render_report(rep, "json"))) == rep
    tampered = json.loads(rep.to_json())
    tampered["aggregates"]["overall"]["passes"] = 6
    with pytest.raises(ValueError):
        EvalReport.from_dict(tampered)
    with pytest.raises(ValueError):
        render_report(rep, "xml")


def test_diff_runs(ctx, six):
    oracle = {t.id: fenced(ctx.oracle_spec(t.id)) for t in six}
    before = dict(oracle, **{six[0].id: "prose"})
    after = dict(oracle, **{six[3].id: response_for("semantic", ctx.oracle_spec(six[3].id))})
    model = ModelConfig("scripted", "s")
    a = run_eval(ctx, model, "baseline", provider=scripted(before), verifier=fast(), tasks=six)
    b = run_eval(ctx, model, "bodhi", provider=scripted(after), verifier=fast(), tasks=six)
    d = diff_runs(a, b)
    assert sorted(d.flips) == sorted([(six[0].id, "fixed"), (six[3].id, "regressed")])
    assert "| sys_set_runnable |" in d.render()
    md = render_report(b, "md", a)
    assert "| Delta |" in md
    c = run_eval(ctx, model, "bodhi", provider=scripted(after), verifier=fast(), tasks=six[:5])
    with pytest.raises(ValueError):
        diff_runs(a, c)


def test_jobs_do_not_change_report(ctx, six):
    rows = {t.id: fenced(ctx.oracle_spec(t.id)) for t in six}
    one = run_eval(ctx, ModelConfig("scripted", "s"), "bodhi", provider=scripted(rows), verifier=fast(), tasks=six)
    many = run_eval(ctx, ModelConfig("scripted", "s"), "bodhi", provider=scripted(rows), verifier=fast(),
                    tasks=six, jobs=3)
    assert one.to_json() == many.to_json()
