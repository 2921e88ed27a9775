import sys

import pytest

from conftest import needs_z3
from specforge.cfront import frontend
from specforge.errors import EncodingBug, InfrastructureError
from specforge.speclang import check_spec, parse_spec, pretty
from specforge.symex import concretize, execute
from specforge.verifier import (COUNTEREXAMPLE, SPEC_FAULTED, VERIFIED, BackendDisagreement, SolverConfig, Verifier,
                                build_query, check_equiv, differential_check, emit_smtlib, judge_task,
                                oracle_pattern, parse_model, run_solver)

PY = sys.executable


def fake_solver(code, timeout=5.0):
    return SolverConfig((PY, "-c", code), timeout=timeout)


@pytest.fixture(scope="module")
def fig4(fig4_c):
    return execute(frontend(fig4_c))


@pytest.fixture(scope="module")
def fig4_noppid(fig4_c):
    return execute(frontend(fig4_c.replace("    if (proc->ppid != current)\n        return -EACCES;\n", "")))


@pytest.fixture(scope="module")
def spec(fig4_spec):
    return parse_spec(fig4_spec)


def test_smtlib_shape(fig4, spec, config):
    text = emit_smtlib(build_query(fig4, check_spec(spec, config)))
    assert text.count("(declare-const ") == 63
    assert "(check-sat)" in text and "(get-model)" in text
    assert text == emit_smtlib(build_query(fig4, check_spec(spec, config)))


def test_parse_model_formats():
    text = """sat
(
  (define-fun current () (_ BitVec 64)
    #x0000000000000001)
  (define-fun |arg!pid| () (_ BitVec 64) #b10)
  (define-fun k () (_ BitVec 8) (_ bv7 8))
  (define-fun flag () Bool true)
)"""
    assert parse_model(text) == {"current": 1, "arg!pid": 2, "k": 7, "flag": 1}


@needs_z3
def test_fig4_verified(fig4, spec):
    assert check_equiv(fig4, spec).verdict == VERIFIED


@needs_z3
def test_fig4_ppid_deleted(fig4_noppid, spec):
    out = check_equiv(fig4_noppid, spec, keep_script=True)
    assert out.verdict == COUNTEREXAMPLE
    w = out.witness
    impl = concretize(fig4_noppid, w.state, w.args)
    assert impl == w.impl and impl.status == 0 and not w.spec_ok
    d = w.to_dict()
    assert d["args"] == {"pid": w.args[0]} and d["differing_cells"]
    assert "(check-sat)" in out.smt_script


@needs_z3
def test_noop(fixture_text):
    b = execute(frontend(fixture_text("noop.c")))
    assert check_equiv(b, parse_spec(fixture_text("noop.py"))).verdict == VERIFIED


def test_arity_mismatch_faults(fig4, fixture_text):
    out = differential_check(fig4, parse_spec(fixture_text("noop.py")))
    assert out.verdict == SPEC_FAULTED and out.fault.kind == "TypeSortError"


def test_differential(fig4, fig4_noppid, spec):
    assert differential_check(fig4, spec, 2000).verdict == VERIFIED
    out = differential_check(fig4_noppid, spec, 2000)
    assert out.verdict == COUNTEREXAMPLE and out.backend == "diff"
    assert differential_check(fig4_noppid, spec, 2000) == out


def test_solver_failures(fig4, spec):
    script = emit_smtlib(build_query(fig4, check_spec(spec, fig4.config)))
    with pytest.raises(InfrastructureError, match="answered 'unknown'"):
        run_solver(script, fake_solver("print('unknown')"))
    with pytest.raises(InfrastructureError, match="timed out"):
        run_solver(script, fake_solver("import time; time.sleep(5)", timeout=0.3))
    with pytest.raises(InfrastructureError, match="cannot run"):
        run_solver(script, SolverConfig(("no-such-solver-binary",)))


def test_solver_workdir_keeps_script(fig4, spec, tmp_path):
    res = run_solver("(check-sat)\n", SolverConfig((PY, "-c", "print('unsat')"), workdir=tmp_path))
    assert res.status == "unsat"
    assert list(tmp_path.glob("query-*.smt2")) and res.script_path.startswith(str(tmp_path))


def test_unreplayable_witness_is_an_encoding_bug(fig4, spec):
    with pytest.raises(EncodingBug):
        check_equiv(fig4, spec, solver=fake_solver("print('sat')"))


def test_backend_disagreement(fig4_noppid, spec):
    v = Verifier(fake_solver("print('unsat')"), backend="both", samples=2000)
    with pytest.raises(BackendDisagreement):
        v.check(fig4_noppid, spec)


def test_verifier_cache(fig4, spec):
    v = Verifier(backend="diff", samples=500)
    assert v.check(fig4, spec) is v.check(fig4, parse_spec(pretty(spec)))
    with pytest.raises(ValueError):
        Verifier(backend="nope")


def test_smt_prefilter_skips_solver(fig4_noppid, spec):
    # the prefilter finds the bug, so a broken solver is never consulted
    v = Verifier(fake_solver("raise SystemExit(3)"), backend="smt")
    assert v.check(fig4_noppid, spec).verdict == COUNTEREXAMPLE


def test_judge(fig4, fig4_noppid, fig4_spec, fixture_text):
    variants = {"Correct": fig4, "IncorrectPrivilegeCheck": fig4_noppid}
    pat = oracle_pattern(list(variants))
    assert pat == (("Correct", VERIFIED), ("IncorrectPrivilegeCheck", COUNTEREXAMPLE))
    v = Verifier(backend="diff", samples=2000)
    ok = judge_task("t", fig4_spec, variants, pat, v)
    assert ok.passed and ok.outcomes == pat
    d = ok.to_dict(details=True)
    assert d["details"]["IncorrectPrivilegeCheck"]["witness"]
    weak = fig4_spec.replace("        old.procs[pid].ppid == old.current,\n", "")
    bad = judge_task("t", weak, variants, pat, v)
    assert not bad.passed and bad.outcomes == (("Correct", COUNTEREXAMPLE), ("IncorrectPrivilegeCheck", VERIFIED))
    assert judge_task("t", weak, variants, pat, v, only="IncorrectPrivilegeCheck").outcomes == \
        (("IncorrectPrivilegeCheck", VERIFIED),)
    broken = judge_task("t", fixture_text("case3_paren_write.py"), variants, pat, v)
    assert not broken.passed and broken.outcomes == () and broken.fault.kind == "ParseError"
    slt = judge_task("t", fixture_text("slt.py"), variants, pat, v)
    assert slt.outcomes == (("Correct", SPEC_FAULTED),) and slt.fault.kind == "ApiReferenceError"


def test_sampling_is_seeded_and_reaches_success(corpus_by_name, config):
    from specforge.kernel import KernelState
    from specforge.speclang import eval_spec
    from specforge.taskgen import behavior_of
    from specforge.verifier import sample_points
    d = corpus_by_name["sys_map_page"]
    b = behavior_of(d.impl_c, config)
    a = sample_points(b, 2000, 42)
    assert a == sample_points(b, 2000, 42) and a != sample_points(b, 2000, 43)
    fn = parse_spec(d.spec_py)
    ok = sum(eval_spec(fn, KernelState(config, tuple(c)), x, strict=False)[0] for c, x in zip(*a))
    # uniform draws essentially never pass all nine checks; steering should
    assert ok > 100
