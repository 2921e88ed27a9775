import pytest

from specforge.cfront import Check, Update, default_helper_lib, frontend, parse_impl
from specforge.errors import DomainError, UnknownHelper, UnsupportedConstruct


def test_fig4_lowering(fig4_c):
    ir = frontend(fig4_c)
    assert ir.name == "sys_set_runnable"
    assert ir.params == (("pid", "pid_t"),)
    checks = [i for i in ir.items if isinstance(i, Check)]
    assert [c.errcode for c in checks] == ["ESRCH", "EACCES", "EINVAL"]
    assert sum(isinstance(i, Update) for i in ir.items) == 1
    assert any("proc_ready_add" in a for a in ir.annotations)


def test_parse_impl_keeps_declarations(fig4_c):
    ast = parse_impl(fig4_c)
    assert ast.name == "sys_set_runnable"
    assert len(ast.decls) == 1


def test_corpus_lowers(corpus):
    for d in corpus:
        ir = frontend(d.impl_c)
        assert ir.name == d.name
        assert ir.params == d.params


def test_void_params():
    assert frontend("int noop(void)\n{\n    return 0;\n}\n").params == ()


def test_helper_library_has_accessors():
    lib = default_helper_lib()
    for name in ("get_proc", "get_page", "is_pid_valid", "is_pn_valid", "page_addr", "proc_ready_add"):
        assert name in lib.helpers


@pytest.mark.parametrize("src,exc", [
    ("int f(pid_t x) { while (x) { x = x - 1; } return 0; }", UnsupportedConstruct),
    ("int f(pid_t x) { goto out; out: return 0; }", UnsupportedConstruct),
    ("int f(pid_t x) { x = x * 2; return 0; }", UnsupportedConstruct),
    ("int f(pid_t x) { if (x > 1) return -EWHAT; return 0; }", UnsupportedConstruct),
    ("int f(pid_t x) { return frob(x); }", UnsupportedConstruct),
    ("int f(pid_t x) { frob(x); return 0; }", UnknownHelper),
    ("int f(pid_t pid) { struct proc *p = get_proc(pid); p->color = 1; return 0; }", DomainError),
])
def test_rejections(src, exc):
    with pytest.raises(exc):
        frontend(src)


def test_error_location():
    with pytest.raises(UnsupportedConstruct) as ei:
        frontend("int f(pid_t x) { while (x) { x = x - 1; } return 0; }")
    assert "1:" in str(ei.value) and "while" in str(ei.value)
