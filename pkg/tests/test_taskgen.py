import filecmp

import pytest

from conftest import needs_z3
from specforge.errors import ConfigError, NotApplicable
from specforge.taskgen import (BUG_CLASSES, CORPUS_ORDER, GenerationError, Site, build_benchmark, inject_bug,
                               load_corpus, parse_sites, read_tasks, task_counts, taskset_hash, write_tasks)


def test_corpus_order(corpus):
    assert [d.name for d in corpus] == list(CORPUS_ORDER)
    assert {d.category for d in corpus} == {"IPC", "IOMMU", "page-mapping", "page-reclaim", "file", "process"}


def test_counts(bench):
    assert len(bench.tasks) == 47
    assert task_counts(bench.tasks) == {"Correct": 10, "IncorrectPointerOp": 7, "IncorrectPrivilegeCheck": 8,
                                        "BufferOverflow": 8, "MissingBoundsCheck": 10, "MemoryLeak": 4}
    assert len({t.id for t in bench.tasks}) == 47


def test_set_runnable_variants(corpus_by_name, fig4_c):
    d = corpus_by_name["sys_set_runnable"]
    pv = inject_bug(d, "IncorrectPrivilegeCheck")
    assert "ppid" not in pv and pv.count("return -") == fig4_c.count("return -") - 1
    assert "get_proc(current)" in inject_bug(d, "IncorrectPointerOp")
    assert "pid >= NPROC" in inject_bug(d, "BufferOverflow")
    with pytest.raises(NotApplicable):
        inject_bug(d, "MemoryLeak")
    with pytest.raises(ValueError):
        inject_bug(d, "Typo")


def test_multi_site_choice_is_seeded(corpus_by_name):
    d = corpus_by_name["sys_map_page"]
    assert len(d.sites_for("IncorrectPrivilegeCheck")) == 2
    picks = {inject_bug(d, "IncorrectPrivilegeCheck", seed) for seed in range(20)}
    assert len(picks) == 2
    assert inject_bug(d, "IncorrectPrivilegeCheck", 5) == inject_bug(d, "IncorrectPrivilegeCheck", 5)


def test_site_apply():
    text = "int f(pid_t x)\n{\n    if (x > 3)\n        return -EINVAL;\n    return 0;\n}\n"
    assert Site("delete", "x > 3").apply(text) == "int f(pid_t x)\n{\n    return 0;\n}\n"
    assert "x >= 3" in Site("replace", "x > 3", "x >= 3").apply(text)
    with pytest.raises(ConfigError):
        Site("replace", "return", "yield").apply(text)
    with pytest.raises(ConfigError):
        Site("delete", "nowhere").apply(text)


@pytest.mark.parametrize("text", [
    "IncorrectPointerOp = delete: x", "category = networking", "category = IPC\nTypo = delete: x",
    "category = IPC\nMemoryLeak = remove: x", "category = IPC\nMemoryLeak = replace: a -> b", "nonsense",
])
def test_parse_sites_rejects(text):
    with pytest.raises(ConfigError):
        parse_sites(text)


def _write_syscall(root, name, impl, spec, sites):
    d = root / name
    d.mkdir(parents=True)
    (d / "impl.c").write_text(impl)
    (d / "spec.py").write_text(spec)
    (d / "sites.kv").write_text(sites)
    (d / "desc.txt").write_text("does nothing\n")


def test_zero_site_corpus(tmp_path, fixture_text):
    _write_syscall(tmp_path, "noop", fixture_text("noop.c"), fixture_text("noop.py"), "category = process\n")
    corpus = load_corpus(tmp_path)
    bench = build_benchmark(corpus, validate=False)
    assert [t.id for t in bench.tasks] == ["noop.Correct"]


@needs_z3
def test_validation_rejects_non_diverging_site(tmp_path, corpus_by_name):
    d = corpus_by_name["sys_set_runnable"]
    # replacing a check by an equivalent one does not produce a bug
    sites = "category = process\nBufferOverflow = replace: (!is_pid_valid(pid)) => (!(pid > 0 && pid < NPROC))\n"
    _write_syscall(tmp_path, d.name, d.impl_c, d.spec_py, sites)
    with pytest.raises(GenerationError, match="BufferOverflow"):
        build_benchmark(load_corpus(tmp_path))


def test_double_generation_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    write_tasks(build_benchmark(load_corpus(), validate=False), a)
    write_tasks(build_benchmark(load_corpus(), validate=False), b)
    cmp = filecmp.dircmp(a, b)
    assert (a / "tasks.jsonl").read_bytes() == (b / "tasks.jsonl").read_bytes()
    assert not cmp.diff_files and not cmp.subdirs["impls"].diff_files
    assert len(list((a / "impls").iterdir())) == 47


def test_read_tasks_round_trip(tmp_path, bench):
    path = write_tasks(bench, tmp_path)
    tasks = read_tasks(path)
    assert tasks == list(bench.tasks)
    assert taskset_hash(tasks) == taskset_hash(bench.tasks)
    assert taskset_hash(tasks[:-1]) != taskset_hash(tasks)


def test_bug_classes():
    assert BUG_CLASSES == ("IncorrectPointerOp", "IncorrectPrivilegeCheck", "MemoryLeak", "BufferOverflow",
                           "MissingBoundsCheck")
