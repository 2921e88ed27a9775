import pytest
from hypothesis import given, settings, strategies as st

from _props import path_partition
from specforge.kernel import canonical_state, write_field
from specforge.symex import compiled_behavior, concretize, execute
from specforge.cfront import frontend
from specforge.taskgen import behavior_of


@pytest.fixture(scope="module")
def fig4(fig4_c):
    return execute(frontend(fig4_c))


def test_fig4_paths(fig4):
    assert [(p.status, p.errname) for p in fig4.paths] == [(3, "ESRCH"), (13, "EACCES"), (22, "EINVAL"), (0, None)]


def test_fig4_concrete(fig4):
    s = canonical_state()
    ok = concretize(fig4, s, [2])
    assert ok.status == 0 and ok.post.diff(s) == ["procs_2_state"]
    assert concretize(fig4, s, [9]).status == 3
    assert concretize(fig4, s, [3]).status == 13
    running = write_field(s, "procs[].state", (2,), 3)
    assert concretize(fig4, running, [2]).status == 22
    with pytest.raises(ValueError):
        concretize(fig4, s, [])


def test_error_paths_roll_back(corpus_by_name, config):
    # reclaim decrements refcnt before the EBUSY check; the error path must not keep it
    b = behavior_of(corpus_by_name["sys_reclaim_page"].impl_c, config)
    s = canonical_state()
    s = write_field(s, "pages[].type", (1,), 1)
    s = write_field(s, "pages[].owner", (1,), 2)
    s = write_field(s, "pages[].refcnt", (1,), 2)
    s = write_field(s, "procs[].state", (2,), 0)
    out = concretize(b, s, [1])
    assert out.status == 16 and out.post == s
    s1 = write_field(s, "pages[].refcnt", (1,), 1)
    out = concretize(b, s1, [1])
    assert out.status == 0
    assert set(out.post.diff(s1)) == {"procs_2_nr_pages", "pages_1_type", "pages_1_owner", "pages_1_refcnt"}


def test_behaviour_is_hashable_and_stable(fig4_c):
    a, b = execute(frontend(fig4_c)), execute(frontend(fig4_c))
    assert a == b and hash(a) == hash(b)


def test_partition_every_syscall(bench):
    for t in bench.tasks:
        assert path_partition(behavior_of(t.impl_c, bench.config), 200) == []


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 2 ** 64 - 1), min_size=62, max_size=62), st.integers(0, 2 ** 64 - 1))
def test_fig4_exactly_one_path(fig4, cells, pid):
    assert len(compiled_behavior(fig4).true_paths(cells, [pid])) == 1
