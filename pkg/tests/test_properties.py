import pytest
from hypothesis import given, settings, strategies as st

from _props import anchored_points, spec_checker, success_model
from conftest import needs_z3
from specforge.kernel import KernelState
from specforge.speclang import eval_spec, parse_spec
from specforge.symex import compiled_behavior
from specforge.taskgen import behavior_of

WORD = 2 ** 64 - 1
# small values hit the interesting guards; full words exercise wraparound
words = st.one_of(st.integers(0, 5), st.integers(0, WORD))


@pytest.fixture(scope="module")
def pairs(corpus, config):
    return [(d, behavior_of(d.impl_c, config)) for d in corpus]


@settings(max_examples=300, deadline=None)
@given(data=st.data())
def test_encode_eval_agree(pairs, data):
    d, b = data.draw(st.sampled_from(pairs))
    cells = data.draw(st.lists(words, min_size=62, max_size=62))
    args = data.draw(st.lists(words, min_size=len(b.params), max_size=len(b.params)))
    assert spec_checker(d.spec_py, b)(cells, args)


@settings(max_examples=300, deadline=None)
@given(data=st.data())
def test_paths_partition_input_space(bench, data):
    t = data.draw(st.sampled_from(bench.tasks))
    b = behavior_of(t.impl_c, bench.config)
    cells = data.draw(st.lists(words, min_size=62, max_size=62))
    args = data.draw(st.lists(words, min_size=len(b.params), max_size=len(b.params)))
    assert len(compiled_behavior(b).true_paths(cells, args)) == 1


@needs_z3
def test_anchored_points_cover_success(pairs):
    for d, b in pairs:
        pts = anchored_points(success_model(d.spec_py, b), b, 200, 3)
        fn = parse_spec(d.spec_py)
        oks = {eval_spec(fn, KernelState(b.config, tuple(c)), a, strict=False)[0] for c, a in pts}
        assert oks == {True, False}, d.name
