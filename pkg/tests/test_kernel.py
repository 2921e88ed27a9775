import json

import pytest
from hypothesis import given, settings, strategies as st

from specforge.errors import ConfigError, DomainError
from specforge.kernel import (ERRNO, FieldPath, KernelConfig, KernelState, canonical_state, constant_table,
                              copy_state, field_paths, layout, lookup_constant, parse_config, read_field,
                              write_field, zero_state)

CFG = KernelConfig()


def test_layout_size_and_names():
    lay = layout(CFG)
    # 2 scalars, 4 procs x (4 fields + 4 offs), 4 pages x (3 fields + 4 data)
    assert lay.size == 2 + 4 * 8 + 4 * 7 == 62
    assert len(set(lay.names)) == lay.size
    assert lay.offset(FieldPath.parse("procs[].state"), (4,)) is None
    assert lay.offset(FieldPath.parse("procs[].offs[]"), (1, 3)) is not None


def test_parse_config_overrides_sizes():
    cfg = parse_config("# small kernel\nnproc = 3\npage_words: 2\nword_width = 32\n")
    assert (cfg.NPROC, cfg.PAGE_WORDS, cfg.word_width) == (3, 2, 32)
    assert layout(cfg).size == 2 + 3 * 8 + 4 * 5


@pytest.mark.parametrize("text", ["bogus = 1", "nproc = many", "nproc", "nproc = 1", "pte_addr_shift = 64"])
def test_parse_config_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_constants():
    t = constant_table(CFG)
    assert lookup_constant(t, "dt.NPROC") == 4
    assert lookup_constant(t, "dt.proc_state.PROC_RUNNABLE") == 2
    assert lookup_constant(t, "dt.page_type.PAGE_TYPE_IOMMU_PT") == 3
    assert ERRNO["EBUSY"] == 16


def test_field_path_parse():
    assert FieldPath.parse("current") == FieldPath("current")
    assert FieldPath.parse("pages[].data[]") == FieldPath("data", "pages", True)
    assert FieldPath.parse("pages[].data").arity == 2
    for bad in ("nope", "procs[].color", "files[].x", "a.b.c"):
        with pytest.raises(DomainError):
            FieldPath.parse(bad)
    assert {str(p) for p in field_paths()} >= {"current", "procs[].offs[]", "pages[].refcnt"}


def test_canonical_state():
    s = canonical_state()
    assert s.read("current") == 1
    assert s.read("procs[].state", 2) == 1
    assert s.read("procs[].ppid", 2) == 1
    assert s.diff(zero_state(CFG)) == ["current", "pages_ptr_to_int", "procs_2_state", "procs_2_ppid"]


def test_json_round_trip():
    s = write_field(canonical_state(), "pages[].data[]", (3, 1), 77)
    d = json.loads(s.to_json())
    assert d["pages"][3]["data"][1] == 77
    assert KernelState.from_dict(CFG, d) == s


def test_write_errors():
    s = zero_state(CFG)
    with pytest.raises(DomainError):
        write_field(s, "procs[].state", (4,), 1)
    with pytest.raises(DomainError):
        write_field(s, "current", (), 1 << 64)
    with pytest.raises(DomainError):
        read_field(s, "pages[].data[]", (0, 9))


paths = st.sampled_from(field_paths())
words = st.integers(0, CFG.mask)


@st.composite
def state_write(draw):
    cells = tuple(draw(st.lists(words, min_size=layout(CFG).size, max_size=layout(CFG).size)))
    p = draw(paths)
    idx = []
    if p.table is not None:
        idx.append(draw(st.integers(0, getattr(CFG, "NPROC" if p.table == "procs" else "NPAGE") - 1)))
    if p.is_map:
        idx.append(draw(st.integers(0, getattr(CFG, "NOFILE" if p.table == "procs" else "PAGE_WORDS") - 1)))
    return KernelState(CFG, cells), p, tuple(idx), draw(words)


@settings(max_examples=1000, deadline=None)
@given(state_write())
def test_read_after_write(case):
    s, p, idx, v = case
    s2 = write_field(s, p, idx, v)
    assert read_field(s2, p, idx) == v
    off = layout(CFG).offset(p, idx)
    assert all(a == b for i, (a, b) in enumerate(zip(s.cells, s2.cells)) if i != off)


@settings(max_examples=1000, deadline=None)
@given(state_write())
def test_copy_independence(case):
    s, p, idx, v = case
    before = s.cells
    c = copy_state(s)
    assert c == s
    c2 = write_field(c, p, idx, v)
    assert s.cells == before and c.cells == before
    assert read_field(c2, p, idx) == v
