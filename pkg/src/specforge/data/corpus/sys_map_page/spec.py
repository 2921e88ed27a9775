def sys_map_page(old, frm, index, to, perm):
    cond = z3.And(
        is_pn_valid(frm),
        old.pages[frm].type == dt.page_type.PAGE_TYPE_X86_PT,
        old.pages[frm].owner == old.current,
        is_idx_valid(index),
        old.pages[frm].data(index) == 0,
        is_pn_valid(to),
        old.pages[to].type == dt.page_type.PAGE_TYPE_FRAME,
        old.pages[to].owner == old.current,
        (perm & dt.PTE_P) != 0)

    new = old.copy()
    pfn = z3.UDiv(old.pages_ptr_to_int, z3.BitVecVal(dt.PAGE_SIZE, 64)) + to
    new.pages[frm].data[index] = (pfn << dt.PTE_ADDR_SHIFT) | perm
    new.pages[to].refcnt += 1
    return cond, util.If(cond, new, old)
