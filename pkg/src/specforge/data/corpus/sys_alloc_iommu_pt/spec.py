def sys_alloc_iommu_pt(old, frm, index, to, perm):
    cond = z3.And(
        is_pn_valid(frm),
        old.pages[frm].type == dt.page_type.PAGE_TYPE_IOMMU_PT,
        old.pages[frm].owner == old.current,
        is_idx_valid(index),
        old.pages[frm].data(index) == 0,
        is_pn_valid(to),
        old.pages[to].type == dt.page_type.PAGE_TYPE_FREE)

    new = old.copy()
    new.pages[to].type = dt.page_type.PAGE_TYPE_IOMMU_PT
    new.pages[to].owner = old.current
    new.pages[to].refcnt = z3.BitVecVal(1, 64)
    new.pages[frm].data[index] = (new.pages_ptr_to_int + to * dt.PAGE_SIZE) | perm
    return cond, util.If(cond, new, old)
