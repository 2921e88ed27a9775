// guide: page table PTE formulas (x86 shifted frame numbers), map field syntax
int sys_map_page(pn_t frm, size_t index, pn_t to, uint64_t perm)
{
    struct page *pt;
    struct page *target;

    if (!is_pn_valid(frm))
        return -EINVAL;
    pt = get_page(frm);
    if (pt->type != PAGE_TYPE_X86_PT)
        return -EINVAL;
    if (pt->owner != current)
        return -EACCES;
    if (!is_idx_valid(index))
        return -EINVAL;
    if (pt->data[index] != 0)
        return -EBUSY;
    if (!is_pn_valid(to))
        return -EINVAL;
    target = get_page(to);
    if (target->type != PAGE_TYPE_FRAME)
        return -EINVAL;
    if (target->owner != current)
        return -EACCES;
    if ((perm & PTE_P) == 0)
        return -EINVAL;

    pt->data[index] = (page_pfn(to) << PTE_ADDR_SHIFT) | perm;
    target->refcnt += 1;
    return 0;
}
